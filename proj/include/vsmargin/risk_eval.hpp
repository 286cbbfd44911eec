#pragma once

// Exact (closed-form) and Monte-Carlo evaluation of the classification and
// fairness metrics of a linear classifier under a Gaussian-mixture spec.

#include "vsmargin/common.hpp"
#include "vsmargin/model_data.hpp"

#include <limits>
#include <random>

namespace vsmargin {

// Per-class / per-subgroup error probabilities and derived metrics.
// Group entries are NaN when the spec carries no groups.
struct RiskReport {
    double R_plus = std::numeric_limits<double>::quiet_NaN();
    double R_minus = std::numeric_limits<double>::quiet_NaN();
    double R = std::numeric_limits<double>::quiet_NaN();      // pi R+ + (1-pi) R-
    double R_bal = std::numeric_limits<double>::quiet_NaN();  // (R+ + R-)/2

    // Conditional risks R_{sign, group}; group index 1 or 2.
    double R_plus_g1 = std::numeric_limits<double>::quiet_NaN();
    double R_plus_g2 = std::numeric_limits<double>::quiet_NaN();
    double R_minus_g1 = std::numeric_limits<double>::quiet_NaN();
    double R_minus_g2 = std::numeric_limits<double>::quiet_NaN();
    double DEO = std::numeric_limits<double>::quiet_NaN();      // R_{+,1} - R_{+,2}
    double SymmDEO = std::numeric_limits<double>::quiet_NaN();
    double worst_group = std::numeric_limits<double>::quiet_NaN();

    // Standard errors (Monte-Carlo path only).
    double se_R_plus = std::numeric_limits<double>::quiet_NaN();
    double se_R_minus = std::numeric_limits<double>::quiet_NaN();
    double se_R_plus_g1 = std::numeric_limits<double>::quiet_NaN();
    double se_R_plus_g2 = std::numeric_limits<double>::quiet_NaN();
    double se_R_minus_g1 = std::numeric_limits<double>::quiet_NaN();
    double se_R_minus_g2 = std::numeric_limits<double>::quiet_NaN();

    bool has_groups = false;
};

namespace detail {

inline void finalize_label(RiskReport& r, double pi) {
    r.R_bal = 0.5 * (r.R_plus + r.R_minus);
    r.R = pi * r.R_plus + (1.0 - pi) * r.R_minus;
}

inline void finalize_group(RiskReport& r, double pi, double p) {
    r.R_plus = p * r.R_plus_g1 + (1.0 - p) * r.R_plus_g2;
    r.R_minus = p * r.R_minus_g1 + (1.0 - p) * r.R_minus_g2;
    finalize_label(r, pi);
    r.DEO = r.R_plus_g1 - r.R_plus_g2;
    r.SymmDEO = 0.5 * (std::abs(r.R_plus_g1 - r.R_plus_g2) +
                       std::abs(r.R_minus_g1 - r.R_minus_g2));
    r.worst_group = std::max({r.R_plus_g1, r.R_plus_g2, r.R_minus_g1,
                              r.R_minus_g2});
    r.has_groups = true;
}

}  // namespace detail

// Label case: R+ = Q((mu_+'w + b)/||Sigma^{1/2} w||), and symmetrically for
// the negative class. Exact conditional error probabilities given (w, b).
inline RiskReport closed_form_risks(const LinearModel& model,
                                    const LabelGmmSpec& spec) {
    require(model.w.norm() > 0.0, "closed_form_risks: zero weight vector");
    double denom;
    if (spec.covariance) {
        denom = std::sqrt(model.w.dot(*spec.covariance * model.w));
    } else {
        denom = model.w.norm();
    }
    RiskReport r;
    r.R_plus = q_function((spec.mu_plus().dot(model.w) + model.b) / denom);
    r.R_minus = q_function((-spec.mu_minus().dot(model.w) - model.b) / denom);
    detail::finalize_label(r, spec.pi);
    return r;
}

// Group case: x | (y,g) ~ N(y mu_g, sigma_g^2 I), so
// R_{+,g} = Q((mu_g'w + b)/(sigma_g ||w||)),
// R_{-,g} = Q((mu_g'w - b)/(sigma_g ||w||)).
inline RiskReport closed_form_risks(const LinearModel& model,
                                    const GroupGmmSpec& spec) {
    require(model.w.norm() > 0.0, "closed_form_risks: zero weight vector");
    const double nw = model.w.norm();
    RiskReport r;
    const double m1 = spec.mu_group(1).dot(model.w);
    const double m2 = spec.mu_group(2).dot(model.w);
    r.R_plus_g1 = q_function((m1 + model.b) / (spec.sigma1 * nw));
    r.R_plus_g2 = q_function((m2 + model.b) / (spec.sigma2 * nw));
    r.R_minus_g1 = q_function((m1 - model.b) / (spec.sigma1 * nw));
    r.R_minus_g2 = q_function((m2 - model.b) / (spec.sigma2 * nw));
    detail::finalize_group(r, spec.pi, spec.p);
    return r;
}

namespace detail {

// Error rate of sign(w'x + b) against target label y on n_s draws from
// N(mean, scale^2 I) (covariance path: chol * z noise).
struct StratumResult {
    double rate;
    double se;
};

inline StratumResult mc_stratum(const LinearModel& model, const Vec& mean,
                                double scale, const Mat* chol, int target_y,
                                int n_s, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto d = model.w.size();
    Vec z(d);
    int errors = 0;
    for (int i = 0; i < n_s; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) z(j) = gauss(rng);
        double noise = chol ? model.w.dot(*chol * z) : scale * model.w.dot(z);
        double score = model.w.dot(mean) + noise + model.b;
        int pred = score >= 0.0 ? 1 : -1;
        errors += (pred != target_y);
    }
    StratumResult res;
    res.rate = double(errors) / n_s;
    res.se = std::sqrt(std::max(res.rate * (1.0 - res.rate), 1e-12) / n_s);
    return res;
}

}  // namespace detail

// Stratified Monte-Carlo risks: n_test/2 per class (label case) or n_test/4
// per (class, group) cell, so minority conditional risks carry usable
// standard errors. Deterministic for a fixed seed.
inline RiskReport mc_risks(const LinearModel& model, const LabelGmmSpec& spec,
                           int n_test, std::uint64_t seed) {
    require(n_test >= 1000, "mc_risks: need n_test >= 1000");
    std::mt19937_64 rng(seed);
    Mat chol;
    const Mat* cholp = nullptr;
    if (spec.covariance) {
        chol = detail::cholesky_factor(*spec.covariance);
        cholp = &chol;
    }
    const int n_s = n_test / 2;
    RiskReport r;
    auto sp = detail::mc_stratum(model, spec.mu_plus(), 1.0, cholp, 1, n_s, rng);
    auto sm = detail::mc_stratum(model, spec.mu_minus(), 1.0, cholp, -1, n_s, rng);
    r.R_plus = sp.rate;
    r.se_R_plus = sp.se;
    r.R_minus = sm.rate;
    r.se_R_minus = sm.se;
    detail::finalize_label(r, spec.pi);
    return r;
}

inline RiskReport mc_risks(const LinearModel& model, const GroupGmmSpec& spec,
                           int n_test, std::uint64_t seed) {
    require(n_test >= 1000, "mc_risks: need n_test >= 1000");
    std::mt19937_64 rng(seed);
    const int n_s = n_test / 4;
    RiskReport r;
    const Vec mu1 = spec.mu_group(1), mu2 = spec.mu_group(2);
    auto p1 = detail::mc_stratum(model, mu1, spec.sigma1, nullptr, 1, n_s, rng);
    auto p2 = detail::mc_stratum(model, mu2, spec.sigma2, nullptr, 1, n_s, rng);
    auto m1 = detail::mc_stratum(model, Vec(-mu1), spec.sigma1, nullptr, -1, n_s, rng);
    auto m2 = detail::mc_stratum(model, Vec(-mu2), spec.sigma2, nullptr, -1, n_s, rng);
    r.R_plus_g1 = p1.rate;
    r.se_R_plus_g1 = p1.se;
    r.R_plus_g2 = p2.rate;
    r.se_R_plus_g2 = p2.se;
    r.R_minus_g1 = m1.rate;
    r.se_R_minus_g1 = m1.se;
    r.R_minus_g2 = m2.rate;
    r.se_R_minus_g2 = m2.se;
    r.se_R_plus = std::sqrt(spec.p * spec.p * p1.se * p1.se +
                            (1 - spec.p) * (1 - spec.p) * p2.se * p2.se);
    r.se_R_minus = std::sqrt(spec.p * spec.p * m1.se * m1.se +
                             (1 - spec.p) * (1 - spec.p) * m2.se * m2.se);
    detail::finalize_group(r, spec.pi, spec.p);
    return r;
}

}  // namespace vsmargin
