#pragma once

// Closed-form optimal margin ratio delta_star (from the delta = 1 theory
// triple) and its data-dependent estimator.

#include "vsmargin/asymptotics.hpp"
#include "vsmargin/common.hpp"
#include "vsmargin/maxmargin.hpp"

namespace vsmargin {

// Signed margins and inverse norm of the standard-SVM (delta = 1) solution:
// ell_plus = e_1'VS rho_1 + b_1/q_1, ell_minus = -e_2'VS rho_1 - b_1/q_1.
struct SvmSummary {
    double ell_plus = 0.0;
    double ell_minus = 0.0;
    double q1_inv = 0.0;

    void validate() const {
        require(std::isfinite(ell_plus) && std::isfinite(ell_minus),
                "SvmSummary: margins must be finite");
        require(q1_inv > 0.0, "SvmSummary: q1_inv must be > 0");
    }
};

// Sentinel values used when a concrete classifier must be produced for the
// divergent branches.
inline constexpr double kDeltaStarInfCap = 1e6;
inline constexpr double kDeltaStarZeroFloor = 1e-6;

struct DeltaStarResult {
    double delta;  // finite ratio, or the capped/floored sentinel
    int branch;    // 1: finite optimum; 2: delta -> infinity; 3: delta -> 0
    bool is_sentinel() const { return branch != 1; }
};

// Three-branch closed form on the signs of (l+ + l-) and (l+ - l- + 2/q1).
inline DeltaStarResult delta_star(const SvmSummary& summary) {
    summary.validate();
    const double lp = summary.ell_plus;
    const double lm = summary.ell_minus;
    const double two_qinv = 2.0 * summary.q1_inv;
    DeltaStarResult res;
    if (lp + lm >= 0.0) {
        const double num = lm - lp + two_qinv;
        const double denom = lp - lm + two_qinv;
        if (denom > 0.0 && num > 0.0) {
            res.branch = 1;
            res.delta = num / denom;
        } else if (denom <= 0.0) {
            res.branch = 2;
            res.delta = kDeltaStarInfCap;
        } else {
            // Interior stationary point sits below the delta > 0 range; the
            // constrained optimum is the vanishing-margin end.
            res.branch = 3;
            res.delta = kDeltaStarZeroFloor;
        }
    } else {
        // Interior stationary point is a maximum here: the optimum is
        // whichever margin-ratio extreme gives the smaller balanced error.
        const double at_zero = 0.5 * (q_function(lp - summary.q1_inv) +
                                      q_function(lm + summary.q1_inv));
        const double at_inf = 0.5 * (q_function(lp + summary.q1_inv) +
                                     q_function(lm - summary.q1_inv));
        if (at_zero <= at_inf) {
            res.branch = 3;
            res.delta = kDeltaStarZeroFloor;
        } else {
            res.branch = 2;
            res.delta = kDeltaStarInfCap;
        }
    }
    return res;
}

// Balanced-error objective as an explicit function of delta through the
// shift x = ((delta-1)/(delta+1))/q1; used as the grid oracle and for
// monotonicity checks.
inline double r_bal_of_delta(const SvmSummary& summary, double delta) {
    const double x = (delta - 1.0) / (delta + 1.0) * summary.q1_inv;
    return 0.5 * (q_function(summary.ell_plus + x) +
                  q_function(summary.ell_minus - x));
}

inline SvmSummary summary_from_triple(const AsymptoticTriple& triple,
                                      const MeanModel& mm) {
    SvmSummary s;
    s.ell_plus = mm.vs_row(0).dot(triple.rho) + triple.b / triple.q;
    s.ell_minus = -mm.vs_row(1).dot(triple.rho) - triple.b / triple.q;
    s.q1_inv = 1.0 / triple.q;
    return s;
}

// Solve the delta = 1 system and apply the closed form.
inline DeltaStarResult delta_star_from_theory(const TheoryProblem& problem) {
    require(!problem.has_group,
            "delta_star_from_theory: no closed form exists for the group case");
    TheoryProblem at_one = problem;
    at_one.delta = 1.0;
    const auto triple = solve_triple(at_one);
    return delta_star(summary_from_triple(triple, problem.meanModel));
}

// Data-dependent estimator: run the standard SVM, estimate the class means
// by sample averages, and apply the closed form with
// l~_pm = +-(w_1'mu~_pm + b_1)/||w_1|| and q~_1 = ||w_1||.
inline DeltaStarResult delta_star_heuristic(const Dataset& ds) {
    const auto sol = svm(ds, /*with_intercept=*/true);
    const auto n = ds.n();
    Vec mu_p = Vec::Zero(ds.d()), mu_m = Vec::Zero(ds.d());
    int n_p = 0, n_m = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (ds.y(i) == 1) {
            mu_p += ds.X.row(i).transpose();
            ++n_p;
        } else {
            mu_m += ds.X.row(i).transpose();
            ++n_m;
        }
    }
    require(n_p > 0 && n_m > 0, "delta_star_heuristic: need both classes");
    mu_p /= double(n_p);
    mu_m /= double(n_m);
    const double wn = sol.model.w.norm();
    SvmSummary s;
    s.ell_plus = (sol.model.w.dot(mu_p) + sol.model.b) / wn;
    s.ell_minus = -(sol.model.w.dot(mu_m) + sol.model.b) / wn;
    s.q1_inv = 1.0 / wn;
    return delta_star(s);
}

}  // namespace vsmargin
