#pragma once

// Sharp high-dimensional asymptotics for the hard-margin family on
// Gaussian-mixture data: the scalarized auxiliary function eta, its inner
// minimization over (rho, b), the root-find in q, separability thresholds,
// risk prediction, and the undersampling mapping.
//
// All expectations reduce to mixtures over the discrete label/group atoms of
// the exact Gaussian partial moment E[min(G + c, 0)^2]; no sampling is used
// on the theory path.

#include "vsmargin/common.hpp"
#include "vsmargin/model_data.hpp"
#include "vsmargin/risk_eval.hpp"

#include <stdexcept>
#include <vector>

namespace vsmargin {

struct RegimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TheoryProblem {
    MeanModel meanModel;
    double pi = 0.5;      // P{y = +1}
    double gamma = 1.0;   // overparameterization ratio d/n
    double delta = 1.0;   // margin ratio
    // Group fields (all meaningful only when has_group is set).
    bool has_group = false;
    double p = 0.5;
    double sigma1 = 1.0;
    double sigma2 = 1.0;

    void validate() const {
        require(gamma > 0.0, "TheoryProblem: gamma must be > 0");
        require(delta > 0.0, "TheoryProblem: delta must be > 0");
        require(pi > 0.0 && pi < 1.0, "TheoryProblem: pi must be in (0,1)");
        if (has_group) {
            require(p > 0.0 && p < 1.0, "TheoryProblem: p must be in (0,1)");
            require(sigma1 > 0.0 && sigma2 > 0.0,
                    "TheoryProblem: sigmas must be > 0");
        }
    }
};

struct AsymptoticTriple {
    double q = 0.0;  // limit of the solution norm
    Vec rho;         // r-vector, ||rho|| <= 1
    double b = 0.0;  // intercept limit
};

namespace detail {

// One discrete atom of the expectation: contributes weight * m(c) with
// c = u'rho + (b_coef * b + shift) / q.
struct EtaAtom {
    double weight;
    Vec u;
    double b_coef;
    double shift;
    int y;  // label sign of the atom (stationarity checks)
};

inline std::vector<EtaAtom> eta_atoms(const TheoryProblem& prob) {
    std::vector<EtaAtom> atoms;
    const MeanModel& mm = prob.meanModel;
    if (!prob.has_group) {
        // Label atoms: y=+1 carries e_1'VS rho + (b - delta)/q, y=-1 carries
        // -e_2'VS rho + (-b - 1)/q.
        atoms.push_back({prob.pi, mm.vs_row(0), 1.0, -prob.delta, 1});
        atoms.push_back({1.0 - prob.pi, Vec(-mm.vs_row(1)), -1.0, -1.0, -1});
    } else {
        // Group atoms over (y, s): (1/sigma_s) e_s'VS rho +
        // (y b - delta_s) / (sigma_s q), delta_1 = delta, delta_2 = 1.
        for (int s = 1; s <= 2; ++s) {
            const double ws = s == 1 ? prob.p : 1.0 - prob.p;
            const double sg = s == 1 ? prob.sigma1 : prob.sigma2;
            const double ds = s == 1 ? prob.delta : 1.0;
            const Vec u = mm.vs_row(s - 1) / sg;
            atoms.push_back({prob.pi * ws, u, 1.0 / sg, -ds / sg, 1});
            atoms.push_back({(1.0 - prob.pi) * ws, u, -1.0 / sg, -ds / sg, -1});
        }
    }
    return atoms;
}

inline double atom_c(const EtaAtom& a, double q, const Vec& rho, double b) {
    return a.u.dot(rho) + (a.b_coef * b + a.shift) / q;
}

inline double eta_from_atoms(const std::vector<EtaAtom>& atoms, double gamma,
                             double q, const Vec& rho, double b) {
    double e = 0.0;
    for (const auto& a : atoms) e += a.weight * neg_part_sq_moment(atom_c(a, q, rho, b));
    return e - (1.0 - rho.squaredNorm()) * gamma;
}

}  // namespace detail

// The scalarized auxiliary function eta(q, rho, b).
inline double eta(const TheoryProblem& prob, double q, const Vec& rho,
                  double b) {
    prob.validate();
    require(q > 0.0, "eta: q must be > 0");
    require(rho.size() == prob.meanModel.r, "eta: rho has wrong length");
    require(rho.norm() <= 1.0 + 1e-10, "eta: ||rho|| must be <= 1");
    return detail::eta_from_atoms(detail::eta_atoms(prob), prob.gamma, q, rho,
                                  b);
}

// Group form of eta; the problem must carry group fields.
inline double eta_group(const TheoryProblem& prob, double q, const Vec& rho,
                        double b) {
    require(prob.has_group, "eta_group: problem carries no group fields");
    return eta(prob, q, rho, b);
}

struct InnerMinResult {
    Vec rho;
    double b;
    double value;          // min eta at this q
    long iterations = 0;
};

// Minimize eta(q, ., .) over ||rho|| <= 1 and b (jointly convex) by
// projected gradient with backtracking; exits when the projected-gradient
// norm falls below 1e-9.
inline InnerMinResult inner_min(const TheoryProblem& prob, double q,
                                const Vec* warm_rho = nullptr,
                                const double* warm_b = nullptr) {
    prob.validate();
    require(q > 0.0, "inner_min: q must be > 0");
    const auto atoms = detail::eta_atoms(prob);
    const int r = prob.meanModel.r;
    const double gamma = prob.gamma;

    Vec rho = warm_rho ? *warm_rho : Vec::Zero(r);
    // Work in the rescaled intercept beta = b / q so the curvature of the
    // smooth part is comparable across coordinates for any q.
    double beta = (warm_b ? *warm_b : 0.0) / q;
    if (rho.norm() > 1.0) rho /= rho.norm();

    // Smooth part h(rho, beta) = sum_a w_a m(c_a) + gamma ||rho||^2 (the
    // constant -gamma is added back at the end).
    auto value_of = [&](const Vec& rr, double bt) {
        double v = gamma * rr.squaredNorm();
        for (const auto& a : atoms)
            v += a.weight *
                 neg_part_sq_moment(a.u.dot(rr) + a.b_coef * bt + a.shift / q);
        return v;
    };
    auto grad_of = [&](const Vec& rr, double bt, Vec& g_rho, double& g_b) {
        g_rho = 2.0 * gamma * rr;
        g_b = 0.0;
        for (const auto& a : atoms) {
            const double md = neg_part_sq_moment_deriv(
                a.u.dot(rr) + a.b_coef * bt + a.shift / q);
            g_rho += a.weight * md * a.u;
            g_b += a.weight * md * a.b_coef;
        }
    };
    auto project = [](Vec v) {
        const double nn = v.norm();
        if (nn > 1.0) v /= nn;
        return v;
    };

    double step = 1.0;
    double val = value_of(rho, beta);
    Vec g_rho(r);
    double g_b = 0.0;
    const long max_iters = 100000;
    long it = 0;
    long stagnant = 0;
    double best_val = val;
    for (it = 0; it < max_iters; ++it) {
        grad_of(rho, beta, g_rho, g_b);
        // Projected-gradient mapping at unit step for the stop test. The
        // tolerance scales with the objective and sits at the sqrt(eps)
        // noise floor attainable in double precision.
        const Vec rho_try = project(rho - g_rho);
        const double pg =
            std::sqrt((rho - rho_try).squaredNorm() + g_b * g_b);
        if (pg <= 1e-8 * std::max(1.0, std::abs(val))) break;
        // Terminate once the objective has been flat for many sweeps: the
        // iterate is then wandering inside the numerically flat basin.
        if (val >= best_val - 1e-15 * std::max(1.0, std::abs(best_val))) {
            if (++stagnant >= 500) break;
        } else {
            best_val = val;
            stagnant = 0;
        }
        // Backtracking line search on the projected step.
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Vec rho_new = project(rho - step * g_rho);
            const double b_new = beta - step * g_b;
            const double val_new = value_of(rho_new, b_new);
            const Vec diff = rho_new - rho;
            const double db = b_new - beta;
            const double decrease =
                g_rho.dot(diff) + g_b * db +
                0.5 / step * (diff.squaredNorm() + db * db);
            if (val_new <= val + decrease + 1e-15 * std::abs(val)) {
                rho = rho_new;
                beta = b_new;
                val = val_new;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;        // step underflow: at numerical optimum
        step = std::min(step * 2.0, 1e6);
    }
    if (it >= max_iters) {
        throw std::runtime_error(
            "inner_min: projected gradient did not converge in 1e5 "
            "iterations (q=" + std::to_string(q) + ")");
    }
    InnerMinResult res;
    res.rho = rho;
    res.b = beta * q;
    res.value = val - gamma;  // restore the -(1-||rho||^2) gamma constant
    res.iterations = it;
    return res;
}

// Separability threshold gamma_star = min over (t, b) of
// E[(sqrt(1+||t||^2) G + E'VSt - bY)_-^2]; value in (0, 1/2].
namespace detail {

struct GammaStarAtom {
    double weight;
    Vec u;
    int y;
};

inline std::vector<GammaStarAtom> gamma_star_atoms(const MeanModel& mm,
                                                   double pi, bool has_group,
                                                   double p) {
    std::vector<GammaStarAtom> atoms;
    if (!has_group) {
        atoms.push_back({pi, mm.vs_row(0), 1});
        atoms.push_back({1.0 - pi, Vec(-mm.vs_row(1)), -1});
    } else {
        for (int s = 1; s <= 2; ++s) {
            const double ws = s == 1 ? p : 1.0 - p;
            atoms.push_back({pi * ws, mm.vs_row(s - 1), 1});
            atoms.push_back({(1.0 - pi) * ws, mm.vs_row(s - 1), -1});
        }
    }
    return atoms;
}

inline double gamma_star_from_atoms(const std::vector<GammaStarAtom>& atoms,
                                    int r) {
    // psi(t, b) = sum_a w_a sigma^2 m((u_a't - y_a b)/sigma) with
    // sigma = sqrt(1 + ||t||^2); minimized by gradient descent with
    // backtracking from a few starts (dimension r+1 <= 3).
    auto psi = [&](const Vec& t, double b) {
        const double sig = std::sqrt(1.0 + t.squaredNorm());
        double v = 0.0;
        for (const auto& a : atoms) {
            const double c = (a.u.dot(t) - a.y * b) / sig;
            v += a.weight * sig * sig * neg_part_sq_moment(c);
        }
        return v;
    };
    auto grad = [&](const Vec& t, double b, Vec& gt, double& gb) {
        const double sig = std::sqrt(1.0 + t.squaredNorm());
        gt = Vec::Zero(t.size());
        gb = 0.0;
        for (const auto& a : atoms) {
            const double aff = a.u.dot(t) - a.y * b;
            const double c = aff / sig;
            const double m = neg_part_sq_moment(c);
            const double md = neg_part_sq_moment_deriv(c);
            // d/dt [sig^2 m(aff/sig)] = 2 sig m sig_t + sig md a_t - md aff sig_t
            const Vec sig_t = t / sig;
            gt += a.weight *
                  (2.0 * sig * m * sig_t + sig * md * a.u - md * aff * sig_t);
            gb += a.weight * sig * md * double(-a.y);
        }
    };

    double best = std::numeric_limits<double>::infinity();
    for (int start = 0; start < 3; ++start) {
        Vec t = Vec::Zero(r);
        double b = 0.0;
        if (start == 1) t = Vec::Constant(r, 1.0);
        if (start == 2) {
            t = Vec::Constant(r, -1.0);
            b = 0.5;
        }
        double val = psi(t, b);
        double step = 1.0;
        Vec gt(r);
        double gb = 0.0;
        for (long it = 0; it < 200000; ++it) {
            grad(t, b, gt, gb);
            const double gn = std::sqrt(gt.squaredNorm() + gb * gb);
            if (gn <= 1e-11) break;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                const Vec t_new = t - step * gt;
                const double b_new = b - step * gb;
                const double v_new = psi(t_new, b_new);
                if (v_new <= val - 0.25 * step * gn * gn) {
                    t = t_new;
                    b = b_new;
                    val = v_new;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
            step = std::min(step * 2.0, 1e4);
        }
        best = std::min(best, val);
    }
    return best;
}

}  // namespace detail

inline double gamma_star(const MeanModel& mm, double pi) {
    require(pi > 0.0 && pi < 1.0, "gamma_star: pi must be in (0,1)");
    return detail::gamma_star_from_atoms(
        detail::gamma_star_atoms(mm, pi, false, 0.5), mm.r);
}

inline double gamma_star_group(const MeanModel& mm, double pi, double p) {
    require(pi > 0.0 && pi < 1.0, "gamma_star_group: pi must be in (0,1)");
    require(p > 0.0 && p < 1.0, "gamma_star_group: p must be in (0,1)");
    return detail::gamma_star_from_atoms(
        detail::gamma_star_atoms(mm, pi, true, p), mm.r);
}

inline double gamma_star(const TheoryProblem& prob) {
    return prob.has_group
               ? gamma_star_group(prob.meanModel, prob.pi, prob.p)
               : gamma_star(prob.meanModel, prob.pi);
}

// Solve the fixed-point system: f(q) = min_{rho,b} eta(q, rho, b) is
// strictly decreasing with a unique root; bracket by geometric expansion
// from [1e-3, 1e3] and bisect to |f| <= 1e-9.
inline AsymptoticTriple solve_triple(const TheoryProblem& prob) {
    prob.validate();
    const double gs = gamma_star(prob);
    if (prob.gamma <= gs + 1e-6) {
        throw RegimeError(
            "solve_triple: gamma = " + std::to_string(prob.gamma) +
            " is not above the separability threshold gamma_star = " +
            std::to_string(gs) + " (non-separable regime)");
    }

    Vec warm_rho = Vec::Zero(prob.meanModel.r);
    double warm_b = 0.0;
    auto f = [&](double q) {
        const auto res = inner_min(prob, q, &warm_rho, &warm_b);
        warm_rho = res.rho;
        warm_b = res.b;
        return res.value;
    };

    double lo = 1e-3, hi = 1e3;
    double f_lo = f(lo), f_hi = f(hi);
    int expand = 0;
    while (f_lo <= 0.0 && lo > 1e-6) {
        lo /= 10.0;
        f_lo = f(lo);
        if (++expand > 12) break;
    }
    expand = 0;
    while (f_hi >= 0.0 && hi < 1e6) {
        hi *= 10.0;
        f_hi = f(hi);
        if (++expand > 12) break;
    }
    if (!(f_lo > 0.0 && f_hi < 0.0)) {
        throw std::runtime_error(
            "solve_triple: failed to bracket the root of f(q)");
    }
    double q = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        q = 0.5 * (lo + hi);
        const double fq = f(q);
        if (std::abs(fq) <= 1e-9) break;
        if (fq > 0.0) {
            lo = q;
        } else {
            hi = q;
        }
    }
    const auto res = inner_min(prob, q, &warm_rho, &warm_b);
    AsymptoticTriple triple;
    triple.q = q;
    triple.rho = res.rho;
    triple.b = res.b;
    return triple;
}

// Asymptotic risk prediction from a solved triple.
inline RiskReport predict_risks(const AsymptoticTriple& triple,
                                const TheoryProblem& prob) {
    prob.validate();
    const MeanModel& mm = prob.meanModel;
    RiskReport r;
    if (!prob.has_group) {
        r.R_plus = q_function(mm.vs_row(0).dot(triple.rho) + triple.b / triple.q);
        r.R_minus =
            q_function(-mm.vs_row(1).dot(triple.rho) - triple.b / triple.q);
        detail::finalize_label(r, prob.pi);
    } else {
        const double m1 = mm.vs_row(0).dot(triple.rho);
        const double m2 = mm.vs_row(1).dot(triple.rho);
        const double boq = triple.b / triple.q;
        r.R_plus_g1 = q_function((m1 + boq) / prob.sigma1);
        r.R_plus_g2 = q_function((m2 + boq) / prob.sigma2);
        r.R_minus_g1 = q_function((m1 - boq) / prob.sigma1);
        r.R_minus_g2 = q_function((m2 - boq) / prob.sigma2);
        detail::finalize_group(r, prob.pi, prob.p);
    }
    return r;
}

// Undersampling mapping: balancing the training set by subsampling the
// majority class is asymptotically the balanced problem at the inflated
// ratio gamma / (2 pi).
inline RiskReport undersampling_risks(double gamma, double pi,
                                      const MeanModel& mm) {
    require(pi > 0.0 && pi <= 0.5, "undersampling_risks: need pi in (0, 1/2]");
    TheoryProblem mapped;
    mapped.meanModel = mm;
    mapped.pi = 0.5;
    mapped.gamma = gamma / (2.0 * pi);
    mapped.delta = 1.0;
    const double gs = gamma_star(mm, 0.5);
    if (mapped.gamma <= gs + 1e-6) {
        throw RegimeError(
            "undersampling_risks: mapped gamma below the separability "
            "threshold");
    }
    const auto triple = solve_triple(mapped);
    return predict_risks(triple, mapped);
}

}  // namespace vsmargin
