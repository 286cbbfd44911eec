#pragma once

// Exact hard-margin solvers: standard SVM, cost-sensitive CS-SVM, group
// GS-SVM and the multiclass CS-SVM, plus separability testing and the
// post-hoc boundary-shift transform.
//
// Solver: coordinate ascent on the QP dual. With an intercept the dual
// carries the equality constraint sum_i y_i alpha_i = 0, so updates move
// pairs of multipliers (one per side of the constraint); pairs are visited
// by random-permutation sweeps with the most-violating partner, and the
// stop rule is a true duality gap (primal value of the rescaled-feasible
// current direction minus the dual value).

#include "vsmargin/common.hpp"
#include "vsmargin/losses.hpp"
#include "vsmargin/model_data.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace vsmargin {

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-example required margins m_i > 0: y_i (w'x_i + b) >= m_i.
struct MarginSpec {
    Vec margins;
    bool with_intercept = true;
};

struct MarginSolution {
    LinearModel model;
    Vec dual;             // per-example multipliers >= 0
    double margin_value;  // min_i achieved_i / required_i
    double duality_gap;   // relative gap at exit
    long sweeps = 0;
};

namespace detail {

constexpr double kGapTol = 1e-10;

// Best feasible rescaling of direction (w, .): choose the intercept b that
// maximizes t(b) = min_i y_i(w'x_i + b)/m_i; (w/t, b/t) is primal feasible
// when t > 0. A(b) (positive class) increases in b and B(b) decreases, so
// the maximizer solves A(b) = B(b) by bisection.
inline double best_feasible_scale(const Vec& f, const IVec& y, const Vec& m,
                                  bool with_intercept, double* b_out) {
    const auto n = f.size();
    auto t_of_b = [&](double b) {
        double t = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i)
            t = std::min(t, y(i) * (f(i) + b) / m(i));
        return t;
    };
    if (!with_intercept) {
        if (b_out) *b_out = 0.0;
        return t_of_b(0.0);
    }
    auto ab_split = [&](double b) {
        double a = std::numeric_limits<double>::infinity();
        double bb = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = y(i) * (f(i) + b) / m(i);
            (y(i) == 1 ? a : bb) = std::min(y(i) == 1 ? a : bb, v);
        }
        return std::make_pair(a, bb);
    };
    double lo = -1.0, hi = 1.0;
    const double span = f.cwiseAbs().maxCoeff() + m.maxCoeff() + 1.0;
    lo = -span;
    hi = span;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        auto [a, b] = ab_split(mid);
        if (a < b) {
            lo = mid;  // A increasing: need larger b
        } else {
            hi = mid;
        }
    }
    const double b_star = 0.5 * (lo + hi);
    if (b_out) *b_out = b_star;
    return t_of_b(b_star);
}

}  // namespace detail

// Minimum-norm (w, b) with y_i (w'x_i + b) >= m_i (b fixed to 0 when
// with_intercept is false). Throws InfeasibleError when no strictly
// separating direction is found.
inline MarginSolution solve_margin(const Dataset& ds, const MarginSpec& spec,
                                   std::uint64_t solver_seed = 1234567) {
    const auto n = ds.n();
    require(spec.margins.size() == n, "solve_margin: margin count mismatch");
    require((spec.margins.array() > 0).all(), "solve_margin: margins must be > 0");

    const Mat K = ds.X * ds.X.transpose();
    const Vec& m = spec.margins;
    const IVec& y = ds.y;
    Vec alpha = Vec::Zero(n);
    Vec f = Vec::Zero(n);  // f_i = w'x_i, maintained incrementally
    std::mt19937_64 rng(solver_seed);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    const long max_sweeps = 200000;
    double gap = std::numeric_limits<double>::infinity();
    double primal = std::numeric_limits<double>::infinity();
    long sweep = 0;

    if (spec.with_intercept) {
        // Candidate intercepts F_i = y_i m_i - f_i. Optimality: some b has
        // b >= F_i for all y_i=+1 (equality when alpha_i > 0) and b <= F_i
        // for all y_i=-1 (equality when alpha_i > 0).
        auto pair_update = [&](int i, int j) {
            const double dij = K(i, i) + K(j, j) - 2.0 * K(i, j);
            if (dij < 1e-14) return false;
            const double Fi = y(i) * m(i) - f(i);
            const double Fj = y(j) * m(j) - f(j);
            double s = (Fi - Fj) / dij;  // alpha_i += y_i s, alpha_j -= y_j s
            double s_max = std::numeric_limits<double>::infinity();
            if (y(i) == -1) s_max = std::min(s_max, alpha(i));
            if (y(j) == 1) s_max = std::min(s_max, alpha(j));
            s = std::clamp(s, 0.0, s_max);
            if (s <= 0.0) return false;
            alpha(i) += y(i) * s;
            alpha(j) -= y(j) * s;
            f += s * (K.col(i) - K.col(j));
            return true;
        };
        // Most-violating partner on the opposite side of index i.
        auto best_partner = [&](int i, bool i_low) {
            int best = -1;
            double best_f = i_low ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
            for (Eigen::Index k = 0; k < n; ++k) {
                if (k == i) continue;
                const double Fk = y(k) * m(k) - f(k);
                if (i_low) {  // need j on the high side: y=-1 or alpha>0
                    if (y(k) == -1 || alpha(k) > 0.0) {
                        if (Fk < best_f) {
                            best_f = Fk;
                            best = int(k);
                        }
                    }
                } else {  // need j on the low side: y=+1 or alpha>0
                    if (y(k) == 1 || alpha(k) > 0.0) {
                        if (Fk > best_f) {
                            best_f = Fk;
                            best = int(k);
                        }
                    }
                }
            }
            return best;
        };
        for (sweep = 1; sweep <= max_sweeps; ++sweep) {
            std::shuffle(perm.begin(), perm.end(), rng);
            for (int i : perm) {
                if (y(i) == 1 || alpha(i) > 0.0) {
                    const int j = best_partner(i, /*i_low=*/true);
                    if (j >= 0) pair_update(i, j);
                }
                if (y(i) == -1 || alpha(i) > 0.0) {
                    const int j = best_partner(i, /*i_low=*/false);
                    if (j >= 0) pair_update(j, i);
                }
            }
            const double wsq = alpha.dot(y.cast<double>().cwiseProduct(f));
            const double dual = m.dot(alpha) - 0.5 * wsq;
            const double t = detail::best_feasible_scale(f, y, m, true, nullptr);
            if (t > 0.0) {
                primal = 0.5 * wsq / (t * t);
                gap = primal - dual;
                if (gap <= detail::kGapTol * std::max(1.0, primal)) break;
            }
        }
    } else {
        for (sweep = 1; sweep <= max_sweeps; ++sweep) {
            std::shuffle(perm.begin(), perm.end(), rng);
            for (int i : perm) {
                if (K(i, i) < 1e-14) continue;
                const double step = (m(i) - y(i) * f(i)) / K(i, i);
                const double new_alpha = std::max(0.0, alpha(i) + step);
                const double delta = new_alpha - alpha(i);
                if (delta != 0.0) {
                    alpha(i) = new_alpha;
                    f += delta * y(i) * K.col(i);
                }
            }
            const double wsq = alpha.dot(y.cast<double>().cwiseProduct(f));
            const double dual = m.dot(alpha) - 0.5 * wsq;
            const double t = detail::best_feasible_scale(f, y, m, false, nullptr);
            if (t > 0.0) {
                primal = 0.5 * wsq / (t * t);
                gap = primal - dual;
                if (gap <= detail::kGapTol * std::max(1.0, primal)) break;
            }
        }
    }

    if (!std::isfinite(gap)) {
        throw InfeasibleError(
            "solve_margin: no separating direction found (infeasible or "
            "ill-conditioned margin program)");
    }

    MarginSolution sol;
    sol.dual = alpha;
    sol.sweeps = sweep;
    sol.model.w = ds.X.transpose() * alpha.cwiseProduct(y.cast<double>());
    if (spec.with_intercept) {
        // Intercept from active constraints: b = y_i m_i - w'x_i, averaged
        // with dual weights over support vectors.
        double num = 0.0, den = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (alpha(i) > 0.0) {
                num += alpha(i) * (y(i) * m(i) - f(i));
                den += alpha(i);
            }
        }
        sol.model.b = den > 0.0 ? num / den : 0.0;
    } else {
        sol.model.b = 0.0;
    }
    sol.duality_gap = gap / std::max(1.0, primal);
    double mv = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        mv = std::min(mv, y(i) * (f(i) + sol.model.b) / m(i));
    sol.margin_value = mv;
    return sol;
}

// Worst KKT residual of a solution: stationarity, dual-feasibility of the
// equality constraint, primal feasibility, and complementary slackness.
inline double kkt_residual(const MarginSolution& sol, const Dataset& ds,
                           const MarginSpec& spec) {
    const auto n = ds.n();
    const Vec w_from_dual =
        ds.X.transpose() * sol.dual.cwiseProduct(ds.y.cast<double>());
    const double scale = std::max(1.0, sol.model.w.norm());
    double res = (sol.model.w - w_from_dual).norm() / scale;
    if (spec.with_intercept) {
        res = std::max(res,
                       std::abs(sol.dual.dot(ds.y.cast<double>())) /
                           std::max(1.0, sol.dual.sum()));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double achieved =
            ds.y(i) * (sol.model.w.dot(ds.X.row(i)) + sol.model.b);
        const double slack = achieved - spec.margins(i);
        res = std::max(res, std::max(0.0, -slack) / spec.margins(i));
        res = std::max(res, std::abs(sol.dual(i) * slack) /
                                std::max(1.0, sol.dual(i)));
    }
    return res;
}

// Linear separability via hull geometry: the classes admit a separating
// (w, b) iff the origin lies strictly outside the Minkowski difference of
// the class hulls (with intercept), or outside the hull of {y_i x_i}
// (without). Frank-Wolfe on the squared distance yields a certificate in
// both directions: a strictly separating iterate proves true; an iterate
// within tolerance of the origin proves false.
inline bool is_separable(const Dataset& ds, bool with_intercept) {
    const auto n = ds.n();
    const auto d = ds.d();
    std::vector<int> plus, minus;
    for (Eigen::Index i = 0; i < n; ++i)
        (ds.y(i) == 1 ? plus : minus).push_back(int(i));
    if (with_intercept && (plus.empty() || minus.empty())) return true;

    const double scale = std::max(1.0, ds.X.rowwise().norm().maxCoeff());

    // Support point of the feasibility polytope minimizing <v, .>.
    auto support_min = [&](const Vec& v) -> Vec {
        if (with_intercept) {
            int bi = plus[0], bj = minus[0];
            double best_p = std::numeric_limits<double>::infinity();
            double best_m = -std::numeric_limits<double>::infinity();
            for (int i : plus) {
                const double s = v.dot(ds.X.row(i));
                if (s < best_p) { best_p = s; bi = i; }
            }
            for (int j : minus) {
                const double s = v.dot(ds.X.row(j));
                if (s > best_m) { best_m = s; bj = j; }
            }
            return ds.X.row(bi).transpose() - ds.X.row(bj).transpose();
        }
        int bi = 0;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = ds.y(i) * v.dot(ds.X.row(i));
            if (s < best) { best = s; bi = int(i); }
        }
        return double(ds.y(bi)) * ds.X.row(bi).transpose();
    };

    auto strictly_separates = [&](const Vec& w) {
        if (w.norm() == 0.0) return false;
        if (with_intercept) {
            double min_p = std::numeric_limits<double>::infinity();
            double max_m = -std::numeric_limits<double>::infinity();
            for (int i : plus) min_p = std::min(min_p, w.dot(ds.X.row(i)));
            for (int j : minus) max_m = std::max(max_m, w.dot(ds.X.row(j)));
            return min_p - max_m > 1e-10 * scale * w.norm();
        }
        for (Eigen::Index i = 0; i < n; ++i)
            if (ds.y(i) * w.dot(ds.X.row(i)) <= 1e-10 * scale * w.norm())
                return false;
        return true;
    };

    Vec u = support_min(Vec::Zero(d));  // arbitrary start vertex
    const double tol0 = 1e-8 * scale;
    for (int it = 0; it < 100000; ++it) {
        if (u.norm() < tol0) return false;
        if (strictly_separates(u)) return true;
        const Vec s = support_min(u);
        // Frank-Wolfe lower bound: min over the polytope of <u/|u|, p>.
        if (u.dot(s) > 0.0) return true;  // origin strictly outside
        const Vec dir = s - u;
        const double denom = dir.squaredNorm();
        if (denom < 1e-30) break;
        const double step = std::clamp(-u.dot(dir) / denom, 0.0, 1.0);
        if (step <= 0.0) break;
        u += step * dir;
    }
    return u.norm() >= tol0 && strictly_separates(u);
}

// CS-SVM: margin delta for class +1 and 1 for class -1.
inline MarginSolution cs_svm(const Dataset& ds, double delta,
                             bool with_intercept) {
    require(delta > 0.0, "cs_svm: delta must be > 0");
    if (!is_separable(ds, with_intercept))
        throw InfeasibleError("cs_svm: data not linearly separable");
    MarginSpec spec;
    spec.with_intercept = with_intercept;
    spec.margins.resize(ds.n());
    for (Eigen::Index i = 0; i < ds.n(); ++i)
        spec.margins(i) = ds.y(i) == 1 ? delta : 1.0;
    return solve_margin(ds, spec);
}

inline MarginSolution svm(const Dataset& ds, bool with_intercept) {
    return cs_svm(ds, 1.0, with_intercept);
}

// GS-SVM: per-group margins (delta_g1 for group 1, delta_g2 for group 2).
inline MarginSolution gs_svm(const Dataset& ds, double delta_g1,
                             double delta_g2, bool with_intercept) {
    require(ds.has_groups(), "gs_svm: dataset carries no group labels");
    require(delta_g1 > 0.0 && delta_g2 > 0.0, "gs_svm: deltas must be > 0");
    if (!is_separable(ds, with_intercept))
        throw InfeasibleError("gs_svm: data not linearly separable");
    MarginSpec spec;
    spec.with_intercept = with_intercept;
    spec.margins.resize(ds.n());
    for (Eigen::Index i = 0; i < ds.n(); ++i)
        spec.margins(i) = ds.g(i) == 1 ? delta_g1 : delta_g2;
    return solve_margin(ds, spec);
}

// Boundary shift: maps the SVM solution to the CS-SVM(delta) solution,
// w_delta = ((delta+1)/2) w_1, b_delta = ((delta+1)/2) b_1 + (delta-1)/2.
inline LinearModel posthoc_transform(const LinearModel& svm_solution,
                                     double delta) {
    require(delta > 0.0, "posthoc_transform: delta must be > 0");
    LinearModel out;
    const double c = 0.5 * (delta + 1.0);
    out.w = c * svm_solution.w;
    out.b = c * svm_solution.b + 0.5 * (delta - 1.0);
    return out;
}

struct MulticlassSolution {
    Mat W;               // C x d
    Vec dual;            // one multiplier per (example, rival-class) pair
    double margin_value; // min achieved margin (required margin is 1)
    double duality_gap;
    long sweeps = 0;
};

// Multiclass CS-SVM: minimum Frobenius-norm W subject to, for every example
// and rival class y' != y_i,
//   PerLogitDelta: x_i'(D_{y_i} w_{y_i} - D_{y'} w_{y'}) >= 1
//   SharedDelta:   D_{y_i} x_i'(w_{y_i} - w_{y'})         >= 1.
// Dual coordinate ascent over the pairwise constraints with random
// permutation sweeps.
inline MulticlassSolution cs_svm_multi(const Dataset& ds, const Vec& Delta,
                                       MulticlassVariant variant,
                                       std::uint64_t solver_seed = 7654321) {
    const int C = int(Delta.size());
    const auto n = ds.n();
    require(C >= 2, "cs_svm_multi: need >= 2 classes");
    require((Delta.array() > 0).all(), "cs_svm_multi: Delta must be > 0");
    require(ds.y.minCoeff() >= 1 && ds.y.maxCoeff() <= C,
            "cs_svm_multi: labels must lie in 1..C");

    const Mat K = ds.X * ds.X.transpose();
    // Constraint k = i*(C-1) + rank of rival class c among classes != y_i.
    struct Cons { int i, c; double coef_own, coef_rival, norm_sq; };
    std::vector<Cons> cons;
    cons.reserve(std::size_t(n) * (C - 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        const int yi = ds.y(i) - 1;
        for (int c = 0; c < C; ++c) {
            if (c == yi) continue;
            Cons ck;
            ck.i = int(i);
            ck.c = c;
            ck.coef_own = Delta(yi);
            ck.coef_rival = variant == MulticlassVariant::SharedDelta
                                ? -Delta(yi)
                                : -Delta(c);
            ck.norm_sq =
                (ck.coef_own * ck.coef_own + ck.coef_rival * ck.coef_rival) *
                K(i, i);
            cons.push_back(ck);
        }
    }
    const int nc = int(cons.size());
    Vec alpha = Vec::Zero(nc);
    Mat scores = Mat::Zero(C, n);  // scores(c, i) = w_c' x_i
    std::mt19937_64 rng(solver_seed);
    std::vector<int> perm(nc);
    std::iota(perm.begin(), perm.end(), 0);

    auto achieved = [&](const Cons& ck) {
        const int yi = ds.y(ck.i) - 1;
        return ck.coef_own * scores(yi, ck.i) + ck.coef_rival * scores(ck.c, ck.i);
    };

    double gap = std::numeric_limits<double>::infinity();
    double primal = std::numeric_limits<double>::infinity();
    long sweep = 0;
    const long max_sweeps = 100000;
    for (sweep = 1; sweep <= max_sweeps; ++sweep) {
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int k : perm) {
            const Cons& ck = cons[std::size_t(k)];
            if (ck.norm_sq < 1e-14) continue;
            const double step = (1.0 - achieved(ck)) / ck.norm_sq;
            const double new_alpha = std::max(0.0, alpha(k) + step);
            const double da = new_alpha - alpha(k);
            if (da == 0.0) continue;
            alpha(k) = new_alpha;
            const int yi = ds.y(ck.i) - 1;
            scores.row(yi) += da * ck.coef_own * K.row(ck.i);
            scores.row(ck.c) += da * ck.coef_rival * K.row(ck.i);
        }
        // W = sum_k alpha_k A_k; |W|_F^2 = sum_k alpha_k <A_k, W>.
        double wsq = 0.0, min_margin = std::numeric_limits<double>::infinity();
        for (int k = 0; k < nc; ++k) {
            const double a = achieved(cons[std::size_t(k)]);
            wsq += alpha(k) * a;
            min_margin = std::min(min_margin, a);
        }
        const double dual = alpha.sum() - 0.5 * wsq;
        if (min_margin > 0.0) {
            primal = 0.5 * wsq / (min_margin * min_margin);
            gap = primal - dual;
            if (gap <= detail::kGapTol * std::max(1.0, primal)) break;
        }
    }
    if (!std::isfinite(gap))
        throw InfeasibleError("cs_svm_multi: no feasible W found");

    MulticlassSolution sol;
    sol.W = Mat::Zero(C, ds.d());
    for (int k = 0; k < nc; ++k) {
        if (alpha(k) == 0.0) continue;
        const Cons& ck = cons[std::size_t(k)];
        const int yi = ds.y(ck.i) - 1;
        sol.W.row(yi) += alpha(k) * ck.coef_own * ds.X.row(ck.i);
        sol.W.row(ck.c) += alpha(k) * ck.coef_rival * ds.X.row(ck.i);
    }
    sol.dual = alpha;
    sol.sweeps = sweep;
    sol.duality_gap = gap / std::max(1.0, primal);
    double mv = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nc; ++k) mv = std::min(mv, achieved(cons[std::size_t(k)]));
    sol.margin_value = mv;
    return sol;
}

}  // namespace vsmargin
