#pragma once

// The VS-loss family: per-class weights (omega), additive logit adjustments
// (iota), and multiplicative logit adjustments (delta); binary, multiclass
// (both parameterizations), and group-sensitive forms, plus named presets.

#include "vsmargin/common.hpp"
#include "vsmargin/model_data.hpp"

#include <string>
#include <vector>

namespace vsmargin {

// Per-class triples (omega_y, iota_y, delta_y). For the binary loss, index 0
// is class +1 and index 1 is class -1. For multiclass, index c is class c+1.
struct VsParams {
    Vec omega;
    Vec iota;
    Vec delta;

    int num_classes() const { return int(omega.size()); }

    void validate() const {
        require(omega.size() == iota.size() && omega.size() == delta.size(),
                "VsParams: per-class vectors must have equal length");
        require((omega.array() > 0).all(), "VsParams: omega must be > 0");
        require((delta.array() > 0).all(), "VsParams: delta must be > 0");
    }

    int index_of_label(int y) const { return y == 1 ? 0 : 1; }
};

// Per-subgroup (y,g) triples; row index 0/1 <-> y = +1/-1, column index
// 0/1 <-> g = 1/2.
struct GroupVsParams {
    Mat omega{2, 2};
    Mat iota{2, 2};
    Mat delta{2, 2};

    void validate() const {
        require((omega.array() > 0).all() && (delta.array() > 0).all(),
                "GroupVsParams: omega and delta must be > 0");
    }
};

enum class MulticlassVariant {
    SharedDelta,   // exponent -Delta_{y_i} (w_{y_i} - w_{y'})' x_i
    PerLogitDelta  // exponent -(Delta_{y_i} w_{y_i} - Delta_{y'} w_{y'})' x_i
};

// Binary VS-loss: sum_i omega_{y_i} log(1 + e^{iota_{y_i}} e^{-delta_{y_i}
// y_i f(x_i)}) with f(x) = w'x + b.
inline double vs_loss_binary(const VsParams& params, const LinearModel& model,
                             const Dataset& ds) {
    params.validate();
    require(params.num_classes() == 2, "vs_loss_binary: need 2 classes");
    require(model.w.size() == ds.d(), "vs_loss_binary: dimension mismatch");
    double total = 0.0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const int k = params.index_of_label(ds.y(i));
        const double f = model.w.dot(ds.X.row(i)) + model.b;
        total += params.omega(k) *
                 log1pexp(params.iota(k) - params.delta(k) * ds.y(i) * f);
    }
    return total;
}

// Analytic gradient of vs_loss_binary over (w, b):
// -omega_y delta_y sigma(iota_y - delta_y y f(x)) y (x, 1) per example.
inline void vs_grad_binary(const VsParams& params, const LinearModel& model,
                           const Dataset& ds, Vec& grad_w, double& grad_b) {
    params.validate();
    require(params.num_classes() == 2, "vs_grad_binary: need 2 classes");
    require(model.w.size() == ds.d(), "vs_grad_binary: dimension mismatch");
    grad_w = Vec::Zero(ds.d());
    grad_b = 0.0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const int k = params.index_of_label(ds.y(i));
        const double f = model.w.dot(ds.X.row(i)) + model.b;
        const double s =
            sigmoid(params.iota(k) - params.delta(k) * ds.y(i) * f);
        const double coef = -params.omega(k) * params.delta(k) * s * ds.y(i);
        grad_w += coef * ds.X.row(i).transpose();
        grad_b += coef;
    }
}

// Multiclass VS-loss over C weight vectors (rows of W). Per example, logits
// are u_c = iota_c + coef_c w_c'x with coef_c = Delta_{y_i} (SharedDelta) or
// Delta_c (PerLogitDelta); the loss is omega_{y_i} (logsumexp(u) - u_{y_i}).
inline double vs_loss_multi(const VsParams& params, const Mat& W,
                            const Dataset& ds, MulticlassVariant variant,
                            Mat* grad = nullptr) {
    params.validate();
    const int C = params.num_classes();
    require(W.rows() == C, "vs_loss_multi: W must have one row per class");
    require(W.cols() == ds.d(), "vs_loss_multi: dimension mismatch");
    if (grad) *grad = Mat::Zero(C, ds.d());
    double total = 0.0;
    Vec u(C), prob(C);
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const int yi = ds.y(i) - 1;
        require(yi >= 0 && yi < C, "vs_loss_multi: label out of range");
        const Vec scores = W * ds.X.row(i).transpose();
        for (int c = 0; c < C; ++c) {
            const double coef = variant == MulticlassVariant::SharedDelta
                                    ? params.delta(yi)
                                    : params.delta(c);
            u(c) = params.iota(c) + coef * scores(c);
        }
        const double umax = u.maxCoeff();
        double z = 0.0;
        for (int c = 0; c < C; ++c) z += std::exp(u(c) - umax);
        const double lse = umax + std::log(z);
        total += params.omega(yi) * (lse - u(yi));
        if (grad) {
            for (int c = 0; c < C; ++c) prob(c) = std::exp(u(c) - lse);
            for (int c = 0; c < C; ++c) {
                const double coef = variant == MulticlassVariant::SharedDelta
                                        ? params.delta(yi)
                                        : params.delta(c);
                const double w_coef =
                    params.omega(yi) * coef * (prob(c) - (c == yi ? 1.0 : 0.0));
                grad->row(c) += w_coef * ds.X.row(i);
            }
        }
    }
    return total;
}

enum class PresetKind { CE, wCE, LA, LDAM, CDT, VS };

// Named parameter presets from the long-tail training literature, built
// from per-class counts N_y.
inline VsParams preset(PresetKind kind, const std::vector<double>& class_counts,
                       double tau = 0.0, double gamma_exp = 0.0) {
    const int C = int(class_counts.size());
    require(C >= 2, "preset: need at least 2 classes");
    require(tau >= 0.0 && gamma_exp >= 0.0, "preset: tau, gammaExp must be >= 0");
    double n_tot = 0.0, n_max = 0.0;
    double n_min = std::numeric_limits<double>::infinity();
    for (double c : class_counts) {
        require(c > 0.0, "preset: counts must be positive");
        n_tot += c;
        n_max = std::max(n_max, c);
        n_min = std::min(n_min, c);
    }
    VsParams p;
    p.omega = Vec::Ones(C);
    p.iota = Vec::Zero(C);
    p.delta = Vec::Ones(C);
    switch (kind) {
        case PresetKind::CE:
            break;
        case PresetKind::wCE:
            for (int c = 0; c < C; ++c) p.omega(c) = n_tot / class_counts[c];
            break;
        case PresetKind::LA:
            for (int c = 0; c < C; ++c)
                p.iota(c) = tau * std::log(class_counts[c] / n_tot);
            break;
        case PresetKind::LDAM:
            for (int c = 0; c < C; ++c)
                p.iota(c) = -0.5 * std::pow(n_min / class_counts[c], 0.25);
            break;
        case PresetKind::CDT:
            for (int c = 0; c < C; ++c)
                p.delta(c) = std::pow(class_counts[c] / n_max, gamma_exp);
            break;
        case PresetKind::VS:
            for (int c = 0; c < C; ++c) {
                p.iota(c) = tau * std::log(class_counts[c] / n_tot);
                p.delta(c) = std::pow(class_counts[c] / n_max, gamma_exp);
            }
            break;
    }
    return p;
}

// Group-sensitive VS-loss: the binary form with the (omega, iota, delta)
// triple selected by the example's (y_i, g_i) cell.
inline double group_vs_loss(const GroupVsParams& params,
                            const LinearModel& model, const Dataset& ds,
                            Vec* grad_w = nullptr, double* grad_b = nullptr) {
    params.validate();
    require(ds.has_groups(), "group_vs_loss: dataset carries no group labels");
    require(model.w.size() == ds.d(), "group_vs_loss: dimension mismatch");
    if (grad_w) {
        *grad_w = Vec::Zero(ds.d());
        *grad_b = 0.0;
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const int yi = ds.y(i) == 1 ? 0 : 1;
        const int gi = ds.g(i) - 1;
        const double om = params.omega(yi, gi);
        const double io = params.iota(yi, gi);
        const double de = params.delta(yi, gi);
        const double f = model.w.dot(ds.X.row(i)) + model.b;
        total += om * log1pexp(io - de * ds.y(i) * f);
        if (grad_w) {
            const double s = sigmoid(io - de * ds.y(i) * f);
            const double coef = -om * de * s * ds.y(i);
            *grad_w += coef * ds.X.row(i).transpose();
            *grad_b += coef;
        }
    }
    return total;
}

}  // namespace vsmargin
