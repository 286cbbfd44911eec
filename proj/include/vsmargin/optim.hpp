#pragma once

// First-order trainers (constant-rate and normalized gradient descent), the
// group-DRO outer loop, and implicit-bias diagnostics that track convergence
// of loss minimizers toward max-margin solutions.

#include "vsmargin/common.hpp"
#include "vsmargin/losses.hpp"
#include "vsmargin/model_data.hpp"

#include <functional>
#include <vector>

namespace vsmargin {

struct GdConfig {
    enum class Schedule { Constant, Normalized };
    Schedule schedule = Schedule::Constant;
    double eta = 0.1;          // constant-schedule step size
    long max_iters = 1000;
    double grad_tol = 0.0;     // stop when the gradient norm falls below
    long record_every = 1;     // trajectory sampling stride
    bool train_intercept = true;

    void validate() const {
        require(eta > 0.0, "GdConfig: eta must be > 0");
        require(max_iters >= 1, "GdConfig: max_iters must be >= 1");
        require(grad_tol >= 0.0, "GdConfig: grad_tol must be >= 0");
        require(record_every >= 1, "GdConfig: record_every must be >= 1");
    }
};

struct TrajectoryPoint {
    long iter;
    Vec w;
    double b;
    double loss;
    double grad_norm;
    double w_norm;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    bool aborted = false;      // non-finite loss/gradient or norm blow-up
    std::string abort_reason;
};

// Loss oracle: fills (grad_w, grad_b) and returns the loss value.
using LossGradFn =
    std::function<double(const Vec& w, double b, Vec& grad_w, double& grad_b)>;

inline constexpr double kDivergenceNormGuard = 1e8;

// Gradient descent with either a constant step or the normalized schedule
// eta_t = 1 / (sqrt(t+1) * ||grad L(w_t)||).
inline std::pair<LinearModel, Trajectory> gd_train(const LossGradFn& fn,
                                                   const LinearModel& init,
                                                   const GdConfig& config) {
    config.validate();
    LinearModel model = init;
    Trajectory traj;
    Vec gw(model.w.size());
    double gb = 0.0;
    for (long t = 0; t < config.max_iters; ++t) {
        const double loss = fn(model.w, model.b, gw, gb);
        if (!config.train_intercept) gb = 0.0;
        const double gnorm = std::sqrt(gw.squaredNorm() + gb * gb);
        if (!std::isfinite(loss) || !std::isfinite(gnorm)) {
            traj.aborted = true;
            traj.abort_reason = "non-finite loss or gradient";
            break;
        }
        if (t % config.record_every == 0) {
            traj.points.push_back({t, model.w, model.b, loss, gnorm,
                                   model.w.norm()});
        }
        if (gnorm <= config.grad_tol) break;
        double step = config.eta;
        if (config.schedule == GdConfig::Schedule::Normalized) {
            step = 1.0 / (std::sqrt(double(t + 1)) * gnorm);
        }
        model.w -= step * gw;
        model.b -= step * gb;
        if (model.w.norm() > kDivergenceNormGuard) {
            traj.aborted = true;
            traj.abort_reason = "weight norm exceeded divergence guard";
            break;
        }
    }
    return {model, traj};
}

// 1 - cos(angle between weight vectors); 0 iff the directions coincide.
inline double angle_gap(const LinearModel& model,
                        const LinearModel& reference) {
    require(model.w.norm() > 0.0 && reference.w.norm() > 0.0,
            "angle_gap: zero weight vector");
    return 1.0 - model.w.dot(reference.w) /
                     (model.w.norm() * reference.w.norm());
}

// Euclidean distance of the unit-normalized weight vectors.
inline double norm_gap(const LinearModel& model, const LinearModel& reference) {
    require(model.w.norm() > 0.0 && reference.w.norm() > 0.0,
            "norm_gap: zero weight vector");
    return (model.w / model.w.norm() - reference.w / reference.w.norm())
        .norm();
}

// Residual sequence ||w_t - w_hat log(t)|| along a trajectory recorded from
// a small-step run (a proxy for the gradient flow), with flow time
// t = iter * eta. Entries with t <= 1 are skipped.
inline std::vector<double> gradient_flow_residual(const Trajectory& traj,
                                                  const LinearModel& reference,
                                                  double eta) {
    require(traj.points.size() >= 100,
            "gradient_flow_residual: trajectory too short (< 100 records)");
    std::vector<double> residuals;
    residuals.reserve(traj.points.size());
    for (const auto& pt : traj.points) {
        const double t = double(pt.iter) * eta;
        if (t <= 1.0) continue;
        residuals.push_back((pt.w - std::log(t) * reference.w).norm());
    }
    return residuals;
}

// Slope of a least-squares line fit of residual against log-time over the
// last half of the sequence; used as the empirical boundedness check.
inline double residual_trend_slope(const std::vector<double>& residuals) {
    const std::size_t half = residuals.size() / 2;
    const std::size_t m = residuals.size() - half;
    require(m >= 2, "residual_trend_slope: too few residuals");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double x = std::log(double(half + k + 1));
        const double y = residuals[half + k];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    return denom > 0 ? (m * sxy - sx * sy) / denom : 0.0;
}

// Online min-max trainer: a probability vector over the four (y,g) cells is
// updated multiplicatively by the observed per-cell losses while the model
// descends the reweighted Group-VS loss.
inline LinearModel group_dro_train(const GroupVsParams& params,
                                   const Dataset& ds, long steps,
                                   double model_lr, double mw_rate = 0.01,
                                   Vec* cell_weights_out = nullptr) {
    params.validate();
    require(ds.has_groups(), "group_dro_train: dataset carries no groups");
    require(steps >= 1 && model_lr > 0.0 && mw_rate > 0.0,
            "group_dro_train: bad step configuration");

    // Partition examples into the four (y, g) cells that are present.
    std::vector<std::vector<int>> cells(4);
    auto cell_of = [](int y, int g) { return (y == 1 ? 0 : 2) + (g - 1); };
    for (Eigen::Index i = 0; i < ds.n(); ++i)
        cells[std::size_t(cell_of(ds.y(i), ds.g(i)))].push_back(int(i));
    std::vector<int> live;
    for (int c = 0; c < 4; ++c)
        if (!cells[std::size_t(c)].empty()) live.push_back(c);
    require(!live.empty(), "group_dro_train: no populated subgroup");

    LinearModel model;
    model.w = Vec::Zero(ds.d());
    model.b = 0.0;
    Vec q = Vec::Constant(Eigen::Index(live.size()),
                          1.0 / double(live.size()));

    for (long t = 0; t < steps; ++t) {
        Vec cell_loss(live.size());
        std::vector<Vec> cell_gw(live.size());
        Vec cell_gb(live.size());
        for (std::size_t c = 0; c < live.size(); ++c) {
            const auto& idx = cells[std::size_t(live[c])];
            double total = 0.0;
            Vec gw = Vec::Zero(ds.d());
            double gb = 0.0;
            for (int i : idx) {
                const int yi = ds.y(i) == 1 ? 0 : 1;
                const int gi = ds.g(i) - 1;
                const double om = params.omega(yi, gi);
                const double io = params.iota(yi, gi);
                const double de = params.delta(yi, gi);
                const double f = model.w.dot(ds.X.row(i)) + model.b;
                total += om * log1pexp(io - de * ds.y(i) * f);
                const double s = sigmoid(io - de * ds.y(i) * f);
                const double coef = -om * de * s * ds.y(i);
                gw += coef * ds.X.row(i).transpose();
                gb += coef;
            }
            const double inv = 1.0 / double(idx.size());
            cell_loss(Eigen::Index(c)) = total * inv;
            cell_gw[c] = gw * inv;
            cell_gb(Eigen::Index(c)) = gb * inv;
        }
        // Multiplicative-weights ascent on the cell distribution.
        for (Eigen::Index c = 0; c < q.size(); ++c)
            q(c) *= std::exp(mw_rate * cell_loss(c));
        q /= q.sum();
        // Model descent on the reweighted loss.
        Vec gw = Vec::Zero(ds.d());
        double gb = 0.0;
        for (std::size_t c = 0; c < live.size(); ++c) {
            gw += q(Eigen::Index(c)) * cell_gw[c];
            gb += q(Eigen::Index(c)) * cell_gb(Eigen::Index(c));
        }
        model.w -= model_lr * gw;
        model.b -= model_lr * gb;
        if (model.w.norm() > kDivergenceNormGuard) break;
    }
    if (cell_weights_out) *cell_weights_out = q;
    return model;
}

}  // namespace vsmargin
