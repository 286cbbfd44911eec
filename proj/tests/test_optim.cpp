#include "vsmargin/optim.hpp"

#include "vsmargin/maxmargin.hpp"
#include "vsmargin/risk_eval.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace vsmargin;
using namespace vsmargin::testing;

namespace {

// Loss oracle for the binary VS-loss on a fixed dataset.
LossGradFn vs_oracle(const VsParams& params, const Dataset& ds) {
    return [&params, &ds](const Vec& w, double b, Vec& gw, double& gb) {
        LinearModel m;
        m.w = w;
        m.b = b;
        vs_grad_binary(params, m, ds, gw, gb);
        return vs_loss_binary(params, m, ds);
    };
}

VsParams plain_params() {
    VsParams p;
    p.omega = Vec::Ones(2);
    p.iota = Vec::Zero(2);
    p.delta = Vec::Ones(2);
    return p;
}

// Cosine-style gap on the stacked (w, b) direction.
double ext_gap(const LinearModel& a, const LinearModel& b) {
    Vec ua(a.w.size() + 1), ub(b.w.size() + 1);
    ua << a.w, a.b;
    ub << b.w, b.b;
    return 1.0 - ua.dot(ub) / (ua.norm() * ub.norm());
}

}  // namespace

TEST_CASE("gd_train: exact behaviour on a strongly convex quadratic") {
    const int d = 5;
    std::mt19937_64 rng(3);
    const Vec w_star = random_vec(d, rng);
    const double b_star = 0.7;
    LossGradFn quad = [&](const Vec& w, double b, Vec& gw, double& gb) {
        gw = w - w_star;
        gb = b - b_star;
        return 0.5 * (gw.squaredNorm() + gb * gb);
    };
    LinearModel init;
    init.w = Vec::Zero(d);

    SUBCASE("constant step converges linearly to the minimizer") {
        GdConfig cfg;
        cfg.eta = 0.5;
        cfg.max_iters = 200;
        const auto [model, traj] = gd_train(quad, init, cfg);
        CHECK_FALSE(traj.aborted);
        CHECK((model.w - w_star).norm() <= 1e-12);
        CHECK(std::abs(model.b - b_star) <= 1e-12);
        // Loss halves at least geometrically along the trajectory.
        for (std::size_t k = 1; k < traj.points.size(); ++k)
            CHECK(traj.points[k].loss <= traj.points[k - 1].loss + 1e-15);
    }
    SUBCASE("grad_tol triggers early stopping") {
        GdConfig cfg;
        cfg.eta = 0.5;
        cfg.max_iters = 100000;
        cfg.grad_tol = 1e-3;
        const auto [model, traj] = gd_train(quad, init, cfg);
        CHECK(traj.points.back().iter < 100);
        CHECK(traj.points.back().grad_norm <= 1e-3 * 2.0);
    }
    SUBCASE("record_every subsamples the trajectory") {
        GdConfig cfg;
        cfg.eta = 0.1;
        cfg.max_iters = 100;
        cfg.record_every = 10;
        const auto [model, traj] = gd_train(quad, init, cfg);
        CHECK(traj.points.size() == 10);
        CHECK(traj.points[3].iter == 30);
    }
    SUBCASE("train_intercept = false freezes b") {
        GdConfig cfg;
        cfg.eta = 0.5;
        cfg.max_iters = 100;
        cfg.train_intercept = false;
        init.b = -2.0;
        const auto [model, traj] = gd_train(quad, init, cfg);
        CHECK(model.b == -2.0);
        CHECK((model.w - w_star).norm() <= 1e-12);
    }
    SUBCASE("oversized constant step trips the divergence guard") {
        GdConfig cfg;
        cfg.eta = 2.5;  // spectral radius of the GD map is 1.5 > 1
        cfg.max_iters = 100000;
        const auto [model, traj] = gd_train(quad, init, cfg);
        CHECK(traj.aborted);
        CHECK(traj.abort_reason == "weight norm exceeded divergence guard");
    }
    SUBCASE("non-finite loss aborts with a diagnostic") {
        LossGradFn bad = [](const Vec& w, double, Vec& gw, double& gb) {
            gw = w;
            gb = 0.0;
            return std::numeric_limits<double>::quiet_NaN();
        };
        const auto [model, traj] = gd_train(bad, init, GdConfig{});
        CHECK(traj.aborted);
        CHECK(traj.abort_reason == "non-finite loss or gradient");
    }
    SUBCASE("invalid configurations are rejected") {
        GdConfig cfg;
        cfg.eta = 0.0;
        CHECK_THROWS_AS(gd_train(quad, init, cfg), std::invalid_argument);
        cfg.eta = 0.1;
        cfg.max_iters = 0;
        CHECK_THROWS_AS(gd_train(quad, init, cfg), std::invalid_argument);
    }
}

TEST_CASE("gd_train on separable data: loss -> 0 and the norm diverges") {
    std::mt19937_64 rng(11);
    const auto ds = random_separable(12, 30, rng);
    REQUIRE(is_separable(ds, true));
    const auto params = plain_params();
    LinearModel init;
    init.w = Vec::Zero(30);

    GdConfig cfg;
    cfg.schedule = GdConfig::Schedule::Normalized;
    cfg.max_iters = 5000;
    cfg.record_every = 500;
    const auto [model, traj] = gd_train(vs_oracle(params, ds), init, cfg);
    CHECK_FALSE(traj.aborted);
    LinearModel fin = model;
    CHECK(vs_loss_binary(params, fin, ds) < 1e-3);
    // Weight norm keeps growing (no finite minimizer exists).
    CHECK(traj.points.back().w_norm > 5.0);
    for (std::size_t k = 1; k < traj.points.size(); ++k)
        CHECK(traj.points[k].w_norm > traj.points[k - 1].w_norm);
    // Every training point ends up on the correct side.
    for (Eigen::Index i = 0; i < ds.n(); ++i)
        CHECK(ds.y(i) * (fin.w.dot(ds.X.row(i)) + fin.b) > 0.0);
}

TEST_CASE("implicit bias: loss minimizers align with max-margin solutions") {
    std::mt19937_64 rng(17);
    const auto ds = random_separable(15, 30, rng);
    REQUIRE(is_separable(ds, true));
    LinearModel init;
    init.w = Vec::Zero(30);
    GdConfig cfg;
    cfg.schedule = GdConfig::Schedule::Normalized;
    cfg.max_iters = 100000;
    cfg.record_every = 100000;

    SUBCASE("multiplicative adjustments steer toward the cost-sensitive SVM") {
        VsParams p = plain_params();
        // Delta_- = 2 makes the exponent bind at y f = 1/2 for the negative
        // class, i.e. the positive class gets twice the relative margin.
        p.delta(1) = 2.0;
        const auto [model, traj] = gd_train(vs_oracle(p, ds), init, cfg);
        REQUIRE_FALSE(traj.aborted);
        const auto target = cs_svm(ds, 2.0, true);
        const auto plain = svm(ds, true);
        // Directional convergence is O(1/log t); the run stops when the
        // sigmoid factors underflow, leaving a gap of a few percent.
        CHECK(ext_gap(model, target.model) <= 0.05);
        // ... and is genuinely distinct from the plain SVM direction.
        CHECK(ext_gap(target.model, plain.model) > 0.1);
        CHECK(ext_gap(model, target.model) <
              0.5 * ext_gap(target.model, plain.model));
        CHECK(ext_gap(model, plain.model) > ext_gap(model, target.model));
    }
    SUBCASE("additive adjustments wash out: LA converges to the plain SVM") {
        VsParams p = plain_params();
        p.iota(0) = 1.5;
        p.iota(1) = -0.5;
        const auto [model, traj] = gd_train(vs_oracle(p, ds), init, cfg);
        REQUIRE_FALSE(traj.aborted);
        const auto plain = svm(ds, true);
        CHECK(ext_gap(model, plain.model) <= 0.01);
    }
    SUBCASE("class weights alone also wash out") {
        VsParams p = plain_params();
        p.omega(0) = 9.0;
        const auto [model, traj] = gd_train(vs_oracle(p, ds), init, cfg);
        REQUIRE_FALSE(traj.aborted);
        const auto plain = svm(ds, true);
        CHECK(ext_gap(model, plain.model) <= 0.01);
    }
}

TEST_CASE("angle_gap / norm_gap: identities and edge cases") {
    std::mt19937_64 rng(23);
    LinearModel a, b;
    a.w = random_vec(7, rng);
    SUBCASE("identical and scaled directions give zero gap") {
        b.w = 3.0 * a.w;
        CHECK(angle_gap(a, b) <= 1e-14);
        CHECK(norm_gap(a, b) <= 1e-7);
    }
    SUBCASE("orthogonal directions give gap 1 and distance sqrt(2)") {
        b.w = Vec::Zero(7);
        // Build an explicit orthogonal vector.
        b.w(0) = -a.w(1);
        b.w(1) = a.w(0);
        CHECK(angle_gap(a, b) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(norm_gap(a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
    SUBCASE("relation norm_gap^2 = 2 * angle_gap") {
        b.w = random_vec(7, rng);
        CHECK(norm_gap(a, b) * norm_gap(a, b) ==
              doctest::Approx(2.0 * angle_gap(a, b)).epsilon(1e-10));
    }
    SUBCASE("zero vectors are rejected") {
        b.w = Vec::Zero(7);
        CHECK_THROWS_AS(angle_gap(a, b), std::invalid_argument);
        CHECK_THROWS_AS(norm_gap(a, b), std::invalid_argument);
    }
}

TEST_CASE("residual_trend_slope recovers the slope of synthetic sequences") {
    std::vector<double> flat(200, 3.0);
    CHECK(std::abs(residual_trend_slope(flat)) <= 1e-12);
    std::vector<double> linlog(200);
    for (int k = 0; k < 200; ++k) linlog[std::size_t(k)] = 2.0 * std::log(k + 1.0);
    CHECK(residual_trend_slope(linlog) == doctest::Approx(2.0).epsilon(1e-6));
    std::vector<double> tiny(2, 0.0);
    CHECK_THROWS_AS(residual_trend_slope(tiny), std::invalid_argument);
}

TEST_CASE("gradient flow: w_t stays within a bounded band of log(t) w_hat") {
    std::mt19937_64 rng(31);
    const auto ds = random_separable(12, 25, rng);
    REQUIRE(is_separable(ds, false));
    const auto params = plain_params();
    LinearModel init;
    init.w = Vec::Zero(25);
    GdConfig cfg;
    cfg.eta = 0.05;  // small constant step as a gradient-flow proxy
    cfg.max_iters = 200000;
    cfg.record_every = 1000;
    cfg.train_intercept = false;
    const auto [model, traj] = gd_train(vs_oracle(params, ds), init, cfg);
    REQUIRE_FALSE(traj.aborted);
    const auto ref = svm(ds, false);  // unit-margin max-margin direction

    const auto residuals = gradient_flow_residual(traj, ref.model, cfg.eta);
    REQUIRE(residuals.size() >= 100);
    // The norm itself grows like log(t) ||w_hat||; the residual must grow
    // much slower than that over the tail.
    const double slope = residual_trend_slope(residuals);
    CHECK(std::abs(slope) <= 0.2 * ref.model.w.norm());
    // Short trajectories are rejected.
    Trajectory stub;
    stub.points.assign(10, traj.points.front());
    CHECK_THROWS_AS(gradient_flow_residual(stub, ref.model, cfg.eta),
                    std::invalid_argument);
}

TEST_CASE("group_dro_train: sanity, reweighting, and validation") {
    const int d = 20;
    Mat means = Mat::Zero(d, 2);
    means(0, 0) = 2.0;
    means(1, 1) = 2.0;
    GroupGmmSpec spec;
    spec.meanModel = gramian_decompose(means);
    spec.pi = 0.5;
    spec.p = 0.5;
    spec.sigma1 = 0.5;
    spec.sigma2 = 2.0;  // group 2 is noisier, hence harder
    const auto ds = sample_group_gmm_fixed(spec, 80, 77);

    GroupVsParams params;
    params.omega.setOnes();
    params.iota.setZero();
    params.delta.setOnes();

    SUBCASE("trains a classifier that beats chance on every cell") {
        Vec q;
        const auto model = group_dro_train(params, ds, 2000, 0.1, 0.01, &q);
        REQUIRE(model.w.norm() > 0.0);
        const auto r = closed_form_risks(model, spec);
        CHECK(r.worst_group < 0.45);
        CHECK(q.size() == 4);
        CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((q.array() > 0.0).all());
        // The multiplicative weights concentrate on the noisier group's
        // cells (columns g = 2 are indices 1 and 3).
        CHECK(q(1) + q(3) > q(0) + q(2));
    }
    SUBCASE("vanishing mw_rate reduces to uniformly weighted descent") {
        Vec q;
        group_dro_train(params, ds, 50, 0.05, 1e-12, &q);
        for (Eigen::Index c = 0; c < q.size(); ++c)
            CHECK(q(c) == doctest::Approx(0.25).epsilon(1e-8));
    }
    SUBCASE("input validation") {
        Dataset no_groups = ds;
        no_groups.g.resize(0);
        CHECK_THROWS_AS(group_dro_train(params, no_groups, 10, 0.1),
                        std::invalid_argument);
        CHECK_THROWS_AS(group_dro_train(params, ds, 0, 0.1),
                        std::invalid_argument);
        CHECK_THROWS_AS(group_dro_train(params, ds, 10, -1.0),
                        std::invalid_argument);
    }
}
