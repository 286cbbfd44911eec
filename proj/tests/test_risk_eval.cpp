#include "vsmargin/risk_eval.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace vsmargin;
using namespace vsmargin::testing;

namespace {

LabelGmmSpec antipodal_spec(double s, double pi, int d = 12) {
    Mat means = Mat::Zero(d, 2);
    means(0, 0) = s;
    means(0, 1) = -s;
    LabelGmmSpec spec;
    spec.meanModel = gramian_decompose(means);
    spec.pi = pi;
    return spec;
}

LinearModel axis_model(int d, double b = 0.0) {
    LinearModel m;
    m.w = Vec::Zero(d);
    m.w(0) = 1.0;
    m.b = b;
    return m;
}

}  // namespace

TEST_CASE("closed_form_risks (label): analytic values") {
    SUBCASE("symmetric antipodal means, zero intercept") {
        const auto spec = antipodal_spec(2.0, 0.3);
        const auto m = axis_model(12);
        const auto r = closed_form_risks(m, spec);
        CHECK(r.R_plus == doctest::Approx(q_function(2.0)).epsilon(1e-14));
        CHECK(r.R_minus == doctest::Approx(q_function(2.0)).epsilon(1e-14));
        CHECK(r.R_bal == doctest::Approx(q_function(2.0)).epsilon(1e-14));
        CHECK(r.R == doctest::Approx(q_function(2.0)).epsilon(1e-14));
        CHECK_FALSE(r.has_groups);
        CHECK(std::isnan(r.DEO));
        CHECK(std::isnan(r.se_R_plus));  // closed form carries no noise
    }
    SUBCASE("intercept trades the conditional risks against each other") {
        const auto spec = antipodal_spec(2.0, 0.1);
        const auto m = axis_model(12, 0.5);
        const auto r = closed_form_risks(m, spec);
        CHECK(r.R_plus == doctest::Approx(q_function(2.5)).epsilon(1e-14));
        CHECK(r.R_minus == doctest::Approx(q_function(1.5)).epsilon(1e-14));
        CHECK(r.R ==
              doctest::Approx(0.1 * q_function(2.5) + 0.9 * q_function(1.5))
                  .epsilon(1e-14));
        CHECK(r.R_bal ==
              doctest::Approx(0.5 * (q_function(2.5) + q_function(1.5)))
                  .epsilon(1e-14));
    }
    SUBCASE("isotropic covariance rescales the effective margin") {
        auto spec = antipodal_spec(2.0, 0.5);
        spec.covariance = (4.0 * Mat::Identity(12, 12)).eval();
        const auto r = closed_form_risks(axis_model(12), spec);
        CHECK(r.R_plus == doctest::Approx(q_function(1.0)).epsilon(1e-14));
        CHECK(r.R_minus == doctest::Approx(q_function(1.0)).epsilon(1e-14));
    }
    SUBCASE("orthogonal classifier yields coin-flip risks") {
        const auto spec = antipodal_spec(3.0, 0.5);
        LinearModel m;
        m.w = Vec::Zero(12);
        m.w(1) = 1.0;
        const auto r = closed_form_risks(m, spec);
        CHECK(r.R_plus == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(r.R_minus == doctest::Approx(0.5).epsilon(1e-14));
    }
    SUBCASE("zero weight vector is rejected") {
        LinearModel m;
        m.w = Vec::Zero(12);
        CHECK_THROWS_AS(closed_form_risks(m, antipodal_spec(1.0, 0.5)),
                        std::invalid_argument);
    }
}

TEST_CASE("closed_form_risks: positive scale invariance of (w, b)") {
    std::mt19937_64 rng(7);
    const int d = 9;
    for (int trial = 0; trial < 20; ++trial) {
        Mat means = random_mat(d, 2, rng);
        LabelGmmSpec spec;
        spec.meanModel = gramian_decompose(means);
        spec.pi = 0.2;
        LinearModel m;
        m.w = random_vec(d, rng);
        m.b = random_vec(1, rng)(0);
        const auto r1 = closed_form_risks(m, spec);
        LinearModel scaled;
        const double c = 0.3 + trial;
        scaled.w = c * m.w;
        scaled.b = c * m.b;
        const auto r2 = closed_form_risks(scaled, spec);
        CHECK(r1.R_plus == doctest::Approx(r2.R_plus).epsilon(1e-12));
        CHECK(r1.R_minus == doctest::Approx(r2.R_minus).epsilon(1e-12));
    }
}

TEST_CASE("closed_form_risks: general covariance matches whitened geometry") {
    // R+ = Q((mu_+'w + b)/sqrt(w'Sigma w)) -- verify against an explicitly
    // whitened computation on a random SPD covariance.
    std::mt19937_64 rng(19);
    const int d = 6;
    Mat A = random_mat(d, d, rng);
    Mat sigma = A * A.transpose() + Mat::Identity(d, d);
    Mat means = random_mat(d, 2, rng);
    LabelGmmSpec spec;
    spec.meanModel = gramian_decompose(means);
    spec.pi = 0.4;
    spec.covariance = sigma;
    LinearModel m;
    m.w = random_vec(d, rng);
    m.b = 0.3;
    const auto r = closed_form_risks(m, spec);
    const double denom = std::sqrt(m.w.dot(sigma * m.w));
    CHECK(r.R_plus ==
          doctest::Approx(q_function((means.col(0).dot(m.w) + m.b) / denom))
              .epsilon(1e-13));
    CHECK(r.R_minus ==
          doctest::Approx(q_function((-means.col(1).dot(m.w) - m.b) / denom))
              .epsilon(1e-13));
}

TEST_CASE("closed_form_risks (group): analytic values and derived metrics") {
    const int d = 10;
    Mat means = Mat::Zero(d, 2);
    means(0, 0) = 2.0;  // mu_1 = 2 e_1
    means(1, 1) = 1.0;  // mu_2 = e_2
    GroupGmmSpec spec;
    spec.meanModel = gramian_decompose(means);
    spec.pi = 0.5;
    spec.p = 0.3;
    spec.sigma1 = 1.0;
    spec.sigma2 = 2.0;

    SUBCASE("axis classifier separates group 1 only") {
        const auto r = closed_form_risks(axis_model(d), spec);
        CHECK(r.has_groups);
        CHECK(r.R_plus_g1 == doctest::Approx(q_function(2.0)).epsilon(1e-14));
        CHECK(r.R_plus_g2 == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(r.R_minus_g1 == doctest::Approx(q_function(2.0)).epsilon(1e-14));
        CHECK(r.R_minus_g2 == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(r.DEO ==
              doctest::Approx(q_function(2.0) - 0.5).epsilon(1e-13));
        CHECK(r.SymmDEO == doctest::Approx(std::abs(r.DEO)).epsilon(1e-13));
        CHECK(r.worst_group == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(r.R_plus ==
              doctest::Approx(0.3 * q_function(2.0) + 0.7 * 0.5)
                  .epsilon(1e-13));
        CHECK(r.R == doctest::Approx(r.R_bal).epsilon(1e-13));  // pi = 1/2
    }
    SUBCASE("intercept breaks the sign symmetry within each group") {
        const auto r = closed_form_risks(axis_model(d, 0.4), spec);
        CHECK(r.R_plus_g1 == doctest::Approx(q_function(2.4)).epsilon(1e-13));
        CHECK(r.R_minus_g1 == doctest::Approx(q_function(1.6)).epsilon(1e-13));
        // Group 2 mean is orthogonal to w: only the intercept matters, and
        // sigma2 = 2 halves its effect.
        CHECK(r.R_plus_g2 == doctest::Approx(q_function(0.2)).epsilon(1e-13));
        CHECK(r.R_minus_g2 == doctest::Approx(q_function(-0.2)).epsilon(1e-13));
    }
    SUBCASE("diagonal classifier has zero DEO by symmetry") {
        // w'mu_1/sigma1 = w'mu_2/sigma2 when w = (1, 1, 0, ...): 2/1 vs 1/2
        // fails; use w = (1, 4, 0, ...) so 2/1 = 4/2.
        LinearModel m;
        m.w = Vec::Zero(d);
        m.w(0) = 1.0;
        m.w(1) = 4.0;
        const auto r = closed_form_risks(m, spec);
        CHECK(std::abs(r.DEO) <= 1e-13);
        CHECK(r.SymmDEO <= 1e-13);
    }
}

TEST_CASE("mc_risks agrees with the closed form within 3 standard errors") {
    SUBCASE("label case, identity covariance") {
        const auto spec = antipodal_spec(1.5, 0.2);
        std::mt19937_64 rng(23);
        LinearModel m;
        m.w = random_vec(12, rng);
        m.w(0) += 2.0;  // keep the risks away from 0 and 1
        m.b = 0.2;
        const auto exact = closed_form_risks(m, spec);
        const auto mc = mc_risks(m, spec, 200000, 404);
        CHECK(std::abs(mc.R_plus - exact.R_plus) <= 3.0 * mc.se_R_plus);
        CHECK(std::abs(mc.R_minus - exact.R_minus) <= 3.0 * mc.se_R_minus);
        CHECK(mc.se_R_plus > 0.0);
        CHECK(mc.se_R_plus < 0.01);
        CHECK(mc.R_bal ==
              doctest::Approx(0.5 * (mc.R_plus + mc.R_minus)).epsilon(1e-14));
    }
    SUBCASE("label case, non-trivial covariance") {
        std::mt19937_64 rng(29);
        const int d = 8;
        Mat A = random_mat(d, d, rng);
        auto spec = antipodal_spec(1.5, 0.3, d);
        spec.covariance = (A * A.transpose() + Mat::Identity(d, d)).eval();
        LinearModel m;
        m.w = random_vec(d, rng);
        m.w(0) += 1.0;
        m.b = -0.1;
        const auto exact = closed_form_risks(m, spec);
        const auto mc = mc_risks(m, spec, 200000, 505);
        CHECK(std::abs(mc.R_plus - exact.R_plus) <= 3.0 * mc.se_R_plus);
        CHECK(std::abs(mc.R_minus - exact.R_minus) <= 3.0 * mc.se_R_minus);
    }
    SUBCASE("group case") {
        const int d = 10;
        Mat means = Mat::Zero(d, 2);
        means(0, 0) = 1.5;
        means(1, 1) = 1.0;
        GroupGmmSpec spec;
        spec.meanModel = gramian_decompose(means);
        spec.pi = 0.4;
        spec.p = 0.25;
        spec.sigma1 = 1.0;
        spec.sigma2 = 1.5;
        LinearModel m;
        m.w = Vec::Zero(d);
        m.w(0) = 1.0;
        m.w(1) = 0.7;
        m.b = 0.1;
        const auto exact = closed_form_risks(m, spec);
        const auto mc = mc_risks(m, spec, 200000, 606);
        CHECK(std::abs(mc.R_plus_g1 - exact.R_plus_g1) <=
              3.0 * mc.se_R_plus_g1);
        CHECK(std::abs(mc.R_plus_g2 - exact.R_plus_g2) <=
              3.0 * mc.se_R_plus_g2);
        CHECK(std::abs(mc.R_minus_g1 - exact.R_minus_g1) <=
              3.0 * mc.se_R_minus_g1);
        CHECK(std::abs(mc.R_minus_g2 - exact.R_minus_g2) <=
              3.0 * mc.se_R_minus_g2);
        CHECK(std::abs(mc.DEO - exact.DEO) <=
              3.0 * std::hypot(mc.se_R_plus_g1, mc.se_R_plus_g2));
        CHECK(mc.has_groups);
        // The stratified estimate mixes the cells with the spec weights.
        CHECK(mc.R_plus ==
              doctest::Approx(0.25 * mc.R_plus_g1 + 0.75 * mc.R_plus_g2)
                  .epsilon(1e-14));
    }
}

TEST_CASE("mc_risks: determinism and input validation") {
    const auto spec = antipodal_spec(1.0, 0.3);
    const auto m = axis_model(12, 0.1);
    SUBCASE("same seed reproduces the report bit-for-bit") {
        const auto a = mc_risks(m, spec, 5000, 42);
        const auto b = mc_risks(m, spec, 5000, 42);
        CHECK(a.R_plus == b.R_plus);
        CHECK(a.R_minus == b.R_minus);
        CHECK(a.se_R_plus == b.se_R_plus);
    }
    SUBCASE("different seeds move the estimate") {
        const auto a = mc_risks(m, spec, 5000, 42);
        const auto c = mc_risks(m, spec, 5000, 43);
        CHECK(a.R_plus != c.R_plus);
    }
    SUBCASE("tiny test sets are rejected") {
        CHECK_THROWS_AS(mc_risks(m, spec, 500, 42), std::invalid_argument);
    }
}
