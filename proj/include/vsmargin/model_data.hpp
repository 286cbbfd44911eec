#pragma once

// Gaussian-mixture generative models (label-imbalanced and group-sensitive),
// dataset sampling, and the mean-Gramian decomposition M'M = V S^2 V' that
// drives all of the asymptotic theory.

#include "vsmargin/common.hpp"

#include <optional>
#include <random>

namespace vsmargin {

// Two mean columns (mu_+, mu_- for the label case; mu_1, mu_2 for the group
// case) together with the eigendecomposition of their 2x2 Gramian.
struct MeanModel {
    Mat means;  // d x 2, column j is the j-th mean vector
    Mat V;      // 2 x r, orthonormal columns
    Vec S;      // r positive singular values (diagonal of S)
    int r = 0;  // numeric rank of the Gramian, in {1, 2}

    // e_row' V S as an r-vector: (S V' e_row). Rows are 0-indexed here.
    Vec vs_row(int row) const {
        return S.asDiagonal() * V.row(row).transpose();
    }
};

// Relative eigenvalue ratio below which the Gramian is treated as rank-1.
inline constexpr double kRankThreshold = 1e-12;

inline MeanModel gramian_decompose(const Mat& means) {
    require(means.cols() == 2, "gramian_decompose: expected 2 mean columns");
    Mat gram = means.transpose() * means;  // 2 x 2
    Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
    // Eigenvalues ascending; reorder descending.
    double lam_big = eig.eigenvalues()(1);
    double lam_small = eig.eigenvalues()(0);
    require(lam_big > 0.0, "gramian_decompose: both mean columns are zero");
    lam_small = std::max(lam_small, 0.0);

    MeanModel mm;
    mm.means = means;
    mm.r = (lam_small < kRankThreshold * lam_big) ? 1 : 2;
    mm.V.resize(2, mm.r);
    mm.S.resize(mm.r);
    mm.V.col(0) = eig.eigenvectors().col(1);
    mm.S(0) = std::sqrt(lam_big);
    if (mm.r == 2) {
        mm.V.col(1) = eig.eigenvectors().col(0);
        mm.S(1) = std::sqrt(lam_small);
    }
    return mm;
}

// Label-imbalanced model: y ~ Bern(pi) on {+1,-1}, x | y ~ N(mu_y, Sigma).
struct LabelGmmSpec {
    MeanModel meanModel;           // column 0 = mu_+, column 1 = mu_-
    double pi = 0.5;               // P{y = +1}
    std::optional<Mat> covariance; // identity when absent

    const Vec mu_plus() const { return meanModel.means.col(0); }
    const Vec mu_minus() const { return meanModel.means.col(1); }
};

// Group-sensitive model: y ~ Bern(pi) on {+1,-1}, g ~ Bern(p) on {1,2}
// independently, x | (y,g) ~ N(y mu_g, sigma_g^2 I).
struct GroupGmmSpec {
    MeanModel meanModel;  // column 0 = mu_1, column 1 = mu_2
    double pi = 0.5;      // P{y = +1}
    double p = 0.5;       // P{g = 1} (minority/sensitive group)
    double sigma1 = 1.0;
    double sigma2 = 1.0;

    const Vec mu_group(int g) const { return meanModel.means.col(g - 1); }
    double sigma_group(int g) const { return g == 1 ? sigma1 : sigma2; }
};

struct Dataset {
    Mat X;          // n x d
    IVec y;         // labels: +1/-1 (binary) or 1..C (multiclass)
    IVec g;         // groups in {1,2}; size 0 when absent
    std::uint64_t seed = 0;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index d() const { return X.cols(); }
    bool has_groups() const { return g.size() == X.rows(); }
};

namespace detail {

inline Mat cholesky_factor(const Mat& sigma) {
    Eigen::LLT<Mat> llt(sigma);
    require(llt.info() == Eigen::Success,
            "covariance must be symmetric positive-definite");
    return llt.matrixL();
}

}  // namespace detail

// Draw n examples from the label model. Deterministic for a fixed seed.
// If a class comes up empty the label vector is resampled (up to 100 times).
inline Dataset sample_label_gmm(const LabelGmmSpec& spec, int n,
                                std::uint64_t seed) {
    require(n >= 2, "sample_label_gmm: need n >= 2");
    require(spec.pi > 0.0 && spec.pi < 1.0, "pi must be in (0,1)");
    const auto d = spec.meanModel.means.rows();
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(spec.pi);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Dataset ds;
    ds.seed = seed;
    ds.y.resize(n);
    int attempts = 0;
    for (;;) {
        int n_plus = 0;
        for (int i = 0; i < n; ++i) {
            ds.y(i) = coin(rng) ? 1 : -1;
            n_plus += (ds.y(i) == 1);
        }
        if (n_plus > 0 && n_plus < n) break;
        require(++attempts < 100,
                "sample_label_gmm: could not draw both classes in 100 attempts");
    }

    Mat chol;
    if (spec.covariance) chol = detail::cholesky_factor(*spec.covariance);
    ds.X.resize(n, d);
    Vec z(d);
    for (int i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) z(j) = gauss(rng);
        const Vec& mu = ds.y(i) == 1 ? spec.meanModel.means.col(0)
                                     : spec.meanModel.means.col(1);
        if (spec.covariance) {
            ds.X.row(i) = (mu + chol * z).transpose();
        } else {
            ds.X.row(i) = (mu + z).transpose();
        }
    }
    return ds;
}

// Variant with a fixed number of positive examples: round(pi * n) by
// default, or an explicit n_plus (useful when pi * n is fractional and an
// ensemble should hit the exact mean class fraction). Conditioning on the
// class proportions removes the dominant finite-size fluctuation when
// comparing small-n ensembles to the proportional-limit theory.
inline Dataset sample_label_gmm_fixed(const LabelGmmSpec& spec, int n,
                                      std::uint64_t seed,
                                      int n_plus_override = -1) {
    require(n >= 2, "sample_label_gmm_fixed: need n >= 2");
    require(spec.pi > 0.0 && spec.pi < 1.0, "pi must be in (0,1)");
    const auto d = spec.meanModel.means.rows();
    const int n_plus = std::min(
        n - 1, std::max(1, n_plus_override >= 0
                               ? n_plus_override
                               : int(std::lround(spec.pi * n))));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Dataset ds;
    ds.seed = seed;
    ds.y.resize(n);
    for (int i = 0; i < n; ++i) ds.y(i) = i < n_plus ? 1 : -1;

    Mat chol;
    if (spec.covariance) chol = detail::cholesky_factor(*spec.covariance);
    ds.X.resize(n, d);
    Vec z(d);
    for (int i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) z(j) = gauss(rng);
        const Vec& mu = ds.y(i) == 1 ? spec.meanModel.means.col(0)
                                     : spec.meanModel.means.col(1);
        if (spec.covariance) {
            ds.X.row(i) = (mu + chol * z).transpose();
        } else {
            ds.X.row(i) = (mu + z).transpose();
        }
    }
    return ds;
}

// Draw n examples from the group model; group labels are Bernoulli(p).
inline Dataset sample_group_gmm(const GroupGmmSpec& spec, int n,
                                std::uint64_t seed) {
    require(n >= 2, "sample_group_gmm: need n >= 2");
    require(spec.pi > 0.0 && spec.pi < 1.0, "pi must be in (0,1)");
    require(spec.p > 0.0 && spec.p < 1.0, "p must be in (0,1)");
    require(spec.sigma1 > 0.0 && spec.sigma2 > 0.0, "sigmas must be > 0");
    const auto d = spec.meanModel.means.rows();
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution label_coin(spec.pi);
    std::bernoulli_distribution group_coin(spec.p);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Dataset ds;
    ds.seed = seed;
    ds.y.resize(n);
    ds.g.resize(n);
    int attempts = 0;
    for (;;) {
        int n_plus = 0;
        for (int i = 0; i < n; ++i) {
            ds.y(i) = label_coin(rng) ? 1 : -1;
            ds.g(i) = group_coin(rng) ? 1 : 2;
            n_plus += (ds.y(i) == 1);
        }
        if (n_plus > 0 && n_plus < n) break;
        require(++attempts < 100,
                "sample_group_gmm: could not draw both classes in 100 attempts");
    }

    ds.X.resize(n, d);
    Vec z(d);
    for (int i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) z(j) = gauss(rng);
        const Vec mu = spec.mu_group(ds.g(i));
        const double sg = spec.sigma_group(ds.g(i));
        ds.X.row(i) = (double(ds.y(i)) * mu + sg * z).transpose();
    }
    return ds;
}

// Group variant with per-cell counts fixed to round(n P(y) P(g)) (at least 1
// per cell); the remainder is absorbed by the largest cell.
inline Dataset sample_group_gmm_fixed(const GroupGmmSpec& spec, int n,
                                      std::uint64_t seed) {
    require(n >= 4, "sample_group_gmm_fixed: need n >= 4");
    require(spec.pi > 0.0 && spec.pi < 1.0, "pi must be in (0,1)");
    require(spec.p > 0.0 && spec.p < 1.0, "p must be in (0,1)");
    require(spec.sigma1 > 0.0 && spec.sigma2 > 0.0, "sigmas must be > 0");
    const auto d = spec.meanModel.means.rows();

    const double probs[4] = {spec.pi * spec.p, spec.pi * (1.0 - spec.p),
                             (1.0 - spec.pi) * spec.p,
                             (1.0 - spec.pi) * (1.0 - spec.p)};
    int counts[4];
    int total = 0, largest = 0;
    for (int c = 0; c < 4; ++c) {
        counts[c] = std::max(1, int(std::lround(probs[c] * n)));
        total += counts[c];
        if (probs[c] > probs[largest]) largest = c;
    }
    counts[largest] += n - total;
    require(counts[largest] >= 1,
            "sample_group_gmm_fixed: n too small for the cell probabilities");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Dataset ds;
    ds.seed = seed;
    ds.y.resize(n);
    ds.g.resize(n);
    int idx = 0;
    for (int c = 0; c < 4; ++c)
        for (int k = 0; k < counts[c]; ++k, ++idx) {
            ds.y(idx) = c < 2 ? 1 : -1;
            ds.g(idx) = (c % 2 == 0) ? 1 : 2;
        }

    ds.X.resize(n, d);
    Vec z(d);
    for (int i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) z(j) = gauss(rng);
        const Vec mu = spec.mu_group(ds.g(i));
        const double sg = spec.sigma_group(ds.g(i));
        ds.X.row(i) = (double(ds.y(i)) * mu + sg * z).transpose();
    }
    return ds;
}

// Transform a non-isotropic label spec to an equivalent identity-covariance
// spec with means Sigma^{-1/2} mu_y. Theory applied to the whitened spec
// predicts the risks of the original problem exactly.
inline LabelGmmSpec whiten(const LabelGmmSpec& spec) {
    if (!spec.covariance) return spec;
    Eigen::SelfAdjointEigenSolver<Mat> eig(*spec.covariance);
    require(eig.info() == Eigen::Success &&
                eig.eigenvalues().minCoeff() > 0.0,
            "whiten: covariance must be positive-definite");
    Vec inv_sqrt = eig.eigenvalues().array().sqrt().inverse();
    Mat w_half = eig.eigenvectors() * inv_sqrt.asDiagonal() *
                 eig.eigenvectors().transpose();
    LabelGmmSpec out;
    out.pi = spec.pi;
    out.meanModel = gramian_decompose(w_half * spec.meanModel.means);
    return out;
}

// Keep only the first p feature coordinates.
inline Dataset truncate_features(const Dataset& ds, int p) {
    require(p >= 1 && p <= ds.d(), "truncate_features: p out of range");
    Dataset out = ds;
    out.X = ds.X.leftCols(p).eval();
    return out;
}

inline LabelGmmSpec truncate_features(const LabelGmmSpec& spec, int p) {
    const auto d = spec.meanModel.means.rows();
    require(p >= 1 && p <= d, "truncate_features: p out of range");
    LabelGmmSpec out;
    out.pi = spec.pi;
    out.meanModel = gramian_decompose(spec.meanModel.means.topRows(p));
    if (spec.covariance)
        out.covariance = spec.covariance->topLeftCorner(p, p).eval();
    return out;
}

inline GroupGmmSpec truncate_features(const GroupGmmSpec& spec, int p) {
    const auto d = spec.meanModel.means.rows();
    require(p >= 1 && p <= d, "truncate_features: p out of range");
    GroupGmmSpec out = spec;
    out.meanModel = gramian_decompose(spec.meanModel.means.topRows(p));
    return out;
}

}  // namespace vsmargin
