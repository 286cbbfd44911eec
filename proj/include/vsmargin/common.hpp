#pragma once

// Shared numeric utilities: standard-normal helpers, Gaussian partial
// moments of the negative part, overflow-safe softplus, and the linear
// algebra aliases used throughout the library.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vsmargin {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

// Phi(x) = P(G <= x), via erfc for tail accuracy.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Q(x) = P(G > x). Computed with erfc, never as 1 - Phi(x), to avoid
// catastrophic cancellation for large x.
inline double q_function(double x) {
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

// First partial moment of the negative part: E[min(G + c, 0)] for G ~ N(0,1).
inline double neg_part_moment(double c) {
    return c * normal_cdf(-c) - normal_pdf(c);
}

// Second partial moment of the negative part: E[min(G + c, 0)^2].
// Closed form: (1 + c^2) Phi(-c) - c phi(c).
inline double neg_part_sq_moment(double c) {
    return (1.0 + c * c) * normal_cdf(-c) - c * normal_pdf(c);
}

// d/dc E[min(G + c, 0)^2] = 2 E[min(G + c, 0)].
inline double neg_part_sq_moment_deriv(double c) {
    return 2.0 * neg_part_moment(c);
}

// log(1 + e^t), overflow-safe: for large t use t + e^{-t} (leading terms of
// the asymptotic expansion); otherwise log1p(exp(t)).
inline double log1pexp(double t) {
    if (t > 30.0) return t + std::exp(-t);
    return std::log1p(std::exp(t));
}

// Logistic sigmoid, overflow-safe.
inline double sigmoid(double t) {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// Linear classifier: decision rule sign(w'x + b).
struct LinearModel {
    Vec w;
    double b = 0.0;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace vsmargin
