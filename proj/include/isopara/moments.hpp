#pragma once

#include <vector>

#include "isopara/types.hpp"

namespace isopara {

/// Trace moments C_k = sum_i d_i kappa_i^k, k = 1..m, of a spectrum with
/// m distinct nonzero eigenvalues of multiplicities d_i.
struct MomentSystem {
    std::vector<int> d;
    std::vector<double> C;

    int m() const { return static_cast<int>(C.size()); }
    /// Throws InvalidArgument unless m >= 1, |d| = m, d_i >= 1, C finite.
    void validate() const;
};

/// (C_1, ..., C_m) with C_k = sum_i d_i y_i^k.
std::vector<double> power_sums(const std::vector<double>& kappas, const std::vector<int>& d, int m);

struct VandermondeJacobian {
    Matrix jacobian;     // (k, j) entry: k d_j y_j^(k-1), rows k = 1..m
    double determinant;  // m! d_1...d_m prod_{i<j} (y_j - y_i)
};

/// Jacobian of y -> power_sums(y, d, m) with m = |y|, and its determinant
/// from the diag(1..m) * Vandermonde * diag(d) factorization.
VandermondeJacobian vandermonde_jacobian(const std::vector<double>& y, const std::vector<int>& d);

struct InvertOptions {
    int max_iter = 100;
    double collision_gap = 1e-12;
};

/// Newton inversion of the power-sum map from the initial guess y0.
///
/// Converged when max_k |power_sums(y)_k - C_k| <= tol * max(1, max_k |C_k|).
/// Steps are halved while they increase the residual. The result is sorted
/// ascending. Throws SingularJacobian if two iterates come within
/// collision_gap, NoConvergence after max_iter iterations.
std::vector<double> invert_moments(const MomentSystem& sys, const std::vector<double>& y0, double tol,
                                   const InvertOptions& opts = {});

/// Initial guess spread around the mean eigenvalue by the moment standard
/// deviation; used when the caller has no better estimate.
std::vector<double> heuristic_guess(const MomentSystem& sys);

}  // namespace isopara
