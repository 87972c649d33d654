#pragma once

#include <cstddef>
#include <vector>

#include "isopara/types.hpp"

namespace isopara {

/// Dense real symmetric matrix. The upper triangle of the source is
/// authoritative; the lower triangle is mirrored from it on construction.
class SymMatrix {
public:
    SymMatrix() = default;
    /// Throws NonFinite on any NaN/inf entry, InvalidArgument if not square.
    explicit SymMatrix(const Matrix& m);

    static SymMatrix identity(int n);
    static SymMatrix zero(int n);

    int n() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }
    double trace() const { return m_.trace(); }
    double frobenius() const { return m_.norm(); }

private:
    Matrix m_;
};

/// Symmetric idempotent matrix with integer rank k = tr R.
class Projection {
public:
    Projection() = default;
    /// Validates RR = R and |tr R - k| within tol; k is the rounded trace.
    static Projection from_matrix(const SymMatrix& r, double tol);

    int n() const { return matrix_.n(); }
    int rank() const { return rank_; }
    const SymMatrix& matrix() const { return matrix_; }

private:
    Projection(SymMatrix m, int k) : matrix_(std::move(m)), rank_(k) {}

    SymMatrix matrix_;
    int rank_ = 0;
};

struct SpectralDecomp {
    int n = 0;
    std::vector<double> kappas;       // distinct eigenvalues, strictly increasing
    std::vector<int> mults;           // multiplicities, summing to n
    std::vector<SymMatrix> projections;
    std::vector<double> eigenvalues;  // raw ascending eigenvalues before grouping
    double group_tol = 0.0;           // relative grouping threshold that was applied
    double scale = 1.0;               // max(1, spectral radius)
    int sweeps = 0;

    std::size_t size() const { return kappas.size(); }
    /// Absolute grouping threshold group_tol * scale.
    double merge_threshold() const { return group_tol * scale; }
    /// Tolerance for the projection invariants (100 eps n + group_tol).
    double tol_proj() const;
};

constexpr double kDefaultGroupTol = 1e-6;

/// Eigendecomposition by cyclic Jacobi rotations with eigenvalue clustering.
///
/// Sorted eigenvalues whose consecutive gaps are at most
/// group_tol * max(1, rho(A)) form one cluster. Each cluster contributes
/// kappa = mean of its members, d = member count and P = the (symmetrized)
/// sum of the members' eigenvector outer products.
SpectralDecomp sym_eig(const SymMatrix& a, double group_tol = kDefaultGroupTol);

/// Frobenius covariant prod_{l != i} (A - kappa_l I) / (kappa_i - kappa_l).
/// The empty product (a single distinct eigenvalue) is the identity.
Projection frobenius_covariant(const SymMatrix& a, const std::vector<double>& kappas,
                               std::size_t i, double group_tol = kDefaultGroupTol);

/// H_i^+ = sum_{k != i} P_k / (kappa_i - kappa_k), so (kappa_i I - A) H_i^+ = I - P_i.
SymMatrix pseudo_inverse(const SpectralDecomp& dec, std::size_t i);

/// sum_{j != i} d_j kappa_i kappa_j / (kappa_i - kappa_j). Zero eigenvalues
/// contribute exactly 0. kappas[i] must be nonzero.
double cartan_sum(const std::vector<double>& kappas, const std::vector<int>& mults,
                  std::size_t i);

/// The factors kappa_j / (kappa_i - kappa_j) over nonzero kappa_j, j != i.
std::vector<double> cartan_terms(const std::vector<double>& kappas, std::size_t i);

/// Index of the nonzero eigenvalue of smallest magnitude; kappas.size() if none.
std::size_t smallest_nonzero(const std::vector<double>& kappas);

}  // namespace isopara
