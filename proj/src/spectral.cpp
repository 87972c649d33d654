#include "isopara/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "isopara/error.hpp"

namespace isopara {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxSweeps = 100;

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double min_gap_to(const std::vector<double>& kappas, std::size_t i) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < kappas.size(); ++l) {
        if (l != i) gap = std::min(gap, std::abs(kappas[i] - kappas[l]));
    }
    return gap;
}

struct JacobiResult {
    Vector values;
    Matrix vectors;  // columns
    int sweeps = 0;
};

// Cyclic-by-row Jacobi; rotation angles as in the classical two-sided scheme.
JacobiResult jacobi(const Matrix& source) {
    const int n = static_cast<int>(source.rows());
    Matrix a = source;
    Matrix v = Matrix::Identity(n, n);
    const double norm = a.norm();
    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off) <= kEps * norm || off == 0.0) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (sweep == kMaxSweeps) {
        throw Error(ErrorCode::NoConvergence,
                    "Jacobi eigensolver did not converge after " + std::to_string(sweep) + " sweeps");
    }
    return {a.diagonal(), v, sweep};
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw Error(ErrorCode::InvalidArgument, "symmetric matrix must be square and nonempty");
    if (!m.allFinite()) throw Error(ErrorCode::NonFinite, "matrix has non-finite entries");
    m_ = m.triangularView<Eigen::Upper>();
    m_.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();
}

SymMatrix SymMatrix::identity(int n) { return SymMatrix(Matrix::Identity(n, n)); }

SymMatrix SymMatrix::zero(int n) { return SymMatrix(Matrix::Zero(n, n)); }

Projection Projection::from_matrix(const SymMatrix& r, double tol) {
    const Matrix& m = r.matrix();
    const double idem = (m * m - m).norm();
    const double tr = m.trace();
    const long k = std::lround(tr);
    if (idem > tol || std::abs(tr - static_cast<double>(k)) > tol) {
        throw Error(ErrorCode::NotAProjection,
                    "||RR-R||_F = " + std::to_string(idem) + ", tr R = " + std::to_string(tr));
    }
    return Projection(r, static_cast<int>(k));
}

double SpectralDecomp::tol_proj() const { return 100.0 * kEps * n + group_tol; }

SpectralDecomp sym_eig(const SymMatrix& a, double group_tol) {
    if (!(group_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "group_tol must be positive");
    const int n = a.n();
    JacobiResult jr = jacobi(a.matrix());

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int l, int r) { return jr.values(l) < jr.values(r); });

    SpectralDecomp dec;
    dec.n = n;
    dec.group_tol = group_tol;
    dec.sweeps = jr.sweeps;
    for (int idx : order) dec.eigenvalues.push_back(jr.values(idx));
    const double radius = std::max(std::abs(dec.eigenvalues.front()), std::abs(dec.eigenvalues.back()));
    dec.scale = std::max(1.0, radius);
    const double threshold = dec.merge_threshold();

    int begin = 0;
    while (begin < n) {
        int end = begin + 1;
        while (end < n && dec.eigenvalues[end] - dec.eigenvalues[end - 1] <= threshold) ++end;
        Matrix p = Matrix::Zero(n, n);
        double sum = 0.0;
        for (int j = begin; j < end; ++j) {
            const auto col = jr.vectors.col(order[j]);
            p += col * col.transpose();
            sum += dec.eigenvalues[j];
        }
        dec.kappas.push_back(sum / (end - begin));
        dec.mults.push_back(end - begin);
        dec.projections.emplace_back(symmetrized(p));
        begin = end;
    }
    return dec;
}

Projection frobenius_covariant(const SymMatrix& a, const std::vector<double>& kappas, std::size_t i,
                               double group_tol) {
    if (i >= kappas.size()) throw Error(ErrorCode::InvalidArgument, "eigenvalue index out of range");
    const int n = a.n();
    double radius = 0.0;
    for (double k : kappas) radius = std::max(radius, std::abs(k));
    const double scale = std::max(1.0, radius);
    if (kappas.size() > 1 && min_gap_to(kappas, i) < group_tol * scale) {
        throw Error(ErrorCode::DegenerateSpectrum, "eigenvalue gap below grouping tolerance");
    }
    Matrix p = Matrix::Identity(n, n);
    for (std::size_t l = 0; l < kappas.size(); ++l) {
        if (l == i) continue;
        Matrix factor = a.matrix();
        factor.diagonal().array() -= kappas[l];
        p = p * factor / (kappas[i] - kappas[l]);
    }
    const double tol = 100.0 * kEps * n + group_tol;
    return Projection::from_matrix(SymMatrix(symmetrized(p)), std::max(tol, 1e-6));
}

SymMatrix pseudo_inverse(const SpectralDecomp& dec, std::size_t i) {
    if (i >= dec.size()) throw Error(ErrorCode::InvalidArgument, "eigenvalue index out of range");
    if (dec.size() > 1 && min_gap_to(dec.kappas, i) < dec.merge_threshold()) {
        throw Error(ErrorCode::DegenerateSpectrum, "eigenvalue gap below grouping tolerance");
    }
    Matrix h = Matrix::Zero(dec.n, dec.n);
    for (std::size_t k = 0; k < dec.size(); ++k) {
        if (k == i) continue;
        h += dec.projections[k].matrix() / (dec.kappas[i] - dec.kappas[k]);
    }
    return SymMatrix(symmetrized(h));
}

double cartan_sum(const std::vector<double>& kappas, const std::vector<int>& mults, std::size_t i) {
    if (kappas.size() != mults.size() || i >= kappas.size())
        throw Error(ErrorCode::InvalidArgument, "cartan_sum: mismatched lengths or bad index");
    if (kappas[i] == 0.0) throw Error(ErrorCode::InvalidArgument, "cartan_sum: kappa_i must be nonzero");
    double sum = 0.0;
    for (std::size_t j = 0; j < kappas.size(); ++j) {
        if (j == i || kappas[j] == 0.0) continue;
        sum += mults[j] * kappas[i] * kappas[j] / (kappas[i] - kappas[j]);
    }
    return sum;
}

std::vector<double> cartan_terms(const std::vector<double>& kappas, std::size_t i) {
    if (i >= kappas.size()) throw Error(ErrorCode::InvalidArgument, "cartan_terms: bad index");
    std::vector<double> terms;
    for (std::size_t j = 0; j < kappas.size(); ++j) {
        if (j == i || kappas[j] == 0.0) continue;
        terms.push_back(kappas[j] / (kappas[i] - kappas[j]));
    }
    return terms;
}

std::size_t smallest_nonzero(const std::vector<double>& kappas) {
    std::size_t best = kappas.size();
    for (std::size_t j = 0; j < kappas.size(); ++j) {
        if (kappas[j] == 0.0) continue;
        if (best == kappas.size() || std::abs(kappas[j]) < std::abs(kappas[best])) best = j;
    }
    return best;
}

}  // namespace isopara
