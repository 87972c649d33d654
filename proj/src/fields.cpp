#include "isopara/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "isopara/error.hpp"

namespace isopara {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix gaussian(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
}

// Modified Gram-Schmidt, applied twice.
Matrix orthonormalize(Matrix q) {
    for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < q.cols(); ++j) {
            for (int i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
            q.col(j).normalize();
        }
    }
    return q;
}

}  // namespace

Operators operators(const Jet& j, double eps_grad) {
    Operators ops;
    ops.gradnorm = j.grad.norm();
    if (!(ops.gradnorm > eps_grad))
        throw Error(ErrorCode::CriticalPoint, "|grad u| = " + std::to_string(ops.gradnorm) + " at probe point");
    const Matrix& h = j.hess.matrix();
    ops.normal = j.grad / ops.gradnorm;
    ops.laplacian = h.trace();
    ops.ninf = ops.normal.dot(h * ops.normal);
    ops.onelap = (ops.laplacian - ops.ninf) / ops.gradnorm;
    ops.hess_v = SymMatrix((h - ops.ninf * ops.normal * ops.normal.transpose()) / ops.gradnorm);
    return ops;
}

Projection random_projection(int n, int k, std::uint64_t seed) {
    if (n < 1 || k < 0 || k > n)
        throw Error(ErrorCode::RankOutOfRange, "rank " + std::to_string(k) + " not in 0.." + std::to_string(n));
    if (k == 0) return Projection::from_matrix(SymMatrix::zero(n), 0.0);
    if (k == n) return Projection::from_matrix(SymMatrix::identity(n), 0.0);
    const Matrix q = orthonormalize(gaussian(n, k, seed));
    const Matrix r = q * q.transpose();
    return Projection::from_matrix(SymMatrix(0.5 * (r + r.transpose())), 1e-12);
}

Vector random_unit_vector(int n, std::uint64_t seed) {
    Vector v = gaussian(n, 1, seed).col(0);
    return v / v.norm();
}

CanonicalField CanonicalField::plane(const Vector& q, const Vector& x0, const Profile& profile) {
    if (q.size() < 1 || q.size() != x0.size()) throw Error(ErrorCode::InvalidSpec, "q and x0 must have dimension n");
    if (!q.allFinite() || !x0.allFinite()) throw Error(ErrorCode::InvalidSpec, "q and x0 must be finite");
    if (std::abs(q.norm() - 1.0) > 1e-12) throw Error(ErrorCode::InvalidSpec, "q must have unit length");
    CanonicalField f;
    f.kind_ = FieldKind::Plane;
    f.n_ = static_cast<int>(q.size());
    f.q_ = q;
    f.x0_ = x0;
    f.profile_ = profile;
    f.params_ = TransformParams::plane();
    return f;
}

CanonicalField CanonicalField::cylinder(const Projection& r0, const Vector& x_star, double C1,
                                        const Profile& profile, double eps_axis) {
    if (r0.n() != x_star.size()) throw Error(ErrorCode::InvalidSpec, "R0 and x_star dimensions differ");
    if (!x_star.allFinite()) throw Error(ErrorCode::InvalidSpec, "x_star must be finite");
    if (r0.rank() < 2) throw Error(ErrorCode::InvalidSpec, "cylinder needs rank R0 >= 2");
    if (!(C1 > 0.0) || !std::isfinite(C1)) throw Error(ErrorCode::InvalidSpec, "cylinder needs C1 > 0");
    if (!(eps_axis > 0.0)) throw Error(ErrorCode::InvalidSpec, "eps_axis must be positive");
    CanonicalField f;
    f.kind_ = FieldKind::Cylinder;
    f.n_ = r0.n();
    f.r0_ = r0;
    f.x_star_ = x_star;
    f.profile_ = profile;
    f.params_ = TransformParams::cylinder(r0.rank(), C1);
    f.eps_axis_ = eps_axis;
    return f;
}

CanonicalField make_field(const FieldSpec& spec) {
    if (!spec.profile) throw Error(ErrorCode::InvalidSpec, "field needs a profile");
    if (spec.n < 1) throw Error(ErrorCode::InvalidSpec, "field dimension must be >= 1");
    if (spec.kind == FieldKind::Plane) {
        if (spec.q.size() != spec.n || spec.x0.size() != spec.n)
            throw Error(ErrorCode::InvalidSpec, "q and x0 must have n entries");
        return CanonicalField::plane(spec.q, spec.x0, *spec.profile);
    }
    if (spec.R0.rows() != spec.n || spec.R0.cols() != spec.n || spec.x_star.size() != spec.n)
        throw Error(ErrorCode::InvalidSpec, "R0 must be n x n and x_star must have n entries");
    if (spec.k < 2 || spec.k > spec.n) throw Error(ErrorCode::InvalidSpec, "cylinder needs 2 <= k <= n");
    if (!spec.R0.allFinite()) throw Error(ErrorCode::InvalidSpec, "R0 must be finite");
    if ((spec.R0 - spec.R0.transpose()).norm() > 1e-12) throw Error(ErrorCode::InvalidSpec, "R0 must be symmetric");
    Projection r0;
    try {
        r0 = Projection::from_matrix(SymMatrix(spec.R0), 1e-9);
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("R0 is not a projection: ") + e.what());
    }
    if (r0.rank() != spec.k) throw Error(ErrorCode::InvalidSpec, "trace of R0 does not match k");
    return CanonicalField::cylinder(r0, spec.x_star, spec.C1, *spec.profile, spec.eps_axis);
}

double CanonicalField::radius(const Vector& x) const {
    if (x.size() != n_) throw Error(ErrorCode::InvalidArgument, "point has the wrong dimension");
    if (is_plane()) return q_.dot(x - x0_);
    return (r0_.matrix().matrix() * (x - x_star_)).norm();
}

void CanonicalField::check_axis(double r) const {
    if (!(r >= eps_axis_))
        throw Error(ErrorCode::AxisTooClose, "|R0(x - x*)| = " + std::to_string(r) + " below the axis margin");
}

bool CanonicalField::admissible(const Vector& x) const {
    const double r = radius(x);
    if (!is_plane() && !(r >= eps_axis_)) return false;
    const auto [lo, hi] = profile_.F_range();
    const double s = r - params_.offset();
    return lo < s && s < hi;
}

double CanonicalField::value(const Vector& x) const {
    const double r = radius(x);
    if (!is_plane()) check_axis(r);
    return inverse_map(profile_, params_, r);
}

double CanonicalField::unit_value(const Vector& x) const {
    const double r = radius(x);
    if (!is_plane()) check_axis(r);
    return r - params_.offset();
}

Jet CanonicalField::unit_jet(const Vector& x) const {
    Jet j;
    j.x = x;
    if (is_plane()) {
        j.u = q_.dot(x - x0_);
        j.grad = q_;
        j.hess = SymMatrix::zero(n_);
        return j;
    }
    const Matrix& r0 = r0_.matrix().matrix();
    const Vector w = r0 * (x - x_star_);
    const double r = w.norm();
    check_axis(r);
    const Vector e = w / r;
    j.u = r - params_.offset();
    j.grad = e;
    j.hess = SymMatrix((r0 - e * e.transpose()) / r);
    return j;
}

Jet CanonicalField::jet(const Vector& x) const {
    const Jet v = unit_jet(x);
    // u = U(v) with U' = f(U), U'' = f'(U) f(U).
    const double u = profile_.U(v.u);
    const double d1 = profile_.f(u);
    const double d2 = profile_.df(u) * d1;
    Jet j;
    j.x = x;
    j.u = u;
    j.grad = d1 * v.grad;
    j.hess = SymMatrix(d2 * v.grad * v.grad.transpose() + d1 * v.hess.matrix());
    return j;
}

std::string to_string(JetMode mode) { return mode == JetMode::Analytic ? "analytic" : "fd"; }

double default_step(const Vector& x) { return 1e-4 * std::max(1.0, x.norm()); }

Jet fd_jet(const Blackbox& u, const Vector& x, double h) {
    if (!(h >= 1e3 * kEps * x.norm()) || !(h > 0.0))
        throw Error(ErrorCode::StepTooSmall, "step " + std::to_string(h) + " too small for |x| = " +
                                                 std::to_string(x.norm()));
    const int n = static_cast<int>(x.size());
    auto eval = [&](const Vector& p) {
        const double val = u(p);
        if (!std::isfinite(val)) throw Error(ErrorCode::OutOfDomain, "field undefined on the stencil");
        return val;
    };
    Jet j;
    j.x = x;
    j.u = eval(x);
    j.grad.resize(n);
    Matrix hess(n, n);
    Vector p = x;
    std::vector<double> plus(n), minus(n);
    for (int i = 0; i < n; ++i) {
        p(i) = x(i) + h;
        plus[i] = eval(p);
        p(i) = x(i) - h;
        minus[i] = eval(p);
        p(i) = x(i);
        j.grad(i) = (plus[i] - minus[i]) / (2.0 * h);
        hess(i, i) = (plus[i] - 2.0 * j.u + minus[i]) / (h * h);
    }
    for (int i = 0; i < n; ++i) {
        for (int k = i + 1; k < n; ++k) {
            p(i) = x(i) + h;
            p(k) = x(k) + h;
            const double pp = eval(p);
            p(k) = x(k) - h;
            const double pm = eval(p);
            p(i) = x(i) - h;
            const double mm = eval(p);
            p(k) = x(k) + h;
            const double mp = eval(p);
            p(i) = x(i);
            p(k) = x(k);
            hess(i, k) = hess(k, i) = (pp - pm - mp + mm) / (4.0 * h * h);
        }
    }
    j.hess = SymMatrix(hess);
    return j;
}

Jet jet(const CanonicalField& field, const Vector& x, JetMode mode, double h) {
    if (mode == JetMode::Analytic) return field.jet(x);
    if (!field.is_plane()) field.unit_jet(x);  // axis check
    return fd_jet([&](const Vector& p) { return field.value(p); }, x, h > 0.0 ? h : default_step(x));
}

Probe analytic_probe(const CanonicalField& field) {
    Probe p;
    p.n = field.n();
    p.mode = JetMode::Analytic;
    p.value = [field](const Vector& x) {
        if (!field.admissible(x)) return kNaN;
        return field.value(x);
    };
    p.jet = [field](const Vector& x) { return field.jet(x); };
    return p;
}

Probe unit_probe(const CanonicalField& field) {
    Probe p;
    p.n = field.n();
    p.mode = JetMode::Analytic;
    p.value = [field](const Vector& x) {
        if (!field.admissible(x)) return kNaN;
        return field.unit_value(x);
    };
    p.jet = [field](const Vector& x) { return field.unit_jet(x); };
    return p;
}

Probe fd_probe(Blackbox u, int n, double h) {
    Probe p;
    p.n = n;
    p.mode = JetMode::FiniteDifference;
    p.h = h;
    p.value = u;
    p.jet = [u, h](const Vector& x) { return fd_jet(u, x, h > 0.0 ? h : default_step(x)); };
    return p;
}

Probe negated(const Probe& src) {
    Probe p = src;
    auto value = src.value;
    auto jet_fn = src.jet;
    p.value = [value](const Vector& x) { return -value(x); };
    p.jet = [jet_fn](const Vector& x) {
        Jet j = jet_fn(x);
        j.u = -j.u;
        j.grad = -j.grad;
        j.hess = SymMatrix(-j.hess.matrix());
        return j;
    };
    return p;
}

std::pair<double, double> sampling_window(const CanonicalField& field) {
    const double offset = field.params().offset();
    double lo = field.is_plane() ? -1.0 : -0.5 * offset;
    double hi = field.is_plane() ? 1.0 : 0.5 * offset;
    const auto [flo, fhi] = field.profile().F_range();
    lo = std::max(lo, flo);
    hi = std::min(hi, fhi);
    if (!field.is_plane()) lo = std::max(lo, field.eps_axis() - offset);
    if (!(lo < hi)) throw Error(ErrorCode::OutOfRange, "empty sampling window");
    const double shrink = 0.05 * (hi - lo);
    return {lo + shrink, hi - shrink};
}

namespace {

// Point with unit value s and seeded tangential / axial components.
Vector point_at(const CanonicalField& field, double s, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = field.n();
    Vector g(n), w(n);
    for (int i = 0; i < n; ++i) g(i) = normal(rng);
    for (int i = 0; i < n; ++i) w(i) = normal(rng);
    if (field.is_plane()) {
        const Vector& q = field.q();
        const Vector t = w - w.dot(q) * q;
        return field.x0() + s * q + t;
    }
    const Matrix& r0 = field.R0().matrix().matrix();
    Vector e = r0 * g;
    while (e.norm() < 1e-8) {
        for (int i = 0; i < n; ++i) g(i) = normal(rng);
        e = r0 * g;
    }
    e /= e.norm();
    const Vector axial = w - r0 * w;
    return field.x_star() + (s + field.params().offset()) * e + axial;
}

}  // namespace

std::vector<Vector> sample_admissible(const CanonicalField& field, int count, std::uint64_t seed) {
    if (count < 0) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 0");
    const auto [lo, hi] = sampling_window(field);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(lo, hi);
    std::vector<Vector> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(point_at(field, unif(rng), rng));
    return out;
}

std::vector<Vector> sample_level_sets(const CanonicalField& field, int levels, int per_level, std::uint64_t seed) {
    if (levels < 0 || per_level < 0) throw Error(ErrorCode::InvalidArgument, "sample counts must be >= 0");
    const auto [lo, hi] = sampling_window(field);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(lo, hi);
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(levels) * per_level);
    for (int l = 0; l < levels; ++l) {
        const double s = unif(rng);
        for (int i = 0; i < per_level; ++i) out.push_back(point_at(field, s, rng));
    }
    return out;
}

}  // namespace isopara
