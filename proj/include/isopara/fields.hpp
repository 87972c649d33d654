#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isopara/profile.hpp"
#include "isopara/spectral.hpp"
#include "isopara/types.hpp"

namespace isopara {

/// A black-box scalar field. Returns NaN outside its domain.
using Blackbox = std::function<double(const Vector&)>;

struct Jet {
    Vector x;
    double u = 0.0;
    Vector grad;
    SymMatrix hess;
};

/// Pointwise level-set operators derived from a jet.
struct Operators {
    double gradnorm = 0.0;
    double laplacian = 0.0;
    double ninf = 0.0;    // normalized infinity-Laplacian n H n^T
    double onelap = 0.0;  // (laplacian - ninf) / gradnorm, the mean curvature
    SymMatrix hess_v;     // Hessian of the unit-gradient reparametrization v = F(u)
    Vector normal;        // grad / gradnorm
};

constexpr double kDefaultEpsGrad = 1e-12;
constexpr double kDefaultEpsAxis = 1e-6;

/// Throws CriticalPoint if |grad u| <= eps_grad.
Operators operators(const Jet& j, double eps_grad = kDefaultEpsGrad);

/// R = Q Q^T for a seeded Gaussian k-frame orthonormalized by Gram-Schmidt.
Projection random_projection(int n, int k, std::uint64_t seed);
/// Seeded uniformly distributed unit vector.
Vector random_unit_vector(int n, std::uint64_t seed);

enum class FieldKind { Plane, Cylinder };

/// Parameters of a canonical field as ingested from JSON.
struct FieldSpec {
    FieldKind kind = FieldKind::Plane;
    int n = 0;
    Vector q, x0;          // plane
    Matrix R0;             // cylinder
    Vector x_star;         // cylinder
    int k = 0;             // cylinder
    double C1 = 0.0;       // cylinder
    std::optional<Profile> profile;
    double eps_axis = kDefaultEpsAxis;
};

/// Exact isoparametric field u = U(q^T(x - x0)) or u = U_k(|R0(x - x*)|).
class CanonicalField {
public:
    static CanonicalField plane(const Vector& q, const Vector& x0, const Profile& profile);
    static CanonicalField cylinder(const Projection& r0, const Vector& x_star, double C1, const Profile& profile,
                                   double eps_axis = kDefaultEpsAxis);

    FieldKind kind() const { return kind_; }
    bool is_plane() const { return kind_ == FieldKind::Plane; }
    int n() const { return n_; }
    int k() const { return is_plane() ? 1 : r0_.rank(); }
    const Profile& profile() const { return profile_; }
    const TransformParams& params() const { return params_; }
    const Vector& q() const { return q_; }
    const Vector& x0() const { return x0_; }
    const Projection& R0() const { return r0_; }
    const Vector& x_star() const { return x_star_; }
    double C1() const { return params_.C1; }
    /// C1 / (k - 1); zero for planes.
    double c1() const { return is_plane() ? 0.0 : params_.C1 / (k() - 1); }
    double eps_axis() const { return eps_axis_; }

    /// q^T(x - x0) for planes, |R0(x - x*)| for cylinders.
    double radius(const Vector& x) const;
    bool admissible(const Vector& x) const;

    double value(const Vector& x) const;
    /// Chain-rule jet; throws AxisTooClose near the cylinder axis and
    /// OutOfRange where the profile inverse is undefined.
    Jet jet(const Vector& x) const;

    /// v = F(u): q^T(x - x0) or |R0(x - x*)| - (k-1)/C1; |grad v| = 1.
    double unit_value(const Vector& x) const;
    Jet unit_jet(const Vector& x) const;

private:
    CanonicalField() = default;
    void check_axis(double r) const;

    FieldKind kind_ = FieldKind::Plane;
    int n_ = 0;
    Profile profile_ = Profile::constant(1.0, {}, 0.0);
    TransformParams params_;
    Vector q_, x0_, x_star_;
    Projection r0_;
    double eps_axis_ = kDefaultEpsAxis;
};

/// Validates a FieldSpec and builds the field; throws InvalidSpec.
CanonicalField make_field(const FieldSpec& spec);

enum class JetMode { Analytic, FiniteDifference };

std::string to_string(JetMode mode);

/// Default finite-difference step 1e-4 max(1, |x|).
double default_step(const Vector& x);

/// Central-difference jet: O(h^2) gradient, nested central differences for
/// the Hessian (symmetrized). Throws StepTooSmall if h < 1e3 eps |x| and
/// OutOfDomain if a stencil value is NaN.
Jet fd_jet(const Blackbox& u, const Vector& x, double h);

Jet jet(const CanonicalField& field, const Vector& x, JetMode mode, double h = 0.0);

/// Uniform access to a field for the classification and verification code:
/// a value oracle plus a jet oracle, either analytic or finite-difference.
struct Probe {
    int n = 0;
    Blackbox value;
    std::function<Jet(const Vector&)> jet;
    JetMode mode = JetMode::Analytic;
    double h = 0.0;  // fd step, 0 = default_step(x)
};

/// Analytic jets of a canonical field; value() is NaN outside admissibility.
Probe analytic_probe(const CanonicalField& field);
/// Analytic jets of the unit-gradient field v = F(u).
Probe unit_probe(const CanonicalField& field);
/// Finite-difference jets of a black box.
Probe fd_probe(Blackbox u, int n, double h = 0.0);
/// -u, with jets negated exactly.
Probe negated(const Probe& p);

/// Window of unit values v = F(u) used for random sampling: [-1, 1] for
/// planes, radii in [r0/2, 3r0/2] about r0 = (k-1)/C1 for cylinders, each
/// intersected with the range of F and shrunk by 5% on both sides.
std::pair<double, double> sampling_window(const CanonicalField& field);

/// Seeded admissible points whose unit value lies in sampling_window().
std::vector<Vector> sample_admissible(const CanonicalField& field, int count, std::uint64_t seed);

/// per_level seeded points on each of `levels` level sets (equal u by construction).
std::vector<Vector> sample_level_sets(const CanonicalField& field, int levels, int per_level, std::uint64_t seed);

}  // namespace isopara
