#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "isopara/quadrature.hpp"

namespace isopara {

/// Open interval (lo, hi); either end may be infinite.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double t) const { return lo < t && t < hi; }
};

enum class ProfileFamily { Constant, Affine, Power, Tabulated };

/// The one-variable datum f > 0 with |grad u| = f(u), anchored at the base
/// value C0 where F(C0) = 0.
///
/// Analytic families carry closed forms for F(t) = int_{C0}^t ds / f(s) and
/// its inverse U. The tabulated family is a C^1 cubic Hermite interpolant
/// (Fritsch-Carlson slopes unless slopes are supplied); its F is assembled
/// from per-cell integrals.
class Profile {
public:
    static Profile constant(double a, Interval iv, double c0);
    static Profile affine(double a, double b, Interval iv, double c0);
    static Profile power(double a, double p, Interval iv, double c0);
    static Profile tabulated(std::vector<double> t, std::vector<double> f, Interval iv, double c0,
                             std::optional<std::vector<double>> slopes = std::nullopt);

    ProfileFamily family() const { return family_; }
    const Interval& interval() const { return interval_; }
    double C0() const { return c0_; }

    /// Same f with F re-anchored at a new base value.
    Profile rebased(double c0) const;

    double f(double t) const;
    double df(double t) const;

    /// F(t) = int_{C0}^t ds / f(s).
    double F(double t) const;
    /// Inverse of F; throws OutOfRange outside F's range.
    double U(double s) const;
    /// (inf F, sup F) over the interval.
    std::pair<double, double> F_range() const;

    // Family parameters (a, b) / (a, p); tabulated nodes.
    double param_a() const { return a_; }
    double param_b() const { return b_; }
    const std::vector<double>& nodes() const { return t_; }
    const std::vector<double>& values() const { return fv_; }
    const std::vector<double>& slopes() const { return m_; }
    bool slopes_supplied() const { return slopes_supplied_; }

private:
    Profile() = default;
    void require_in(double t) const;
    void validate();
    void build_table();
    std::size_t cell(double t) const;
    double cumulative(double t) const;  // int_{t_0}^t ds / f for tabulated

    ProfileFamily family_ = ProfileFamily::Constant;
    Interval interval_;
    double c0_ = 0.0;
    double a_ = 1.0;
    double b_ = 0.0;  // affine slope or power exponent

    std::vector<double> t_, fv_, m_, cum_;
    bool slopes_supplied_ = false;
    double cum_c0_ = 0.0;
};

/// k >= 2 and C1 > 0 select the cylinder transforms; k absent means plane.
struct TransformParams {
    std::optional<int> k;
    double C1 = 0.0;

    static TransformParams plane() { return {}; }
    static TransformParams cylinder(int k, double c1);

    bool is_cylinder() const { return k.has_value(); }
    /// (k-1)/C1, the radius of the base level set; 0 for planes.
    double offset() const { return is_cylinder() ? (*k - 1) / C1 : 0.0; }
    void validate() const;
};

/// F(t) for planes, F_k(t) = (k-1)/C1 + F(t) for cylinders.
double forward_map(const Profile& p, const TransformParams& params, double t);
/// U(s) or U_k(s).
double inverse_map(const Profile& p, const TransformParams& params, double s);
/// g = f f' for planes, g = f (f' + (k-1)/F_k) for cylinders.
double synth_g(const Profile& p, const TransformParams& params, double t);

/// G(t) = int_{c1}^t exp(-int_{c0}^tau g/f^2 ds) dtau, the transform that
/// makes G(u) harmonic, with its inverse H.
class ViscosityTransform {
public:
    ViscosityTransform(Profile p, ScalarFn g, double c0, double c1, GaussLegendre rule = GaussLegendre(20, 4));

    double operator()(double t) const { return value(t); }
    double value(double t) const;
    /// G'(t) = exp(-int_{c0}^t g/f^2).
    double derivative(double t) const;
    /// G''(t) = -G'(t) g(t) / f(t)^2.
    double second_derivative(double t) const;
    /// H(w) with G(H(w)) = w.
    double inverse(double w) const;

private:
    double exponent(double t) const;  // int_{c0}^t g/f^2
    double exponent_between(double a, double b) const;
    double integrand(double s) const;
    std::vector<double> cuts(double a, double b) const;

    Profile p_;
    ScalarFn g_;
    double c0_, c1_;
    GaussLegendre rule_;
    GaussLegendre panel_;
    double exponent_at_c1_ = 0.0;
};

double visc_transform(const Profile& p, const ScalarFn& g, double c0, double c1, double t);
double visc_transform_inverse(const Profile& p, const ScalarFn& g, double c0, double c1, double w);

/// G~(t) = int_0^t prod_i (1 + c_i tau)^(-d_i) dtau; throws PoleCrossed if
/// some 1 + c_i tau <= 0 on [0, t].
double harmonize_unit(const std::vector<double>& c, const std::vector<int>& d, double t);
/// The integrand prod_i (1 + c_i t)^(-d_i).
double harmonize_unit_derivative(const std::vector<double>& c, const std::vector<int>& d, double t);

}  // namespace isopara
