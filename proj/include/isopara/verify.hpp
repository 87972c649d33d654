#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "isopara/classify.hpp"
#include "isopara/fields.hpp"

namespace isopara {

struct FlowCheckOptions {
    double focal_eps = 1e-8;
    double unit_tol = 1e-8;
    int segment_samples = 16;
};

/// Residuals of the straight-line laws for a unit-gradient field v at x + t grad v(x).
struct FlowCheck {
    double level_shift = 0.0;    // |v(y) - v(x) - t|
    double grad_drift = 0.0;     // |grad v(y) - grad v(x)|
    double hess_residual = 0.0;  // |Hv(y) - sum k_i/(1 + t k_i) P_i(x)|_F
    Vector endpoint;
};

/// Throws FocalPoint if 1 + t k_i <= focal_eps for some curvature k_i,
/// InadmissibleSegment if the segment leaves the domain and
/// InvalidArgument if |grad v(x)| differs from 1 by more than unit_tol.
FlowCheck flow_checks(const Probe& v, const Vector& x, double t, const FlowCheckOptions& opts = {});

/// Open range of t for which x + t grad v(x) stays in the field's domain:
/// v(x) + t inside F's range and, for cylinders, t > -|R0(x - x*)|.
std::pair<double, double> flow_window(const CanonicalField& field, const Vector& x);

struct FlowPath {
    std::vector<double> tau;
    std::vector<Vector> path;
    std::vector<double> h;     // u along the path
    double h_law_residual = 0.0;  // max |dh/dtau - f^2(h)| / max(1, f^2)
    double straightness = 0.0;    // max |c(tau) - x0 - tau grad u(x0)|
    double line_deviation = 0.0;  // max distance from the line through x0 along grad u(x0)
    double level_shift = 0.0;     // max |h(tau) - h(0) - tau|
};

/// RK4 gradient flow over [0, tau_max]; dh/dtau is compared against the
/// profile estimated along the same flow.
FlowPath integrate_flow(const Probe& u, const Vector& x0, double tau_max, int rk_steps,
                        double eps_grad = kDefaultEpsGrad);

/// |Laplacian| of w at x from the 2n+1 point central stencil.
/// Throws InadmissibleStencil if h <= 0 or a stencil value is not finite.
double harmonic_residual(const Blackbox& w, const Vector& x, double h);

/// +1 for t >= 0, -1 otherwise.
int sign_convention(double t);

enum class Suite { Flow, HessianEvolution, Harmonic, Isoparametric, Cartan };

std::string to_string(Suite s);
/// Throws InvalidArgument for unknown names.
Suite parse_suite(const std::string& name);

struct SuiteOptions {
    int samples = 100;
    std::uint64_t seed = 0;
    double h = 1e-3;  // harmonic stencil step
};

struct SuiteResult {
    Suite suite = Suite::Flow;
    bool passed = false;
    int checks = 0;
    std::map<std::string, double> metrics;
    std::map<std::string, double> tolerances;
    std::string note;
};

SuiteResult run_suite(const CanonicalField& field, Suite suite, const SuiteOptions& opts = {});

}  // namespace isopara
