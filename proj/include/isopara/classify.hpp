#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isopara/fields.hpp"
#include "isopara/profile.hpp"

namespace isopara {

struct EstimateOptions {
    /// Stop a direction once the path is this far from x0 (0 = no limit).
    double max_reach = 0.0;
    /// Integrate backwards in tau as well as forwards.
    bool bidirectional = true;
    /// End a direction quietly when it leaves the domain or meets a critical
    /// point instead of throwing DomainExit / CriticalPoint.
    bool truncate = false;
    /// Shorten tau-steps where f grows so the table stays fine in t;
    /// otherwise every step is span / steps.
    bool adaptive = true;
    double eps_grad = kDefaultEpsGrad;
};

/// Gradient-flow samples through x0 and the tabulated profile built from them.
struct ProfileEstimate {
    Profile profile = Profile::constant(1.0, {}, 0.0);
    std::vector<double> tau;
    std::vector<Vector> path;
    std::vector<double> t;   // u along the path, ascending
    std::vector<double> f;   // |grad u| along the path
    std::vector<double> df;  // f'(t) = ninf / f
    /// max |dh/dtau - f^2(h)| / max(1, f^2) with dh/dtau from a five-point
    /// difference of h along the path.
    double h_law_residual = 0.0;
};

/// RK4 integration of c' = grad u^T(c) from x0 over tau in [-span, span]
/// (or [0, span]) with `steps` steps per direction. Returns the tabulated
/// profile (t, f(t)) with t = u(c(tau)) and Hermite slopes f' = ninf / f.
ProfileEstimate estimate_profile(const Probe& u, const Vector& x0, double span, int steps,
                                 const EstimateOptions& opts = {});

enum class CaseKind { Plane, Cylinder, Reject };

std::string to_string(CaseKind kind);

struct ResidualStats {
    double max = 0.0;
    double rms = 0.0;
};

struct ReconstructionResiduals {
    int samples = 0;
    ResidualStats reconstruction;  // |u - u_hat|
    ResidualStats semiexp;         // | |v + 1/c1| - |R0(x - x*)| |, or |v - q^T(x - x0)| for planes
    ResidualStats gradnorm;        // | |grad u| - f_hat(u) |
    ResidualStats laplacian;       // | lap u - g_hat(u) |
};

struct ClassifyOptions {
    double group_tol = kDefaultGroupTol;
    double tol_zero = 1e-7;
    double eps_grad = kDefaultEpsGrad;
    double eps_axis = kDefaultEpsAxis;
    /// Tolerance multiplier applied to group_tol and tol_zero for fd jets.
    double fd_widen = 1e3;
    bool residuals = true;
    int residual_samples = 24;
    int profile_steps = 200;
    std::uint64_t seed = 0;
};

struct ClassificationReport {
    CaseKind kind = CaseKind::Reject;
    std::string reason;  // Reject only
    bool negated = false;

    Vector probe;  // x0
    int k = 0;     // 1 for planes
    Vector q;      // plane
    Matrix R0;     // cylinder
    Vector x_star;
    double c1 = 0.0;
    double C1 = 0.0;
    double onelap = 0.0;  // 1-Laplacian at x0 of the classified field

    // Tolerances actually used (after fd widening).
    JetMode mode = JetMode::Analytic;
    double h = 0.0;
    double group_tol = 0.0;
    double tol_zero = 0.0;
    double eps_grad = 0.0;
    double eps_axis = 0.0;

    // Diagnostics.
    std::vector<double> eigenvalues;  // raw spectrum of hess v
    std::vector<double> gaps;
    std::vector<double> kappas;       // grouped, zero cluster included
    std::vector<int> mults;
    std::vector<double> cartan;       // cartan_sum per nonzero cluster (m >= 2)
    double normal_residual = 0.0;     // |hess_v n|
    std::string assumption = "domain assumed connected; not verifiable from local samples";

    std::optional<Profile> profile;   // estimated along the gradient flow
    std::optional<ReconstructionResiduals> residuals;
    std::string residual_note;
};

/// Plane / cylinder decision at x0 with recovery of (q, x0) or
/// (k, R0, x*, c1, C1). A negative 1-Laplacian is handled by classifying -u
/// and setting `negated`. Throws CriticalPoint at critical points and
/// GroupingAmbiguous when an eigenvalue gap or magnitude falls within a
/// decade above its threshold.
ClassificationReport classify(const Probe& u, const Vector& x0, const ClassifyOptions& opts = {});
ClassificationReport classify(const Probe& u, const Vector& x0, double tol);

/// Compares u against the canonical field rebuilt from the report on the
/// given samples. Throws ProfileRangeExceeded when a sample leaves the
/// estimated profile's table, InvalidArgument for Reject reports.
ReconstructionResiduals verify_reconstruction(const ClassificationReport& rep, const Probe& u,
                                              const std::vector<Vector>& samples);

struct IsoCheckOptions {
    double tol_u = 1e-9;  // bin width in u
    double tol = 1e-9;    // admissible spread of |grad u| within a bin
    double tol_g = 1e-8;  // admissible spread of lap u within a bin
    double eps_grad = kDefaultEpsGrad;
};

struct IsoBin {
    double u_lo = 0.0;
    double u_hi = 0.0;
    int count = 0;
    double grad_spread = 0.0;
    double lap_spread = 0.0;
};

struct IsoCheck {
    std::vector<IsoBin> bins;
    double max_grad_spread = 0.0;
    double max_lap_spread = 0.0;
    int compared_bins = 0;  // bins with >= 2 samples
    bool grad_ok = true;
    bool lap_ok = true;
    bool verdict = false;   // needs grad_ok, lap_ok and at least one compared bin
};

/// Tests whether |grad u| and lap u are single-valued functions of u over
/// the samples.
IsoCheck isoparametric_check(const Probe& u, const std::vector<Vector>& samples, const IsoCheckOptions& opts = {});

}  // namespace isopara
