#include "isopara/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "isopara/error.hpp"

namespace isopara {

FlowCheck flow_checks(const Probe& v, const Vector& x, double t, const FlowCheckOptions& opts) {
    if (!std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "t must be finite");
    const Jet j0 = v.jet(x);
    if (std::abs(j0.grad.norm() - 1.0) > opts.unit_tol)
        throw Error(ErrorCode::InvalidArgument, "flow_checks needs a unit-gradient field");
    const SpectralDecomp dec = sym_eig(j0.hess, kDefaultGroupTol);
    for (double kappa : dec.kappas) {
        if (1.0 + t * kappa <= opts.focal_eps)
            throw Error(ErrorCode::FocalPoint, "1 + t kappa = " + std::to_string(1.0 + t * kappa) + " at t = " +
                                                   std::to_string(t));
    }

    const Vector y = x + t * j0.grad;
    for (int i = 1; i <= opts.segment_samples; ++i) {
        const Vector p = x + (static_cast<double>(i) / opts.segment_samples) * t * j0.grad;
        if (!std::isfinite(v.value(p))) throw Error(ErrorCode::InadmissibleSegment, "segment leaves the domain");
    }
    Jet j1;
    try {
        j1 = v.jet(y);
    } catch (const Error& e) {
        throw Error(ErrorCode::InadmissibleSegment, std::string("segment endpoint: ") + e.what());
    }

    Matrix expected = Matrix::Zero(x.size(), x.size());
    for (std::size_t i = 0; i < dec.size(); ++i)
        expected += dec.kappas[i] / (1.0 + t * dec.kappas[i]) * dec.projections[i].matrix();

    FlowCheck out;
    out.level_shift = std::abs(j1.u - j0.u - t);
    out.grad_drift = (j1.grad - j0.grad).norm();
    out.hess_residual = (j1.hess.matrix() - expected).norm();
    out.endpoint = y;
    return out;
}

std::pair<double, double> flow_window(const CanonicalField& field, const Vector& x) {
    const double v = field.unit_value(x);
    const auto [f_lo, f_hi] = field.profile().F_range();
    double lo = f_lo - v;
    const double hi = f_hi - v;
    if (!field.is_plane()) lo = std::max(lo, -field.radius(x));
    return {lo, hi};
}

FlowPath integrate_flow(const Probe& u, const Vector& x0, double tau_max, int rk_steps, double eps_grad) {
    if (!(tau_max > 0.0) || rk_steps < 1) throw Error(ErrorCode::InvalidArgument, "need tau_max > 0 and rk_steps >= 1");
    EstimateOptions eo;
    eo.bidirectional = false;
    eo.adaptive = false;
    eo.eps_grad = eps_grad;
    const ProfileEstimate est = estimate_profile(u, x0, tau_max, std::max(rk_steps, 2), eo);

    FlowPath out;
    for (std::size_t i = 0; i < est.tau.size(); ++i) {
        if (est.tau[i] < 0.0) continue;
        out.tau.push_back(est.tau[i]);
        out.path.push_back(est.path[i]);
        out.h.push_back(est.t[i]);
    }
    const Vector g0 = u.jet(x0).grad;
    const Vector dir = g0 / g0.norm();
    for (std::size_t i = 0; i < out.tau.size(); ++i) {
        const Vector d = out.path[i] - x0;
        out.straightness = std::max(out.straightness, (d - out.tau[i] * g0).norm());
        out.line_deviation = std::max(out.line_deviation, (d - d.dot(dir) * dir).norm());
        out.level_shift = std::max(out.level_shift, std::abs(out.h[i] - out.h[0] - out.tau[i]));
    }
    const double dt = tau_max / std::max(rk_steps, 2);
    const Interval& iv = est.profile.interval();
    for (std::size_t i = 2; i + 2 < out.h.size(); ++i) {
        if (!iv.contains(out.h[i])) continue;
        const double dh = (-out.h[i + 2] + 8.0 * out.h[i + 1] - 8.0 * out.h[i - 1] + out.h[i - 2]) / (12.0 * dt);
        const double f = est.profile.f(out.h[i]);
        out.h_law_residual = std::max(out.h_law_residual, std::abs(dh - f * f) / std::max(1.0, f * f));
    }
    return out;
}

double harmonic_residual(const Blackbox& w, const Vector& x, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InadmissibleStencil, "stencil step must be positive");
    auto eval = [&](const Vector& p) {
        const double val = w(p);
        if (!std::isfinite(val)) throw Error(ErrorCode::InadmissibleStencil, "stencil point outside the domain");
        return val;
    };
    const double w0 = eval(x);
    double lap = 0.0;
    Vector p = x;
    for (int i = 0; i < x.size(); ++i) {
        p(i) = x(i) + h;
        const double wp = eval(p);
        p(i) = x(i) - h;
        const double wm = eval(p);
        p(i) = x(i);
        lap += (wp - 2.0 * w0 + wm) / (h * h);
    }
    return std::abs(lap);
}

int sign_convention(double t) { return t >= 0.0 ? 1 : -1; }

std::string to_string(Suite s) {
    switch (s) {
        case Suite::Flow: return "flow";
        case Suite::HessianEvolution: return "hessian-evolution";
        case Suite::Harmonic: return "harmonic";
        case Suite::Isoparametric: return "isoparametric";
        case Suite::Cartan: return "cartan";
    }
    return "flow";
}

Suite parse_suite(const std::string& name) {
    for (Suite s : {Suite::Flow, Suite::HessianEvolution, Suite::Harmonic, Suite::Isoparametric, Suite::Cartan})
        if (to_string(s) == name) return s;
    throw Error(ErrorCode::InvalidArgument, "unknown suite '" + name + "'");
}

namespace {

// Flow parameter in [-1, 1] for planes, [-r/2, r/2] for cylinders (so
// 1 + t kappa >= 1/2), clipped to the middle 90% of the flow window.
double flow_parameter(const CanonicalField& field, const Vector& x, std::mt19937_64& rng) {
    const auto [lo, hi] = flow_window(field, x);
    const double reach = field.is_plane() ? 1.0 : 0.5 * field.radius(x);
    const double a = std::max(-reach, std::isinf(lo) ? lo : 0.9 * lo);
    const double b = std::min(reach, std::isinf(hi) ? hi : 0.9 * hi);
    return std::uniform_real_distribution<double>(a, b)(rng);
}

void track(SuiteResult& res, const std::string& key, double value) {
    auto it = res.metrics.find(key);
    if (it == res.metrics.end())
        res.metrics[key] = value;
    else
        it->second = std::max(it->second, value);
}

bool within(const SuiteResult& res) {
    for (const auto& [key, tol] : res.tolerances) {
        auto it = res.metrics.find(key);
        if (it == res.metrics.end() || !(it->second <= tol)) return false;
    }
    return true;
}

void flow_suite(const CanonicalField& field, const SuiteOptions& opts, SuiteResult& res) {
    const Probe v = unit_probe(field);
    const std::vector<Vector> xs = sample_admissible(field, opts.samples, opts.seed);
    std::mt19937_64 rng(opts.seed + 1);
    res.tolerances = {{"level_shift", 1e-8}, {"grad_drift", 1e-7}, {"straightness", 1e-8}, {"flow_level_shift", 1e-8},
                      {"h_law", 1e-8}};
    for (const Vector& x : xs) {
        const FlowCheck fc = flow_checks(v, x, flow_parameter(field, x, rng));
        track(res, "level_shift", fc.level_shift);
        track(res, "grad_drift", fc.grad_drift);
        // Unit speed: the flow gains one level per unit tau.
        const double tau = std::min(1.0, 0.9 * flow_window(field, x).second);
        const FlowPath path = integrate_flow(v, x, tau, static_cast<int>(std::ceil(1000 * tau)));
        track(res, "straightness", path.straightness);
        track(res, "flow_level_shift", path.level_shift);
        track(res, "h_law", path.h_law_residual);
        ++res.checks;
    }
}

void hessian_suite(const CanonicalField& field, const SuiteOptions& opts, SuiteResult& res) {
    const Probe v = unit_probe(field);
    const std::vector<Vector> xs = sample_admissible(field, opts.samples, opts.seed);
    std::mt19937_64 rng(opts.seed + 1);
    res.tolerances = {{"hess_residual", 1e-7}, {"spectrum", 1e-9}, {"focal_missed", 0.0}};
    res.metrics["focal_missed"] = 0.0;
    for (const Vector& x : xs) {
        const FlowCheck fc = flow_checks(v, x, flow_parameter(field, x, rng));
        track(res, "hess_residual", fc.hess_residual);

        // Curvatures 0 (n - k + 1 times) and 1/r (k - 1 times).
        const Jet j = v.jet(x);
        std::vector<double> expect(field.n() - field.k() + 1, 0.0);
        if (!field.is_plane()) expect.resize(field.n(), 1.0 / field.radius(x));
        std::sort(expect.begin(), expect.end());
        const SpectralDecomp dec = sym_eig(j.hess, kDefaultGroupTol);
        double spec = 0.0;
        for (std::size_t i = 0; i < expect.size(); ++i)
            spec = std::max(spec, std::abs(dec.eigenvalues[i] - expect[i]));
        track(res, "spectrum", spec);

        if (!field.is_plane()) {
            const double r = field.radius(x);
            try {
                flow_checks(v, x, -r * (1.0 - 1e-10));
                res.metrics["focal_missed"] += 1.0;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::FocalPoint) res.metrics["focal_missed"] += 1.0;
            }
        }
        ++res.checks;
    }
}

void harmonic_suite(const CanonicalField& field, const SuiteOptions& opts, SuiteResult& res) {
    const Profile& p = field.profile();
    const TransformParams params = field.params();
    const ViscosityTransform G(p, [p, params](double t) { return synth_g(p, params, t); }, p.C0(), p.C0());
    std::vector<double> c;
    std::vector<int> d;
    if (!field.is_plane()) {
        c.push_back(field.c1());
        d.push_back(field.k() - 1);
    }
    const Probe u = analytic_probe(field);
    const Probe v = unit_probe(field);
    const Blackbox gu = [&](const Vector& x) {
        const double val = u.value(x);
        return std::isfinite(val) ? G(val) : val;
    };
    const Blackbox gv = [&](const Vector& x) {
        const double val = v.value(x);
        if (!std::isfinite(val)) return val;
        try {
            return harmonize_unit(c, d, val);
        } catch (const Error&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    res.tolerances = {{"G_of_u", 1e-5}, {"Gtilde_of_v", 1e-5}};
    for (const Vector& x : sample_admissible(field, opts.samples, opts.seed)) {
        track(res, "G_of_u", harmonic_residual(gu, x, opts.h));
        track(res, "Gtilde_of_v", harmonic_residual(gv, x, opts.h));
        ++res.checks;
    }
}

void isoparametric_suite(const CanonicalField& field, const SuiteOptions& opts, SuiteResult& res) {
    const int levels = std::max(2, opts.samples / 5);
    const std::vector<Vector> xs = sample_level_sets(field, levels, 5, opts.seed);
    const IsoCheck chk = isoparametric_check(analytic_probe(field), xs, IsoCheckOptions{});
    res.metrics["grad_spread"] = chk.max_grad_spread;
    res.metrics["lap_spread"] = chk.max_lap_spread;
    res.metrics["compared_bins"] = chk.compared_bins;
    res.tolerances = {{"grad_spread", IsoCheckOptions{}.tol}, {"lap_spread", IsoCheckOptions{}.tol_g}};
    res.checks = static_cast<int>(xs.size());
    if (!chk.verdict) res.note = "level sets do not carry single-valued |grad u| and Laplacian";
}

void cartan_suite(const CanonicalField& field, const SuiteOptions& opts, SuiteResult& res) {
    // Measured curvatures of the field: at most one nonzero cluster, whose
    // Cartan sum vanishes.
    const Probe v = unit_probe(field);
    res.metrics["extra_clusters"] = 0.0;
    res.metrics["field_cartan"] = 0.0;
    for (const Vector& x : sample_admissible(field, opts.samples, opts.seed)) {
        const SpectralDecomp dec = sym_eig(v.jet(x).hess, kDefaultGroupTol);
        const double rho = std::max(std::abs(dec.eigenvalues.front()), std::abs(dec.eigenvalues.back()));
        std::vector<double> kappas;
        std::vector<int> mults;
        int zero = 0;
        for (std::size_t i = 0; i < dec.size(); ++i) {
            if (std::abs(dec.kappas[i]) <= 1e-7 * (1.0 + rho)) {
                zero += dec.mults[i];
            } else {
                kappas.push_back(dec.kappas[i]);
                mults.push_back(dec.mults[i]);
            }
        }
        if (kappas.size() > 1) res.metrics["extra_clusters"] += 1.0;
        if (kappas.size() == 1) {
            kappas.insert(kappas.begin(), 0.0);
            mults.insert(mults.begin(), zero);
            track(res, "field_cartan", std::abs(cartan_sum(kappas, mults, 1)));
        }
        ++res.checks;
    }

    // Sign structure on random spectra with m >= 2 nonzero curvatures.
    std::mt19937_64 rng(opts.seed + 7);
    std::uniform_int_distribution<int> count(2, 5), mult(1, 3);
    std::uniform_real_distribution<double> value(-3.0, 3.0);
    res.metrics["sign_violations"] = 0.0;
    const int spectra = std::max(opts.samples, 1000);
    for (int s = 0; s < spectra; ++s) {
        const int m = count(rng);
        std::vector<double> kappas;
        while (static_cast<int>(kappas.size()) < m) {
            const double k = value(rng);
            bool ok = std::abs(k) >= 0.05;
            for (double other : kappas) ok = ok && std::abs(k - other) >= 0.05;
            if (ok) kappas.push_back(k);
        }
        std::sort(kappas.begin(), kappas.end());
        std::vector<int> mults;
        for (int i = 0; i < m; ++i) mults.push_back(mult(rng));
        const std::size_t i = smallest_nonzero(kappas);
        bool ok = cartan_sum(kappas, mults, i) != 0.0;
        for (double term : cartan_terms(kappas, i)) ok = ok && term < 0.0;
        if (!ok) res.metrics["sign_violations"] += 1.0;
    }
    res.metrics["random_spectra"] = spectra;
    res.tolerances = {{"extra_clusters", 0.0}, {"field_cartan", 1e-12}, {"sign_violations", 0.0}};
}

}  // namespace

SuiteResult run_suite(const CanonicalField& field, Suite suite, const SuiteOptions& opts) {
    if (opts.samples < 1) throw Error(ErrorCode::InvalidArgument, "suite needs at least one sample");
    SuiteResult res;
    res.suite = suite;
    switch (suite) {
        case Suite::Flow: flow_suite(field, opts, res); break;
        case Suite::HessianEvolution: hessian_suite(field, opts, res); break;
        case Suite::Harmonic: harmonic_suite(field, opts, res); break;
        case Suite::Isoparametric: isoparametric_suite(field, opts, res); break;
        case Suite::Cartan: cartan_suite(field, opts, res); break;
    }
    res.passed = within(res) && (suite != Suite::Isoparametric || res.metrics["compared_bins"] > 0);
    return res;
}

}  // namespace isopara
