#include "isopara/classify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "isopara/error.hpp"

namespace isopara {

namespace {

struct FlowNode {
    double tau;
    Vector x;
    double t, f, df;
};

bool is_domain_error(ErrorCode c) {
    return c == ErrorCode::OutOfDomain || c == ErrorCode::OutOfRange || c == ErrorCode::AxisTooClose ||
           c == ErrorCode::DomainExit;
}

class StatAccumulator {
public:
    void add(double v) {
        v = std::abs(v);
        max_ = std::max(max_, v);
        sum_sq_ += v * v;
        ++count_;
    }
    ResidualStats stats() const { return {max_, count_ ? std::sqrt(sum_sq_ / count_) : 0.0}; }

private:
    double max_ = 0.0;
    double sum_sq_ = 0.0;
    long count_ = 0;
};

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(6);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    return os.str();
}

}  // namespace

std::string to_string(CaseKind kind) {
    switch (kind) {
        case CaseKind::Plane: return "Plane";
        case CaseKind::Cylinder: return "Cylinder";
        case CaseKind::Reject: return "Reject";
    }
    return "Reject";
}

ProfileEstimate estimate_profile(const Probe& u, const Vector& x0, double span, int steps,
                                 const EstimateOptions& opts) {
    if (!(span > 0.0) || steps < 2) throw Error(ErrorCode::InvalidArgument, "estimate_profile needs span > 0, steps >= 2");
    const double dt = span / steps;

    // Returns false (or throws, when not truncating) if x leaves the domain.
    auto sample = [&](double tau, const Vector& x, FlowNode& node) -> bool {
        Jet j;
        try {
            j = u.jet(x);
        } catch (const Error& e) {
            if (!is_domain_error(e.code())) throw;
            if (opts.truncate) return false;
            throw Error(ErrorCode::DomainExit, std::string("gradient flow left the domain: ") + e.what());
        }
        const double g = j.grad.norm();
        if (!std::isfinite(j.u) || !j.grad.allFinite()) {
            if (opts.truncate) return false;
            throw Error(ErrorCode::DomainExit, "gradient flow left the domain");
        }
        if (!(g > opts.eps_grad)) {
            if (opts.truncate) return false;
            throw Error(ErrorCode::CriticalPoint, "gradient flow reached a critical point");
        }
        const Vector n = j.grad / g;
        node = {tau, x, j.u, g, n.dot(j.hess.matrix() * n) / g};
        return true;
    };
    auto gradient = [&](const Vector& x, Vector& out) -> bool {
        try {
            out = u.jet(x).grad;
        } catch (const Error& e) {
            if (!is_domain_error(e.code())) throw;
            if (opts.truncate) return false;
            throw Error(ErrorCode::DomainExit, std::string("gradient flow left the domain: ") + e.what());
        }
        if (!out.allFinite()) {
            if (opts.truncate) return false;
            throw Error(ErrorCode::DomainExit, "gradient flow left the domain");
        }
        return true;
    };

    FlowNode start;
    {
        const Jet j = u.jet(x0);
        if (!(j.grad.norm() > opts.eps_grad)) throw Error(ErrorCode::CriticalPoint, "critical point at x0");
        sample(0.0, x0, start);
    }

    auto integrate = [&](double dir, int max_steps) {
        std::vector<FlowNode> nodes;
        Vector x = x0;
        Vector k1, k2, k3, k4;
        double tau = 0.0;
        double f = start.f;
        double df = start.df;
        for (int s = 1; s <= max_steps; ++s) {
            // dt/dtau = f^2. Keep the t-spacing at most its value at x0 and at
            // most 1% of the scale f/|f'| on which f varies.
            double dt_max = start.f * start.f * dt;
            if (df != 0.0) dt_max = std::min(dt_max, 0.01 * f / std::abs(df));
            const double h = opts.adaptive ? dir * std::min(dt, dt_max / (f * f)) : dir * dt;
            if (!gradient(x, k1) || !gradient(x + 0.5 * h * k1, k2) || !gradient(x + 0.5 * h * k2, k3) ||
                !gradient(x + h * k3, k4))
                break;
            x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            tau += h;
            FlowNode node;
            if (!sample(tau, x, node)) break;
            nodes.push_back(node);
            f = node.f;
            df = node.df;
            if (opts.max_reach > 0.0 && (x - x0).norm() > opts.max_reach) break;
        }
        return nodes;
    };

    const std::vector<FlowNode> forward = integrate(1.0, steps);
    const std::vector<FlowNode> backward = integrate(-1.0, opts.bidirectional ? steps : 1);
    if (forward.empty() || backward.empty())
        throw Error(ErrorCode::DomainExit, "gradient flow could not leave x0 in both directions");

    std::vector<FlowNode> all(backward.rbegin(), backward.rend());
    all.push_back(start);
    all.insert(all.end(), forward.begin(), forward.end());

    ProfileEstimate est;
    double h_law = 0.0;
    for (std::size_t i = 2; i + 2 < all.size(); ++i) {
        double dh = 0.0;
        for (std::size_t jj = 0; jj < 5; ++jj) {
            // Derivative at tau_i of the Lagrange basis polynomial through five nodes.
            const std::size_t j = i - 2 + jj;
            double w = 0.0;
            if (j == i) {
                for (std::size_t k = i - 2; k <= i + 2; ++k)
                    if (k != i) w += 1.0 / (all[i].tau - all[k].tau);
            } else {
                w = 1.0 / (all[j].tau - all[i].tau);
                for (std::size_t k = i - 2; k <= i + 2; ++k)
                    if (k != i && k != j) w *= (all[i].tau - all[k].tau) / (all[j].tau - all[k].tau);
            }
            dh += w * all[j].t;
        }
        const double f2 = all[i].f * all[i].f;
        h_law = std::max(h_law, std::abs(dh - f2) / std::max(1.0, f2));
    }
    est.h_law_residual = h_law;
    for (const FlowNode& node : all) {
        if (!est.t.empty() && !(node.t > est.t.back())) continue;
        est.tau.push_back(node.tau);
        est.path.push_back(node.x);
        est.t.push_back(node.t);
        est.f.push_back(node.f);
        est.df.push_back(node.df);
    }
    if (est.t.size() < 3 || !(est.t.front() < start.t && start.t < est.t.back()))
        throw Error(ErrorCode::DomainExit, "gradient flow did not bracket u(x0)");
    est.profile = Profile::tabulated(est.t, est.f, Interval{est.t.front(), est.t.back()}, start.t, est.df);
    return est;
}

namespace {

ClassificationReport classify_impl(const Probe& u, const Vector& x0, const ClassifyOptions& opts, bool allow_negate) {
    ClassificationReport rep;
    const double widen = (u.mode == JetMode::FiniteDifference) ? opts.fd_widen : 1.0;
    rep.probe = x0;
    rep.mode = u.mode;
    rep.h = (u.mode == JetMode::FiniteDifference) ? (u.h > 0.0 ? u.h : default_step(x0)) : 0.0;
    rep.group_tol = opts.group_tol * widen;
    rep.tol_zero = opts.tol_zero * widen;
    rep.eps_grad = opts.eps_grad;
    rep.eps_axis = opts.eps_axis * std::max(1.0, x0.norm());
    if (u.mode == JetMode::FiniteDifference) rep.eps_axis = std::max(rep.eps_axis, 10.0 * rep.h);

    const Jet j = u.jet(x0);
    const Operators ops = operators(j, opts.eps_grad);
    const SpectralDecomp dec = sym_eig(ops.hess_v, rep.group_tol);
    rep.onelap = ops.onelap;
    rep.eigenvalues = dec.eigenvalues;
    for (std::size_t i = 1; i < dec.eigenvalues.size(); ++i)
        rep.gaps.push_back(dec.eigenvalues[i] - dec.eigenvalues[i - 1]);

    const double threshold = dec.merge_threshold();
    for (double g : rep.gaps) {
        if (g > threshold && g < 10.0 * threshold)
            throw Error(ErrorCode::GroupingAmbiguous, "eigenvalue gap near the grouping tolerance; gaps: " + join(rep.gaps));
    }
    const double radius = std::max(std::abs(dec.eigenvalues.front()), std::abs(dec.eigenvalues.back()));
    const double zero_thr = rep.tol_zero * (1.0 + radius);

    int zero_mult = 0;
    std::vector<double> nonzero;
    std::vector<int> nonzero_mult;
    std::vector<std::size_t> nonzero_idx;
    for (std::size_t i = 0; i < dec.size(); ++i) {
        const double a = std::abs(dec.kappas[i]);
        if (a <= zero_thr) {
            zero_mult += dec.mults[i];
        } else if (a < 10.0 * zero_thr) {
            throw Error(ErrorCode::GroupingAmbiguous,
                        "eigenvalue near the zero threshold; spectrum: " + join(dec.eigenvalues));
        } else {
            nonzero.push_back(dec.kappas[i]);
            nonzero_mult.push_back(dec.mults[i]);
            nonzero_idx.push_back(i);
        }
    }
    const std::size_t m = nonzero.size();

    if (allow_negate) {
        // Planes have no curvature sign; orient by the first clearly nonzero
        // component of the normal, a choice that flips with u.
        const double floor = 0.5 / std::sqrt(static_cast<double>(ops.normal.size()));
        int lead = 0;
        while (std::abs(ops.normal(lead)) < floor) ++lead;
        const bool down = ops.normal(lead) < 0.0;
        const bool negate = (m == 0 || ops.onelap == 0.0) ? down : ops.onelap < 0.0;
        if (negate) {
            ClassificationReport flipped = classify_impl(negated(u), x0, opts, false);
            flipped.negated = true;
            return flipped;
        }
    }

    if (zero_mult > 0) rep.kappas.push_back(0.0), rep.mults.push_back(zero_mult);
    rep.kappas.insert(rep.kappas.end(), nonzero.begin(), nonzero.end());
    rep.mults.insert(rep.mults.end(), nonzero_mult.begin(), nonzero_mult.end());
    rep.normal_residual = (ops.hess_v.matrix() * ops.normal).norm();

    if (rep.normal_residual > zero_thr) {
        rep.kind = CaseKind::Reject;
        rep.reason = "GradientNotPrincipal";
        return rep;
    }
    if (m >= 2) {
        rep.kind = CaseKind::Reject;
        rep.reason = "MultipleCurvatures";
        const std::size_t offset = zero_mult > 0 ? 1 : 0;
        for (std::size_t i = 0; i < m; ++i) rep.cartan.push_back(cartan_sum(rep.kappas, rep.mults, i + offset));
        return rep;
    }

    if (m == 0) {
        rep.kind = CaseKind::Plane;
        rep.k = 1;
        rep.q = ops.normal;
    } else {
        const double c1 = nonzero[0];
        if (!(c1 > 0.0)) {
            rep.kind = CaseKind::Reject;
            rep.reason = "NonPositiveCurvature";
            return rep;
        }
        if (!(1.0 / c1 > rep.eps_axis)) {
            rep.kind = CaseKind::Reject;
            rep.reason = "AxisTooClose";
            return rep;
        }
        rep.kind = CaseKind::Cylinder;
        rep.c1 = c1;
        rep.k = nonzero_mult[0] + 1;
        rep.C1 = (rep.k - 1) * c1;
        const Matrix r0 = dec.projections[nonzero_idx[0]].matrix() + ops.normal * ops.normal.transpose();
        rep.R0 = 0.5 * (r0 + r0.transpose());
        rep.x_star = x0 - ops.normal / c1;
    }

    if (opts.residuals) {
        const double reach = (rep.kind == CaseKind::Plane) ? 1.0 : std::min(1.0, 0.25 / rep.c1);
        try {
            EstimateOptions eo;
            eo.max_reach = reach;
            eo.truncate = true;
            eo.eps_grad = opts.eps_grad;
            const ProfileEstimate est =
                estimate_profile(u, x0, 2.0 * reach / ops.gradnorm, opts.profile_steps, eo);
            rep.profile = est.profile;

            const double lo = est.t.front();
            const double hi = est.t.back();
            const double margin = 1e-3 * (hi - lo);
            std::mt19937_64 rng(opts.seed);
            std::normal_distribution<double> normal(0.0, 1.0);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            std::vector<Vector> samples;
            for (int attempt = 0; attempt < 50 * opts.residual_samples &&
                                  static_cast<int>(samples.size()) < opts.residual_samples;
                 ++attempt) {
                Vector dir(x0.size());
                for (int i = 0; i < dir.size(); ++i) dir(i) = normal(rng);
                const Vector x = x0 + 0.5 * reach * unif(rng) * dir / dir.norm();
                const double val = u.value(x);
                if (std::isfinite(val) && val > lo + margin && val < hi - margin) samples.push_back(x);
            }
            rep.residuals = verify_reconstruction(rep, u, samples);
        } catch (const Error& e) {
            rep.residual_note = e.what();
        }
    }
    return rep;
}

}  // namespace

ClassificationReport classify(const Probe& u, const Vector& x0, const ClassifyOptions& opts) {
    if (x0.size() != u.n) throw Error(ErrorCode::InvalidArgument, "probe point has the wrong dimension");
    return classify_impl(u, x0, opts, true);
}

ClassificationReport classify(const Probe& u, const Vector& x0, double tol) {
    ClassifyOptions opts;
    opts.group_tol = tol;
    opts.tol_zero = 0.1 * tol;
    return classify(u, x0, opts);
}

ReconstructionResiduals verify_reconstruction(const ClassificationReport& rep, const Probe& u,
                                              const std::vector<Vector>& samples) {
    if (rep.kind == CaseKind::Reject) throw Error(ErrorCode::InvalidArgument, "cannot reconstruct a rejected field");
    if (!rep.profile) throw Error(ErrorCode::InvalidArgument, "report carries no estimated profile");
    const Probe w = rep.negated ? negated(u) : u;
    const Profile& prof = *rep.profile;
    const TransformParams params =
        rep.kind == CaseKind::Plane ? TransformParams::plane() : TransformParams::cylinder(rep.k, rep.C1);

    StatAccumulator recon, semi, grad, lap;
    for (const Vector& x : samples) {
        const Jet j = w.jet(x);
        if (!prof.interval().contains(j.u))
            throw Error(ErrorCode::ProfileRangeExceeded, "u = " + std::to_string(j.u) + " outside the estimated profile");
        double uhat = 0.0;
        double semiexp = 0.0;
        try {
            const double v = prof.F(j.u);
            if (rep.kind == CaseKind::Plane) {
                const double s = rep.q.dot(x - rep.probe);
                uhat = inverse_map(prof, params, s);
                semiexp = v - s;
            } else {
                const double r = (rep.R0 * (x - rep.x_star)).norm();
                uhat = inverse_map(prof, params, r);
                semiexp = std::abs(v + params.offset()) - r;
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::OutOfRange && e.code() != ErrorCode::OutOfDomain) throw;
            throw Error(ErrorCode::ProfileRangeExceeded, std::string("sample outside the estimated profile: ") + e.what());
        }
        recon.add(j.u - uhat);
        semi.add(semiexp);
        grad.add(j.grad.norm() - prof.f(j.u));
        lap.add(j.hess.trace() - synth_g(prof, params, j.u));
    }
    ReconstructionResiduals res;
    res.samples = static_cast<int>(samples.size());
    res.reconstruction = recon.stats();
    res.semiexp = semi.stats();
    res.gradnorm = grad.stats();
    res.laplacian = lap.stats();
    return res;
}

IsoCheck isoparametric_check(const Probe& u, const std::vector<Vector>& samples, const IsoCheckOptions& opts) {
    if (samples.size() < 2) throw Error(ErrorCode::InvalidArgument, "isoparametric_check needs >= 2 samples");
    struct Row {
        double u, g, lap;
    };
    std::vector<Row> rows;
    rows.reserve(samples.size());
    for (const Vector& x : samples) {
        const Jet j = u.jet(x);
        const double g = j.grad.norm();
        if (!(g > opts.eps_grad)) throw Error(ErrorCode::CriticalPoint, "critical sample point");
        rows.push_back({j.u, g, j.hess.trace()});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.u < b.u; });

    IsoCheck out;
    std::size_t begin = 0;
    while (begin < rows.size()) {
        std::size_t end = begin + 1;
        while (end < rows.size() && rows[end].u - rows[begin].u <= opts.tol_u) ++end;
        IsoBin bin;
        bin.u_lo = rows[begin].u;
        bin.u_hi = rows[end - 1].u;
        bin.count = static_cast<int>(end - begin);
        double gmin = rows[begin].g, gmax = gmin, lmin = rows[begin].lap, lmax = lmin;
        for (std::size_t i = begin; i < end; ++i) {
            gmin = std::min(gmin, rows[i].g);
            gmax = std::max(gmax, rows[i].g);
            lmin = std::min(lmin, rows[i].lap);
            lmax = std::max(lmax, rows[i].lap);
        }
        bin.grad_spread = gmax - gmin;
        bin.lap_spread = lmax - lmin;
        if (bin.count >= 2) ++out.compared_bins;
        out.max_grad_spread = std::max(out.max_grad_spread, bin.grad_spread);
        out.max_lap_spread = std::max(out.max_lap_spread, bin.lap_spread);
        out.bins.push_back(bin);
        begin = end;
    }
    out.grad_ok = out.max_grad_spread <= opts.tol;
    out.lap_ok = out.max_lap_spread <= opts.tol_g;
    out.verdict = out.grad_ok && out.lap_ok && out.compared_bins > 0;
    return out;
}

}  // namespace isopara
