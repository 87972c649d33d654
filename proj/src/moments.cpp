#include "isopara/moments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isopara/error.hpp"

namespace isopara {

namespace {

double max_abs(const std::vector<double>& v) {
    double r = 0.0;
    for (double x : v) r = std::max(r, std::abs(x));
    return r;
}

double min_gap(const std::vector<double>& y) {
    std::vector<double> s = y;
    std::sort(s.begin(), s.end());
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < s.size(); ++i) gap = std::min(gap, s[i] - s[i - 1]);
    return gap;
}

std::vector<double> residual(const MomentSystem& sys, const std::vector<double>& y) {
    std::vector<double> r = power_sums(y, sys.d, sys.m());
    for (int k = 0; k < sys.m(); ++k) r[k] -= sys.C[k];
    return r;
}

}  // namespace

void MomentSystem::validate() const {
    if (C.empty()) throw Error(ErrorCode::InvalidArgument, "moment system needs m >= 1");
    if (d.size() != C.size()) throw Error(ErrorCode::InvalidArgument, "need one multiplicity per moment");
    for (int di : d)
        if (di < 1) throw Error(ErrorCode::InvalidArgument, "multiplicities must be >= 1");
    for (double c : C)
        if (!std::isfinite(c)) throw Error(ErrorCode::NonFinite, "moments must be finite");
}

std::vector<double> power_sums(const std::vector<double>& kappas, const std::vector<int>& d, int m) {
    if (kappas.size() != d.size()) throw Error(ErrorCode::InvalidArgument, "power_sums: length mismatch");
    if (m < 1) throw Error(ErrorCode::InvalidArgument, "power_sums: m must be >= 1");
    std::vector<double> c(m, 0.0);
    for (std::size_t i = 0; i < kappas.size(); ++i) {
        double p = 1.0;
        for (int k = 0; k < m; ++k) {
            p *= kappas[i];
            c[k] += d[i] * p;
        }
    }
    return c;
}

VandermondeJacobian vandermonde_jacobian(const std::vector<double>& y, const std::vector<int>& d) {
    if (y.size() != d.size()) throw Error(ErrorCode::InvalidArgument, "vandermonde_jacobian: length mismatch");
    const int m = static_cast<int>(y.size());
    Matrix jac(m, m);
    for (int j = 0; j < m; ++j) {
        double p = 1.0;  // y_j^(k-1)
        for (int k = 1; k <= m; ++k) {
            jac(k - 1, j) = k * d[j] * p;
            p *= y[j];
        }
    }
    double det = 1.0;
    for (int k = 2; k <= m; ++k) det *= k;
    for (int di : d) det *= di;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) det *= (y[j] - y[i]);
    return {jac, det};
}

std::vector<double> invert_moments(const MomentSystem& sys, const std::vector<double>& y0, double tol,
                                   const InvertOptions& opts) {
    sys.validate();
    if (static_cast<int>(y0.size()) != sys.m())
        throw Error(ErrorCode::InvalidArgument, "initial guess must have m entries");
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
    if (min_gap(y0) < opts.collision_gap)
        throw Error(ErrorCode::SingularJacobian, "initial guess has coinciding entries");

    const double target = tol * std::max(1.0, max_abs(sys.C));
    std::vector<double> y = y0;
    std::vector<double> r = residual(sys, y);
    double rnorm = max_abs(r);

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        if (rnorm <= target) {
            // A few undamped polishing steps while the residual keeps falling.
            for (int p = 0; p < 3 && rnorm > 0.0; ++p) {
                const VandermondeJacobian pj = vandermonde_jacobian(y, sys.d);
                const Vector pstep = pj.jacobian.partialPivLu().solve(Eigen::Map<const Vector>(r.data(), sys.m()));
                std::vector<double> trial(y.size());
                for (std::size_t i = 0; i < y.size(); ++i) trial[i] = y[i] - pstep(i);
                const std::vector<double> rt = residual(sys, trial);
                if (!pstep.allFinite() || !(max_abs(rt) < rnorm)) break;
                y = trial;
                r = rt;
                rnorm = max_abs(rt);
            }
            std::sort(y.begin(), y.end());
            return y;
        }
        const VandermondeJacobian vj = vandermonde_jacobian(y, sys.d);
        Vector rhs = Eigen::Map<const Vector>(r.data(), sys.m());
        const Vector step = vj.jacobian.partialPivLu().solve(rhs);
        if (!step.allFinite()) throw Error(ErrorCode::SingularJacobian, "Newton step is not finite");

        double lambda = 1.0;
        std::vector<double> trial(y.size());
        std::vector<double> rt;
        double tnorm = 0.0;
        for (int halvings = 0; halvings < 30; ++halvings) {
            for (std::size_t i = 0; i < y.size(); ++i) trial[i] = y[i] - lambda * step(i);
            rt = residual(sys, trial);
            tnorm = max_abs(rt);
            if (tnorm <= rnorm) break;
            lambda *= 0.5;
        }
        if (min_gap(trial) < opts.collision_gap)
            throw Error(ErrorCode::SingularJacobian,
                        "iterates collided at iteration " + std::to_string(iter));
        y = trial;
        r = rt;
        rnorm = tnorm;
    }
    if (rnorm <= target) {
        std::sort(y.begin(), y.end());
        return y;
    }
    throw Error(ErrorCode::NoConvergence, "moment inversion did not converge in " +
                                              std::to_string(opts.max_iter) + " iterations, residual " +
                                              std::to_string(rnorm));
}

std::vector<double> heuristic_guess(const MomentSystem& sys) {
    sys.validate();
    const int m = sys.m();
    double total = 0.0;
    for (int di : sys.d) total += di;
    const double mean = sys.C[0] / total;
    double spread = 1.0;
    if (m >= 2) {
        const double var = sys.C[1] / total - mean * mean;
        if (var > 0.0) spread = std::sqrt(var);
    }
    std::vector<double> y(m);
    for (int i = 0; i < m; ++i) y[i] = mean + spread * (i - 0.5 * (m - 1));
    return y;
}

}  // namespace isopara
