#include "isopara/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "isopara/error.hpp"

namespace isopara {

namespace {

struct SimpsonState {
    const ScalarFn& f;
    long budget;
};

double simpson_step(SimpsonState& st, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = st.f(lm);
    const double frm = st.f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (--st.budget < 0) throw Error(ErrorCode::NoConvergence, "adaptive Simpson exceeded subdivision cap");
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol || m <= a || b <= m) {
        return left + right + delta / 15.0;
    }
    return simpson_step(st, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(st, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const ScalarFn& f, double a, double b, const SimpsonOptions& opts) {
    if (a == b) return 0.0;
    if (b < a) return -adaptive_simpson(f, b, a, opts);
    SimpsonState st{f, opts.max_subdivisions};
    // A few coarse panels first so narrow features are not missed by the first estimate.
    constexpr int kPanels = 8;
    const double h = (b - a) / kPanels;
    double total = 0.0;
    for (int i = 0; i < kPanels; ++i) {
        const double lo = a + i * h;
        const double hi = (i + 1 == kPanels) ? b : a + (i + 1) * h;
        const double flo = f(lo);
        const double fhi = f(hi);
        const double fmid = f(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += simpson_step(st, lo, hi, flo, fmid, fhi, whole, opts.abs_tol / kPanels, 60);
    }
    return total;
}

GaussLegendre::GaussLegendre(int order, int panels) : panels_(panels) {
    if (order < 1 || panels < 1) throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre needs order, panels >= 1");
    nodes_.resize(order);
    weights_.resize(order);
    for (int i = 0; i < order; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes_[i] = x;
        weights_[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

double GaussLegendre::integrate(const ScalarFn& f, double a, double b) const {
    const double h = (b - a) / panels_;
    double total = 0.0;
    for (int p = 0; p < panels_; ++p) {
        const double mid = a + (p + 0.5) * h;
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) acc += weights_[i] * f(mid + 0.5 * h * nodes_[i]);
        total += 0.5 * h * acc;
    }
    return total;
}

}  // namespace isopara
