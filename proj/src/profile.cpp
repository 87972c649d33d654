#include "isopara/profile.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "isopara/error.hpp"

namespace isopara {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const GaussLegendre& cell_rule() {
    static const GaussLegendre rule(16, 1);
    return rule;
}

std::string fmt(double x) { return std::to_string(x); }

std::vector<double> pchip_slopes(const std::vector<double>& t, const std::vector<double>& f) {
    const std::size_t n = t.size();
    std::vector<double> h(n - 1), delta(n - 1), m(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = t[k + 1] - t[k];
        delta[k] = (f[k + 1] - f[k]) / h[k];
    }
    if (n == 2) {
        m[0] = m[1] = delta[0];
        return m;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (delta[k - 1] * delta[k] <= 0.0) continue;
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    auto endpoint = [](double h0, double h1, double d0, double d1) {
        double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (std::signbit(s) != std::signbit(d0) || d0 == 0.0) return 0.0;
        if (std::signbit(d0) != std::signbit(d1) && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return s;
    };
    m[0] = endpoint(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return m;
}

}  // namespace

Profile Profile::constant(double a, Interval iv, double c0) {
    Profile p;
    p.family_ = ProfileFamily::Constant;
    p.a_ = a;
    p.interval_ = iv;
    p.c0_ = c0;
    p.validate();
    return p;
}

Profile Profile::affine(double a, double b, Interval iv, double c0) {
    Profile p;
    p.family_ = ProfileFamily::Affine;
    p.a_ = a;
    p.b_ = b;
    p.interval_ = iv;
    p.c0_ = c0;
    p.validate();
    return p;
}

Profile Profile::power(double a, double exponent, Interval iv, double c0) {
    Profile p;
    p.family_ = ProfileFamily::Power;
    p.a_ = a;
    p.b_ = exponent;
    p.interval_ = iv;
    p.c0_ = c0;
    p.validate();
    return p;
}

Profile Profile::tabulated(std::vector<double> t, std::vector<double> f, Interval iv, double c0,
                           std::optional<std::vector<double>> slopes) {
    Profile p;
    p.family_ = ProfileFamily::Tabulated;
    p.t_ = std::move(t);
    p.fv_ = std::move(f);
    p.interval_ = iv;
    p.c0_ = c0;
    if (p.t_.size() < 2 || p.t_.size() != p.fv_.size())
        throw Error(ErrorCode::InvalidSpec, "tabulated profile needs >= 2 matching (t, f) nodes");
    for (std::size_t i = 0; i < p.t_.size(); ++i) {
        if (!std::isfinite(p.t_[i]) || !std::isfinite(p.fv_[i]))
            throw Error(ErrorCode::NonFinite, "tabulated profile nodes must be finite");
        if (i > 0 && !(p.t_[i] > p.t_[i - 1]))
            throw Error(ErrorCode::InvalidSpec, "tabulated nodes must be strictly increasing");
    }
    if (slopes) {
        if (slopes->size() != p.t_.size())
            throw Error(ErrorCode::InvalidSpec, "need one slope per tabulated node");
        p.m_ = std::move(*slopes);
        p.slopes_supplied_ = true;
    } else {
        p.m_ = pchip_slopes(p.t_, p.fv_);
    }
    p.validate();
    p.build_table();
    return p;
}

void Profile::validate() {
    const double lo = interval_.lo;
    const double hi = interval_.hi;
    if (std::isnan(lo) || std::isnan(hi) || !(lo < hi))
        throw Error(ErrorCode::InvalidSpec, "profile interval must satisfy lo < hi");
    if (!std::isfinite(c0_) || !interval_.contains(c0_))
        throw Error(ErrorCode::InvalidSpec, "C0 must lie strictly inside the interval");
    switch (family_) {
        case ProfileFamily::Constant:
            if (!(a_ > 0.0) || !std::isfinite(a_)) throw Error(ErrorCode::InvalidSpec, "constant profile needs a > 0");
            break;
        case ProfileFamily::Affine: {
            if (!std::isfinite(a_) || !std::isfinite(b_)) throw Error(ErrorCode::InvalidSpec, "affine parameters must be finite");
            // Open endpoints may sit on the root a + b t = 0 up to rounding.
            const double slack = 1e-12 * std::abs(a_);
            const bool lo_ok = std::isinf(lo) ? b_ <= 0.0 : a_ + b_ * lo >= -slack;
            const bool hi_ok = std::isinf(hi) ? b_ >= 0.0 : a_ + b_ * hi >= -slack;
            if (!lo_ok || !hi_ok || !(a_ + b_ * c0_ > 0.0))
                throw Error(ErrorCode::InvalidSpec, "affine profile a + b t must stay positive on the interval");
            break;
        }
        case ProfileFamily::Power:
            if (!(a_ > 0.0) || !std::isfinite(a_) || !std::isfinite(b_))
                throw Error(ErrorCode::InvalidSpec, "power profile needs a > 0 and finite p");
            if (lo < 0.0) throw Error(ErrorCode::InvalidSpec, "power profile interval must lie in (0, inf)");
            break;
        case ProfileFamily::Tabulated: {
            if (lo < t_.front() || hi > t_.back())
                throw Error(ErrorCode::InvalidSpec, "interval must lie within the tabulated nodes");
            for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
                for (int j = 0; j <= 16; ++j) {
                    const double t = t_[i] + (t_[i + 1] - t_[i]) * j / 16.0;
                    const double h = t_[i + 1] - t_[i];
                    const double s = (t - t_[i]) / h;
                    const double v = (1 + 2 * s) * (1 - s) * (1 - s) * fv_[i] + s * (1 - s) * (1 - s) * h * m_[i] +
                                     s * s * (3 - 2 * s) * fv_[i + 1] + s * s * (s - 1) * h * m_[i + 1];
                    if (!(v > 0.0)) throw Error(ErrorCode::InvalidSpec, "tabulated f must stay positive");
                }
            }
            break;
        }
    }
}

void Profile::build_table() {
    cum_.assign(t_.size(), 0.0);
    SimpsonOptions opts;
    opts.abs_tol = 1e-14;
    for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
        const double lo = t_[i];
        const double hi = t_[i + 1];
        cum_[i + 1] = cum_[i] + adaptive_simpson([&](double s) { return 1.0 / f(std::clamp(s, lo, hi)); }, lo, hi, opts);
    }
    cum_c0_ = cumulative(c0_);
}

Profile Profile::rebased(double c0) const {
    Profile p = *this;
    p.c0_ = c0;
    if (!std::isfinite(c0) || !interval_.contains(c0))
        throw Error(ErrorCode::InvalidSpec, "C0 must lie strictly inside the interval");
    if (family_ == ProfileFamily::Tabulated) p.cum_c0_ = p.cumulative(c0);
    return p;
}

void Profile::require_in(double t) const {
    if (!(interval_.lo < t && t < interval_.hi))
        throw Error(ErrorCode::OutOfDomain, "t = " + fmt(t) + " outside the profile interval");
}

std::size_t Profile::cell(double t) const {
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = (it == t_.begin()) ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    return std::min(i, t_.size() - 2);
}

double Profile::f(double t) const {
    if (family_ != ProfileFamily::Tabulated) require_in(t);
    switch (family_) {
        case ProfileFamily::Constant: return a_;
        case ProfileFamily::Affine: return a_ + b_ * t;
        case ProfileFamily::Power: return a_ * std::pow(t, b_);
        case ProfileFamily::Tabulated: {
            if (!(t >= t_.front() && t <= t_.back()))
                throw Error(ErrorCode::OutOfDomain, "t = " + fmt(t) + " outside the tabulated range");
            const std::size_t i = cell(t);
            const double h = t_[i + 1] - t_[i];
            const double s = (t - t_[i]) / h;
            return (1 + 2 * s) * (1 - s) * (1 - s) * fv_[i] + s * (1 - s) * (1 - s) * h * m_[i] +
                   s * s * (3 - 2 * s) * fv_[i + 1] + s * s * (s - 1) * h * m_[i + 1];
        }
    }
    return 0.0;
}

double Profile::df(double t) const {
    if (family_ != ProfileFamily::Tabulated) require_in(t);
    switch (family_) {
        case ProfileFamily::Constant: return 0.0;
        case ProfileFamily::Affine: return b_;
        case ProfileFamily::Power: return a_ * b_ * std::pow(t, b_ - 1.0);
        case ProfileFamily::Tabulated: {
            if (!(t >= t_.front() && t <= t_.back()))
                throw Error(ErrorCode::OutOfDomain, "t = " + fmt(t) + " outside the tabulated range");
            const std::size_t i = cell(t);
            const double h = t_[i + 1] - t_[i];
            const double s = (t - t_[i]) / h;
            return ((6 * s * s - 6 * s) * fv_[i] + (-6 * s * s + 6 * s) * fv_[i + 1]) / h +
                   (3 * s * s - 4 * s + 1) * m_[i] + (3 * s * s - 2 * s) * m_[i + 1];
        }
    }
    return 0.0;
}

double Profile::cumulative(double t) const {
    const std::size_t i = cell(t);
    const double lo = t_[i];
    const double hi = t_[i + 1];
    return cum_[i] + cell_rule().integrate([&](double s) { return 1.0 / f(std::clamp(s, lo, hi)); }, lo, t);
}

double Profile::F(double t) const {
    require_in(t);
    switch (family_) {
        case ProfileFamily::Constant: return (t - c0_) / a_;
        case ProfileFamily::Affine:
            if (b_ == 0.0) return (t - c0_) / a_;
            return std::log1p(b_ * (t - c0_) / (a_ + b_ * c0_)) / b_;
        case ProfileFamily::Power:
            if (b_ == 1.0) return std::log(t / c0_) / a_;
            return (std::pow(t, 1.0 - b_) - std::pow(c0_, 1.0 - b_)) / (a_ * (1.0 - b_));
        case ProfileFamily::Tabulated: return cumulative(t) - cum_c0_;
    }
    return 0.0;
}

std::pair<double, double> Profile::F_range() const {
    auto at = [&](double t, bool upper) -> double {
        const double sign = upper ? kInf : -kInf;
        switch (family_) {
            case ProfileFamily::Constant: return std::isinf(t) ? sign : (t - c0_) / a_;
            case ProfileFamily::Affine: {
                if (b_ == 0.0) return std::isinf(t) ? sign : (t - c0_) / a_;
                if (std::isinf(t)) return sign;
                const double arg = b_ * (t - c0_) / (a_ + b_ * c0_);
                if (arg <= -1.0) return sign;  // f vanishes at this endpoint
                return std::log1p(arg) / b_;
            }
            case ProfileFamily::Power: {
                if (t == 0.0 && b_ >= 1.0) return -kInf;
                if (std::isinf(t) && b_ <= 1.0) return kInf;
                if (b_ == 1.0) return std::log(t / c0_) / a_;
                return (std::pow(t, 1.0 - b_) - std::pow(c0_, 1.0 - b_)) / (a_ * (1.0 - b_));
            }
            case ProfileFamily::Tabulated: return cumulative(t) - cum_c0_;
        }
        return sign;
    };
    return {at(interval_.lo, false), at(interval_.hi, true)};
}

double Profile::U(double s) const {
    const auto [smin, smax] = F_range();
    if (!(smin < s && s < smax))
        throw Error(ErrorCode::OutOfRange, "s = " + fmt(s) + " outside the range of F");
    double t = 0.0;
    switch (family_) {
        case ProfileFamily::Constant: t = c0_ + a_ * s; break;
        case ProfileFamily::Affine:
            t = (b_ == 0.0) ? c0_ + a_ * s : c0_ + (a_ + b_ * c0_) * std::expm1(b_ * s) / b_;
            break;
        case ProfileFamily::Power:
            if (b_ == 1.0) {
                t = c0_ * std::exp(a_ * s);
            } else {
                const double base = std::pow(c0_, 1.0 - b_) + a_ * (1.0 - b_) * s;
                if (!(base > 0.0)) throw Error(ErrorCode::OutOfRange, "s outside the range of F");
                t = std::pow(base, 1.0 / (1.0 - b_));
            }
            break;
        case ProfileFamily::Tabulated: {
            const double target = s + cum_c0_;
            auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
            std::size_t i = (it == cum_.begin()) ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
            i = std::min(i, t_.size() - 2);
            double lo = std::max(t_[i], interval_.lo);
            double hi = std::min(t_[i + 1], interval_.hi);
            t = 0.5 * (lo + hi);
            for (int iter = 0; iter < 100; ++iter) {
                const double r = cumulative(t) - target;
                if (r > 0.0) hi = t; else lo = t;
                double next = t - r * f(t);
                if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
                if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) {
                    t = next;
                    break;
                }
                t = next;
            }
            return t;
        }
    }
    // Clamp rounding excursions past an endpoint back inside.
    return std::clamp(t, std::nextafter(interval_.lo, kInf), std::nextafter(interval_.hi, -kInf));
}

TransformParams TransformParams::cylinder(int k, double c1) {
    TransformParams p;
    p.k = k;
    p.C1 = c1;
    p.validate();
    return p;
}

void TransformParams::validate() const {
    if (k) {
        if (*k < 2) throw Error(ErrorCode::InvalidSpec, "cylinder transforms need k >= 2");
        if (!(C1 > 0.0) || !std::isfinite(C1)) throw Error(ErrorCode::InvalidSpec, "cylinder transforms need C1 > 0");
    } else if (C1 != 0.0) {
        throw Error(ErrorCode::InvalidSpec, "plane transforms need C1 = 0");
    }
}

double forward_map(const Profile& p, const TransformParams& params, double t) {
    params.validate();
    const double s = params.offset() + p.F(t);
    if (params.is_cylinder() && !(s > 0.0))
        throw Error(ErrorCode::NonPositiveFk, "F_k(" + fmt(t) + ") = " + fmt(s) + " is not positive");
    return s;
}

double inverse_map(const Profile& p, const TransformParams& params, double s) {
    params.validate();
    if (params.is_cylinder() && !(s > 0.0))
        throw Error(ErrorCode::OutOfRange, "F_k takes only positive values");
    return p.U(s - params.offset());
}

double synth_g(const Profile& p, const TransformParams& params, double t) {
    const double f = p.f(t);
    const double df = p.df(t);
    if (!params.is_cylinder()) return f * df;
    const double fk = forward_map(p, params, t);
    return f * (df + (*params.k - 1) / fk);
}

ViscosityTransform::ViscosityTransform(Profile p, ScalarFn g, double c0, double c1, GaussLegendre rule)
    : p_(std::move(p)), g_(std::move(g)), c0_(c0), c1_(c1), rule_(std::move(rule)), panel_(rule_.order(), 1) {
    if (!p_.interval().contains(c0) || !p_.interval().contains(c1))
        throw Error(ErrorCode::OutOfDomain, "c0 and c1 must lie in the profile interval");
    exponent_at_c1_ = exponent_between(c0_, c1_);
}

// Cut points from a to b: tabulated nodes strictly between them, otherwise
// rule_.panels() equal pieces. Each piece is smooth for the integrands here.
std::vector<double> ViscosityTransform::cuts(double a, double b) const {
    std::vector<double> out{a};
    if (p_.family() == ProfileFamily::Tabulated) {
        const std::vector<double>& t = p_.nodes();
        const double lo = std::min(a, b), hi = std::max(a, b);
        auto first = std::upper_bound(t.begin(), t.end(), lo);
        auto last = std::lower_bound(t.begin(), t.end(), hi);
        if (first >= last) {
        } else if (a < b) {
            out.insert(out.end(), first, last);
        } else {
            out.insert(out.end(), std::make_reverse_iterator(last), std::make_reverse_iterator(first));
        }
    } else {
        const int panels = rule_.panels();
        for (int i = 1; i < panels; ++i) out.push_back(a + (b - a) * i / panels);
    }
    out.push_back(b);
    return out;
}

double ViscosityTransform::integrand(double s) const {
    const double f = p_.f(s);
    return g_(s) / (f * f);
}

double ViscosityTransform::exponent_between(double a, double b) const {
    const std::vector<double> c = cuts(a, b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        total += panel_.integrate([&](double s) { return integrand(s); }, c[i], c[i + 1]);
    return total;
}

double ViscosityTransform::exponent(double t) const { return exponent_at_c1_ + exponent_between(c1_, t); }

double ViscosityTransform::value(double t) const {
    if (!p_.interval().contains(t)) throw Error(ErrorCode::OutOfDomain, "t = " + fmt(t) + " outside the interval");
    const std::vector<double> c = cuts(c1_, t);
    double e = exponent_at_c1_;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        const double a = c[i];
        total += panel_.integrate(
            [&](double tau) { return std::exp(-(e + panel_.integrate([&](double s) { return integrand(s); }, a, tau))); },
            a, c[i + 1]);
        e += panel_.integrate([&](double s) { return integrand(s); }, a, c[i + 1]);
    }
    return total;
}

double ViscosityTransform::derivative(double t) const {
    if (!p_.interval().contains(t)) throw Error(ErrorCode::OutOfDomain, "t = " + fmt(t) + " outside the interval");
    return std::exp(-exponent(t));
}

double ViscosityTransform::second_derivative(double t) const {
    const double f = p_.f(t);
    return -derivative(t) * g_(t) / (f * f);
}

double ViscosityTransform::inverse(double w) const {
    const Interval& iv = p_.interval();
    // Bracket by stepping away from c1 (where G = 0) with doubling steps.
    if (w == 0.0) return c1_;
    double a = c1_;
    const double dir = (w > 0.0) ? 1.0 : -1.0;
    double step = std::abs(w) / derivative(c1_);
    double b = c1_;
    double gb = 0.0;
    bool bracketed = false;
    for (int i = 0; i < 200; ++i) {
        double next = a + dir * step;
        const double edge = dir > 0 ? iv.hi : iv.lo;
        if (dir > 0 ? next >= edge : next <= edge) next = 0.5 * (a + (std::isinf(edge) ? next : edge));
        b = next;
        try {
            gb = value(b);
        } catch (const Error& e) {
            // g may be undefined before the profile interval ends (F_k <= 0).
            if (e.code() != ErrorCode::NonPositiveFk) throw;
            step = 0.25 * std::abs(b - a);
            continue;
        }
        if ((gb - w) * dir >= 0.0) {
            bracketed = true;
            break;
        }
        a = b;
        step *= 2.0;
    }
    if (!bracketed) throw Error(ErrorCode::OutOfRange, "w = " + fmt(w) + " outside the range of G");
    double lo = std::min(a, b);
    double hi = std::max(a, b);
    double t = b;
    for (int iter = 0; iter < 200; ++iter) {
        const double r = value(t) - w;
        if (r == 0.0) return t;
        if (r > 0.0) hi = t; else lo = t;
        double next = t - r / derivative(t);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) return next;
        t = next;
    }
    return t;
}

double visc_transform(const Profile& p, const ScalarFn& g, double c0, double c1, double t) {
    return ViscosityTransform(p, g, c0, c1).value(t);
}

double visc_transform_inverse(const Profile& p, const ScalarFn& g, double c0, double c1, double w) {
    return ViscosityTransform(p, g, c0, c1).inverse(w);
}

namespace {

void check_harmonizer(const std::vector<double>& c, const std::vector<int>& d, double t) {
    if (c.size() != d.size()) throw Error(ErrorCode::InvalidArgument, "harmonize_unit: length mismatch");
    if (!std::isfinite(t)) throw Error(ErrorCode::NonFinite, "harmonize_unit: t must be finite");
    for (double ci : c)
        if (!(1.0 + ci * t > 0.0))
            throw Error(ErrorCode::PoleCrossed, "1 + c t <= 0 on [0, " + fmt(t) + "]");
}

}  // namespace

double harmonize_unit_derivative(const std::vector<double>& c, const std::vector<int>& d, double t) {
    check_harmonizer(c, d, t);
    double log_sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) log_sum -= d[i] * std::log1p(c[i] * t);
    return std::exp(log_sum);
}

double harmonize_unit(const std::vector<double>& c, const std::vector<int>& d, double t) {
    check_harmonizer(c, d, t);
    std::vector<double> cs;
    std::vector<int> ds;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] != 0.0 && d[i] != 0) {
            cs.push_back(c[i]);
            ds.push_back(d[i]);
        }
    }
    if (cs.empty()) return t;
    if (cs.size() == 1) {
        const double ci = cs[0];
        if (ds[0] == 1) return std::log1p(ci * t) / ci;
        return std::expm1((1.0 - ds[0]) * std::log1p(ci * t)) / (ci * (1.0 - ds[0]));
    }
    static const GaussLegendre rule(20, 8);
    return rule.integrate([&](double tau) { return harmonize_unit_derivative(cs, ds, tau); }, 0.0, t);
}

}  // namespace isopara
