#pragma once

#include <functional>
#include <vector>

namespace isopara {

using ScalarFn = std::function<double(double)>;

struct SimpsonOptions {
    double abs_tol = 1e-12;
    long max_subdivisions = 1'000'000;
};

/// Adaptive Simpson on [a, b] (b < a gives the negated integral).
/// Throws NoConvergence once the subdivision cap is exhausted.
double adaptive_simpson(const ScalarFn& f, double a, double b, const SimpsonOptions& opts = {});

/// Composite Gauss-Legendre rule with a fixed number of equal panels. The
/// node set does not depend on the integrand, so the result is a smooth
/// function of the endpoints; this is what the finite-difference checks on
/// transformed fields rely on.
class GaussLegendre {
public:
    explicit GaussLegendre(int order = 20, int panels = 4);

    double integrate(const ScalarFn& f, double a, double b) const;

    int order() const { return static_cast<int>(nodes_.size()); }
    int panels() const { return panels_; }

private:
    std::vector<double> nodes_;    // on [-1, 1]
    std::vector<double> weights_;
    int panels_;
};

}  // namespace isopara
