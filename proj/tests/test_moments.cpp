#include <gtest/gtest.h>

#include <Eigen/LU>
#include <algorithm>
#include <cstdint>

#include "expect_error.hpp"
#include "isopara/moments.hpp"
#include "test_support.hpp"

using namespace isopara;
using isopara::testing::uniform;
using isopara::testing::uniform_int;

namespace {

// Exact integer determinant by fraction-free (Bareiss) elimination.
__int128 bareiss(std::vector<std::vector<__int128>> a) {
    const std::size_t n = a.size();
    __int128 sign = 1, prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && a[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

std::vector<std::vector<__int128>> integer_jacobian(const std::vector<long>& y, const std::vector<int>& d) {
    const std::size_t m = y.size();
    std::vector<std::vector<__int128>> a(m, std::vector<__int128>(m));
    for (std::size_t k = 1; k <= m; ++k)
        for (std::size_t j = 0; j < m; ++j) {
            __int128 p = 1;
            for (std::size_t e = 1; e < k; ++e) p *= y[j];
            a[k - 1][j] = static_cast<__int128>(k) * d[j] * p;
        }
    return a;
}

}  // namespace

TEST(PowerSums, Examples) {
    EXPECT_EQ(power_sums({3, -1}, {1, 2}, 2), (std::vector<double>{1, 11}));
    EXPECT_EQ(power_sums({0.25}, {1}, 1), (std::vector<double>{0.25}));
    EXPECT_EQ(power_sums({1, 2}, {1, 1}, 2), (std::vector<double>{3, 5}));
}

TEST(Vandermonde, ClosedFormExamples) {
    EXPECT_DOUBLE_EQ(vandermonde_jacobian({1, 2}, {1, 1}).determinant, 2.0);
    EXPECT_EQ(vandermonde_jacobian({1.5, 1.5}, {1, 3}).determinant, 0.0);
    EXPECT_DOUBLE_EQ(vandermonde_jacobian({0, 1, 3}, {2, 1, 1}).determinant, 72.0);
}

TEST(Vandermonde, DeterminantMatchesElimination) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        const int m = uniform_int(rng, 1, 6);
        std::vector<double> y;
        std::vector<int> d;
        while (static_cast<int>(y.size()) < m) {
            const double c = uniform(rng, -2, 2);
            bool separated = true;
            for (double other : y) separated = separated && std::abs(other - c) >= 0.1;
            if (!separated) continue;
            y.push_back(c);
            d.push_back(uniform_int(rng, 1, 4));
        }
        const VandermondeJacobian vj = vandermonde_jacobian(y, d);
        const double lu = vj.jacobian.partialPivLu().determinant();
        EXPECT_LE(std::abs(vj.determinant - lu), 1e-10 * std::abs(lu)) << "m=" << m;
    }
}

TEST(Vandermonde, ExactOnIntegers) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 500; ++trial) {
        const int m = uniform_int(rng, 1, 5);
        std::vector<long> yi;
        std::vector<int> d;
        for (int i = 0; i < m; ++i) {
            yi.push_back(uniform_int(rng, -5, 5));
            d.push_back(uniform_int(rng, 1, 3));
        }
        const std::vector<double> y(yi.begin(), yi.end());
        EXPECT_EQ(vandermonde_jacobian(y, d).determinant,
                  static_cast<double>(bareiss(integer_jacobian(yi, d))));
    }
}

TEST(Vandermonde, JacobianMatchesCentralDifferences) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = uniform_int(rng, 1, 5);
        std::vector<double> y;
        std::vector<int> d;
        for (int i = 0; i < m; ++i) {
            y.push_back(uniform(rng, -2, 2));
            d.push_back(uniform_int(rng, 1, 3));
        }
        const Matrix jac = vandermonde_jacobian(y, d).jacobian;
        const double h = 1e-6;
        for (int j = 0; j < m; ++j) {
            std::vector<double> yp = y, ym = y;
            yp[j] += h;
            ym[j] -= h;
            const std::vector<double> fp = power_sums(yp, d, m), fm = power_sums(ym, d, m);
            for (int k = 0; k < m; ++k) {
                const double fd = (fp[k] - fm[k]) / (2 * h);
                EXPECT_LE(std::abs(fd - jac(k, j)), 1e-6 * std::max(1.0, std::abs(jac(k, j))));
            }
        }
    }
}

TEST(InvertMoments, Examples) {
    const std::vector<double> k = invert_moments({{1, 2}, {1, 11}}, {2.5, -0.5}, 1e-12);
    ASSERT_EQ(k.size(), 2u);
    EXPECT_NEAR(k[0], -1.0, 1e-12);
    EXPECT_NEAR(k[1], 3.0, 1e-12);
    const std::vector<double> one = invert_moments({{1}, {0.75}}, {5.0}, 1e-14);
    EXPECT_DOUBLE_EQ(one[0], 0.75);
}

TEST(InvertMoments, RandomRoundTrip) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 500; ++trial) {
        const int m = uniform_int(rng, 1, 4);
        std::vector<double> kappa;
        while (static_cast<int>(kappa.size()) < m) {
            const double c = uniform(rng, -2, 2);
            bool ok = true;
            for (double o : kappa) ok = ok && std::abs(o - c) >= 0.1;
            if (ok) kappa.push_back(c);
        }
        std::sort(kappa.begin(), kappa.end());
        std::vector<int> d;
        for (int i = 0; i < m; ++i) d.push_back(uniform_int(rng, 1, 3));
        std::vector<double> y0 = kappa;
        for (double& v : y0) v += uniform(rng, -0.01, 0.01);
        const std::vector<double> got = invert_moments({d, power_sums(kappa, d, m)}, y0, 1e-13);
        for (int i = 0; i < m; ++i) EXPECT_NEAR(got[i], kappa[i], 1e-9);
    }
}

TEST(InvertMoments, CollidingGuessIsSingular) {
    EXPECT_ERROR_CODE(invert_moments({{1, 1}, {3, 5}}, {1.0, 1.0}, 1e-12), ErrorCode::SingularJacobian);
}

TEST(InvertMoments, HeuristicGuessConverges) {
    const MomentSystem sys{{1, 2}, power_sums({-1, 3}, {1, 2}, 2)};
    const std::vector<double> k = invert_moments(sys, heuristic_guess(sys), 1e-12);
    EXPECT_NEAR(k[0], -1.0, 1e-10);
    EXPECT_NEAR(k[1], 3.0, 1e-10);
}

TEST(InvertMoments, IterationCap) {
    InvertOptions opts;
    opts.max_iter = 1;
    EXPECT_ERROR_CODE(invert_moments({{1, 1, 1}, {6, 14, 36}}, {0.0, 5.0, 9.0}, 1e-14, opts), ErrorCode::NoConvergence);
}

TEST(MomentSystem, Validation) {
    EXPECT_ERROR_CODE((MomentSystem{{0}, {1.0}}.validate()), ErrorCode::InvalidArgument);
    EXPECT_ERROR_CODE((MomentSystem{{1, 1}, {1.0}}.validate()), ErrorCode::InvalidArgument);
}
