#include <gtest/gtest.h>

#include <cmath>

#include "expect_error.hpp"
#include "isopara/verify.hpp"
#include "test_support.hpp"

using namespace isopara;
using isopara::testing::random_field;
using isopara::testing::uniform;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

CanonicalField sphere3() {
    return CanonicalField::cylinder(random_projection(3, 3, 0), Vector::Zero(3), 1.0, Profile::constant(1, {}, 2));
}

}  // namespace

TEST(FlowChecks, AffineFieldIsExact) {
    const CanonicalField f = CanonicalField::plane(vec({0.6, 0.8}), vec({0, 0}), Profile::constant(1, {}, 0));
    for (double t : {-0.7, 0.3, 0.9}) {
        const FlowCheck fc = flow_checks(unit_probe(f), vec({0.1, -0.2}), t);
        EXPECT_LE(fc.level_shift, 1e-15);
        EXPECT_EQ(fc.grad_drift, 0.0);
        EXPECT_EQ(fc.hess_residual, 0.0);
    }
}

TEST(FlowChecks, SphereHessianEvolution) {
    const Probe v = unit_probe(sphere3());
    const FlowCheck fc = flow_checks(v, vec({2, 0, 0}), 1.0);
    EXPECT_LE((fc.endpoint - vec({3, 0, 0})).norm(), 1e-15);
    const SpectralDecomp dec = sym_eig(v.jet(fc.endpoint).hess);
    EXPECT_NEAR(dec.kappas.back(), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(dec.kappas.back(), 0.5 / (1 + 1 * 0.5), 1e-15);
    EXPECT_LE(fc.hess_residual, 1e-14);
    EXPECT_LE(fc.level_shift, 1e-15);
}

TEST(FlowChecks, FocalPoint) {
    const Probe v = unit_probe(sphere3());
    EXPECT_ERROR_CODE(flow_checks(v, vec({2, 0, 0}), -2.0), ErrorCode::FocalPoint);
    EXPECT_ERROR_CODE(flow_checks(v, vec({2, 0, 0}), -2.0 + 1e-9), ErrorCode::FocalPoint);
    EXPECT_NO_THROW(flow_checks(v, vec({2, 0, 0}), -1.9));
}

TEST(FlowChecks, RequiresUnitGradient) {
    const CanonicalField f = CanonicalField::plane(vec({1, 0}), vec({0, 0}), Profile::constant(2, {}, 0));
    EXPECT_ERROR_CODE(flow_checks(analytic_probe(f), vec({0, 0}), 0.5), ErrorCode::InvalidArgument);
}

TEST(FlowChecks, InadmissibleSegment) {
    // Unit field of a plane whose profile lives on (0, 2): v = log u ranges below log 2.
    const CanonicalField f = CanonicalField::plane(vec({1, 0}), vec({0, 0}), Profile::power(1, 1, {0, 2}, 1.0));
    EXPECT_ERROR_CODE(flow_checks(unit_probe(f), vec({0, 0}), 5.0), ErrorCode::InadmissibleSegment);
}

TEST(FlowChecks, RandomCylinders) {
    std::mt19937_64 rng(4);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const CanonicalField f = random_field(seed, {2, 8, 0.0});
        for (const Vector& x : sample_admissible(f, 2, seed)) {
            const double r = f.radius(x);
            const auto [lo, hi] = flow_window(f, x);
            const FlowCheck fc = flow_checks(unit_probe(f), x, uniform(rng, std::max(-0.5 * r, 0.9 * lo), std::min(r, 0.9 * hi)));
            EXPECT_LE(fc.level_shift, 1e-12);
            EXPECT_LE(fc.grad_drift, 1e-12);
            EXPECT_LE(fc.hess_residual, 1e-10);
        }
    }
}

TEST(IntegrateFlow, LinearField) {
    const CanonicalField f = CanonicalField::plane(vec({1, 0, 0}), vec({0, 0, 0}), Profile::constant(1, {}, 0));
    const FlowPath path = integrate_flow(analytic_probe(f), vec({0.5, 1, 2}), 1.0, 100);
    for (std::size_t i = 0; i < path.tau.size(); ++i)
        EXPECT_LE((path.path[i] - vec({0.5 + path.tau[i], 1, 2})).norm(), 1e-14);
    EXPECT_LE(path.straightness, 1e-14);
}

TEST(IntegrateFlow, RadialField) {
    const FlowPath path = integrate_flow(analytic_probe(sphere3()), vec({2, 0, 0}), 1.0, 200);
    for (std::size_t i = 0; i < path.tau.size(); ++i) EXPECT_NEAR(path.h[i], 2 + path.tau[i], 1e-12);
    EXPECT_LE(path.h_law_residual, 1e-10);
    EXPECT_LE(path.level_shift, 1e-12);
}

TEST(IntegrateFlow, SquareNormExponentialGrowth) {
    Probe u;
    u.n = 3;
    u.value = [](const Vector& x) { return x.squaredNorm(); };
    u.jet = [](const Vector& x) {
        Jet j;
        j.x = x;
        j.u = x.squaredNorm();
        j.grad = 2 * x;
        j.hess = SymMatrix(2 * Matrix::Identity(3, 3));
        return j;
    };
    const FlowPath path = integrate_flow(u, vec({1, 0, 0}), 0.5, 500);
    for (std::size_t i = 0; i < path.tau.size(); ++i)
        EXPECT_NEAR(path.h[i], std::exp(4 * path.tau[i]), 1e-9 * path.h[i]);
    EXPECT_LE(path.h_law_residual, 1e-7);
    EXPECT_LE(path.line_deviation, 1e-14);
}

TEST(IntegrateFlow, StraightUnitGradientLines) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CanonicalField f = random_field(seed);
        const Vector x = sample_admissible(f, 1, seed)[0];
        const FlowPath path = integrate_flow(unit_probe(f), x, 1.0, 1000);
        EXPECT_LE(path.straightness, 1e-8);
        EXPECT_LE(path.level_shift, 1e-8);
    }
}

TEST(HarmonicResidual, Examples) {
    EXPECT_LE(harmonic_residual([](const Vector& x) { return x(0) * x(1); }, vec({0.3, -1.2}), 1e-3), 1e-10);
    const Blackbox w = [](const Vector& x) { return 1.0 - 1.0 / x.norm(); };
    const double r1 = harmonic_residual(w, vec({1.5, 0.3, -0.4}), 1e-2);
    const double r2 = harmonic_residual(w, vec({1.5, 0.3, -0.4}), 5e-3);
    EXPECT_NEAR(r1 / r2, 4.0, 0.1);
}

TEST(HarmonicResidual, UnitHarmonizer) {
    // G~(v) = int (1 + c1 tau)^-(k-1) with v = |R0(x - x*)| - 1/c1.
    const CanonicalField f = sphere3();
    const Probe v = unit_probe(f);
    const Blackbox w = [&](const Vector& x) { return harmonize_unit({f.c1()}, {f.k() - 1}, v.value(x)); };
    const Vector x = vec({1.2, 0.9, -0.5});
    const double r1 = harmonic_residual(w, x, 1e-2);
    const double r2 = harmonic_residual(w, x, 5e-3);
    EXPECT_LE(harmonic_residual(w, x, 1e-3), 1e-5);
    EXPECT_NEAR(r1 / r2, 4.0, 0.1);
}

TEST(HarmonicResidual, InadmissibleStencil) {
    const Blackbox w = [](const Vector& x) { return x(0) > 0 ? x(0) : std::nan(""); };
    EXPECT_ERROR_CODE(harmonic_residual(w, vec({1e-4, 0}), 1e-3), ErrorCode::InadmissibleStencil);
    EXPECT_ERROR_CODE(harmonic_residual(w, vec({1, 0}), 0.0), ErrorCode::InadmissibleStencil);
}

TEST(SignConvention, Examples) {
    EXPECT_EQ(sign_convention(0.0), 1);
    EXPECT_EQ(sign_convention(-0.0), 1);
    EXPECT_EQ(sign_convention(-3.5), -1);
    EXPECT_EQ(sign_convention(1e-300), 1);
    EXPECT_EQ(sign_convention(4.9e-324), 1);
}

TEST(Suites, AllPassOnCanonicalFields) {
    SuiteOptions opts;
    opts.samples = 10;
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        const CanonicalField f = random_field(seed);
        for (Suite s : {Suite::Flow, Suite::HessianEvolution, Suite::Isoparametric, Suite::Cartan}) {
            const SuiteResult res = run_suite(f, s, opts);
            EXPECT_TRUE(res.passed) << to_string(s) << " seed " << seed;
        }
    }
    EXPECT_TRUE(run_suite(sphere3(), Suite::Harmonic, opts).passed);
}

TEST(Suites, ParseNames) {
    EXPECT_EQ(parse_suite("hessian-evolution"), Suite::HessianEvolution);
    EXPECT_ERROR_CODE(parse_suite("nope"), ErrorCode::InvalidArgument);
}
