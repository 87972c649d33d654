#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "expect_error.hpp"
#include "isopara/fields.hpp"
#include "isopara/grid.hpp"
#include "test_support.hpp"

using namespace isopara;
using isopara::testing::random_field;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

Matrix diag(std::initializer_list<double> d) { return vec(d).asDiagonal(); }

CanonicalField sphere3() {
    return CanonicalField::cylinder(random_projection(3, 3, 0), Vector::Zero(3), 1.0, Profile::constant(1, {}, 2));
}

// Closed-form jet of |x|^2.
Jet square_jet(const Vector& x) {
    Jet j;
    j.x = x;
    j.u = x.squaredNorm();
    j.grad = 2.0 * x;
    j.hess = SymMatrix(2.0 * Matrix::Identity(x.size(), x.size()));
    return j;
}

}  // namespace

TEST(RandomProjection, Examples) {
    EXPECT_LE((random_projection(4, 4, 1).matrix().matrix() - Matrix::Identity(4, 4)).norm(), 0.0);
    EXPECT_EQ(random_projection(4, 0, 1).matrix().matrix().norm(), 0.0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Matrix r = random_projection(3, 2, seed).matrix().matrix();
        EXPECT_NEAR(r.trace(), 2.0, 1e-12);
        EXPECT_LE((r * r - r).norm(), 1e-12);
    }
}

TEST(RandomProjection, DeterministicPerSeed) {
    EXPECT_EQ(random_projection(5, 3, 42).matrix().matrix(), random_projection(5, 3, 42).matrix().matrix());
    EXPECT_NE(random_projection(5, 3, 42).matrix().matrix(), random_projection(5, 3, 43).matrix().matrix());
}

TEST(RandomProjection, RankOutOfRange) {
    EXPECT_ERROR_CODE(random_projection(3, 4, 0), ErrorCode::RankOutOfRange);
    EXPECT_ERROR_CODE(random_projection(3, -1, 0), ErrorCode::RankOutOfRange);
}

TEST(MakeField, PlaneIsLinear) {
    FieldSpec spec;
    spec.kind = FieldKind::Plane;
    spec.n = 3;
    spec.q = vec({1, 0, 0});
    spec.x0 = Vector::Zero(3);
    spec.profile = Profile::constant(1, {}, 0);
    const CanonicalField f = make_field(spec);
    EXPECT_NEAR(f.value(vec({0.3, -2, 5})), 0.3, 1e-15);
}

TEST(MakeField, SphereIsRadius) {
    const CanonicalField f = sphere3();
    EXPECT_NEAR(f.value(vec({1, 2, 2})), 3.0, 1e-14);
}

TEST(MakeField, CircularCylinder) {
    FieldSpec spec;
    spec.kind = FieldKind::Cylinder;
    spec.n = 3;
    spec.k = 2;
    spec.R0 = diag({1, 1, 0});
    spec.x_star = Vector::Zero(3);
    spec.C1 = 1.0;
    spec.profile = Profile::constant(1, {}, 1);
    const CanonicalField f = make_field(spec);
    EXPECT_NEAR(f.value(vec({3, 4, 7})), 5.0, 1e-14);
}

TEST(MakeField, InvalidSpecs) {
    FieldSpec plane;
    plane.kind = FieldKind::Plane;
    plane.n = 2;
    plane.q = vec({1, 1});
    plane.x0 = Vector::Zero(2);
    plane.profile = Profile::constant(1, {}, 0);
    EXPECT_ERROR_CODE(make_field(plane), ErrorCode::InvalidSpec);

    FieldSpec cyl;
    cyl.kind = FieldKind::Cylinder;
    cyl.n = 3;
    cyl.k = 1;
    cyl.R0 = diag({1, 0, 0});
    cyl.x_star = Vector::Zero(3);
    cyl.C1 = 1.0;
    cyl.profile = Profile::constant(1, {}, 1);
    EXPECT_ERROR_CODE(make_field(cyl), ErrorCode::InvalidSpec);
    cyl.k = 2;
    cyl.R0 = diag({1, 1, 0});
    cyl.C1 = 0.0;
    EXPECT_ERROR_CODE(make_field(cyl), ErrorCode::InvalidSpec);
    cyl.C1 = 1.0;
    cyl.R0 = diag({1, 0.9, 0});
    EXPECT_ERROR_CODE(make_field(cyl), ErrorCode::InvalidSpec);
}

TEST(Jet, PlaneIsAffine) {
    const CanonicalField f = CanonicalField::plane(vec({0.6, -0.8}), vec({1, 1}), Profile::constant(1, {}, 0));
    const Jet j = f.jet(vec({3, -2}));
    EXPECT_LE((j.grad - vec({0.6, -0.8})).norm(), 1e-15);
    EXPECT_EQ(j.hess.frobenius(), 0.0);
}

TEST(Jet, SphereClosedForm) {
    const Jet j = sphere3().jet(vec({2, 0, 0}));
    EXPECT_LE((j.grad - vec({1, 0, 0})).norm(), 1e-15);
    EXPECT_LE((j.hess.matrix() - diag({0, 0.5, 0.5})).norm(), 1e-15);
}

TEST(Jet, AxisTooClose) {
    EXPECT_ERROR_CODE(sphere3().jet(vec({1e-8, 0, 0})), ErrorCode::AxisTooClose);
}

TEST(Jet, StepTooSmall) {
    EXPECT_ERROR_CODE(fd_jet([](const Vector& x) { return x(0); }, vec({1e6, 0}), 1e-12), ErrorCode::StepTooSmall);
}

TEST(Jet, FiniteDifferencesAgreeWithAnalytic) {
    // Nested central differences carry roughly eps |u| / h^2 ~ 1e-7 |u| of
    // rounding at h = 1e-4, so the Hessian bound is looser than the gradient's.
    double worst_grad = 0.0, worst_hess = 0.0;
    int count = 0;
    for (std::uint64_t seed = 0; count < 100; ++seed) {
        const CanonicalField f = random_field(seed);
        for (const Vector& x : sample_admissible(f, 2, seed)) {
            const Jet a = f.jet(x);
            const Jet d = jet(f, x, JetMode::FiniteDifference, 1e-4);
            EXPECT_EQ(a.u, d.u);
            worst_grad = std::max(worst_grad, (a.grad - d.grad).cwiseAbs().maxCoeff());
            worst_hess = std::max(worst_hess, (a.hess.matrix() - d.hess.matrix()).cwiseAbs().maxCoeff());
            ++count;
        }
    }
    EXPECT_LE(worst_grad, 1e-7);
    EXPECT_LE(worst_hess, 2e-6);
}

TEST(Jet, FiniteDifferencesConvergeAtSecondOrder) {
    int checked = 0;
    for (std::uint64_t seed = 0; checked < 40; ++seed) {
        const CanonicalField f = random_field(seed);
        if (f.profile().family() == ProfileFamily::Tabulated) continue;  // piecewise cubic, U is not C^4
        const Vector x = sample_admissible(f, 1, seed)[0];
        const Jet a = f.jet(x);
        auto gap = [&](double h) {
            const Jet d = jet(f, x, JetMode::FiniteDifference, h);
            return (a.hess.matrix() - d.hess.matrix()).cwiseAbs().maxCoeff();
        };
        const double coarse = gap(4e-3);
        if (coarse < 1e-6) continue;  // exact up to rounding, e.g. constant-profile planes
        const double ratio = coarse / gap(2e-3);
        EXPECT_GT(ratio, 3.5) << "seed " << seed;
        EXPECT_LT(ratio, 4.5) << "seed " << seed;
        ++checked;
    }
}

TEST(Operators, PlaneAndSphere) {
    const CanonicalField plane = CanonicalField::plane(vec({0, 1}), vec({0, 0}), Profile::constant(1, {}, 0));
    const Operators p = operators(plane.jet(vec({1, 1})));
    EXPECT_EQ(p.gradnorm, 1.0);
    EXPECT_EQ(p.laplacian, 0.0);
    EXPECT_EQ(p.ninf, 0.0);
    EXPECT_EQ(p.onelap, 0.0);
    EXPECT_EQ(p.hess_v.frobenius(), 0.0);

    const Operators s = operators(sphere3().jet(vec({2, 0, 0})));
    EXPECT_NEAR(s.gradnorm, 1.0, 1e-15);
    EXPECT_NEAR(s.laplacian, 1.0, 1e-15);
    EXPECT_NEAR(s.ninf, 0.0, 1e-15);
    EXPECT_NEAR(s.onelap, 1.0, 1e-15);
}

TEST(Operators, SquareNormControlCase) {
    const Vector x = vec({0.3, -0.4, 1.2});
    const Operators o = operators(square_jet(x));
    const double r = x.norm();
    EXPECT_NEAR(o.gradnorm, 2 * r, 1e-14);
    EXPECT_NEAR(o.laplacian, 6.0, 1e-14);
    EXPECT_NEAR(o.ninf, 2.0, 1e-14);
    EXPECT_NEAR(o.onelap, 4.0 / (2 * r), 1e-14);
    EXPECT_ERROR_CODE(operators(square_jet(Vector::Zero(3))), ErrorCode::CriticalPoint);
}

TEST(Operators, InvariantsOnRandomFields) {
    for (std::uint64_t seed = 100; seed < 200; ++seed) {
        const CanonicalField f = random_field(seed);
        for (const Vector& x : sample_admissible(f, 5, seed)) {
            const Operators o = operators(f.jet(x));
            EXPECT_NEAR(o.onelap * o.gradnorm, o.laplacian - o.ninf, 1e-10 * std::max(1.0, std::abs(o.laplacian)));
            EXPECT_NEAR(o.hess_v.trace(), o.onelap, 1e-8);
            EXPECT_LE((o.hess_v.matrix() * o.normal).norm(), 1e-8);
        }
    }
}

TEST(Operators, UnitGradientHessianIsHessV) {
    const CanonicalField f = random_field(7, {3, 6, 0.0});
    const Vector x = sample_admissible(f, 1, 1)[0];
    const Jet v = f.unit_jet(x);
    EXPECT_LE((operators(v).hess_v.matrix() - v.hess.matrix()).norm(), 1e-12);
}

TEST(Operators, CylinderCurvatureSpectrum) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const CanonicalField f = random_field(seed, {2, 8, 0.0});
        for (const Vector& x : sample_admissible(f, 3, seed)) {
            const double v = f.unit_value(x);
            const double kappa = f.c1() / (1.0 + f.c1() * v);
            const SpectralDecomp dec = sym_eig(operators(f.jet(x)).hess_v);
            std::vector<double> expect{0.0, kappa};
            std::vector<int> mults{f.n() - f.k() + 1, f.k() - 1};
            ASSERT_EQ(dec.size(), 2u);
            for (int i = 0; i < 2; ++i) {
                EXPECT_NEAR(dec.kappas[i], expect[i], 1e-9);
                EXPECT_EQ(dec.mults[i], mults[i]);
            }
        }
    }
}

TEST(Fields, IsoparametricResiduals) {
    for (std::uint64_t seed = 300; seed < 400; ++seed) {
        const CanonicalField f = random_field(seed);
        for (const Vector& x : sample_admissible(f, 20, seed)) {
            const Jet j = f.jet(x);
            EXPECT_LE(std::abs(j.grad.norm() - f.profile().f(j.u)), 1e-10);
            EXPECT_LE(std::abs(j.hess.trace() - synth_g(f.profile(), f.params(), j.u)), 1e-8);
        }
    }
}

TEST(Fields, LevelSetSamplesShareValue) {
    const CanonicalField f = random_field(5, {3, 6, 0.0});
    const std::vector<Vector> xs = sample_level_sets(f, 3, 4, 9);
    for (int l = 0; l < 3; ++l)
        for (int i = 1; i < 4; ++i) EXPECT_NEAR(f.value(xs[4 * l + i]), f.value(xs[4 * l]), 1e-13);
}

TEST(Probe, NegationIsExact) {
    const Probe p = analytic_probe(sphere3());
    const Probe m = negated(p);
    const Vector x = vec({1, 2, 0.5});
    EXPECT_EQ(m.value(x), -p.value(x));
    EXPECT_EQ(m.jet(x).hess.matrix(), -p.jet(x).hess.matrix());
    EXPECT_EQ(negated(m).jet(x).grad, p.jet(x).grad);
}

TEST(Grid, InterpolatesSmoothField) {
    GridHeader h{{41, 41}, {0.05, 0.05}, {-1, -1}};
    const Blackbox u = [](const Vector& x) { return std::sin(x(0)) + x(1) * x(1); };
    const GridField g = GridField::sample(h, u);
    for (const Vector& x : {vec({0.123, -0.31}), vec({0.5, 0.5}), vec({-0.2, 0.01})})
        EXPECT_NEAR(g.value(x), u(x), 1e-5);
    EXPECT_TRUE(std::isnan(g.value(vec({1.5, 0}))));
}

TEST(Grid, CsvRoundTrip) {
    GridHeader h{{5, 4, 3}, {0.5, 0.25, 1.0}, {0, 1, -1}};
    const GridField g = GridField::sample(h, [](const Vector& x) { return x(0) - 2 * x(1) + x(2) * x(0); });
    std::stringstream ss;
    g.write_csv(ss);
    const GridField back = GridField::read_csv(ss);
    EXPECT_EQ(back.header().shape, h.shape);
    const Vector x = vec({1.1, 1.3, -0.2});
    EXPECT_EQ(back.value(x), g.value(x));
}

TEST(Grid, RejectsMissingNodes) {
    std::stringstream ss;
    ss << R"({"shape":[2,2],"spacing":[1,1]})" << "\n0,0,1\n1,0,2\n0,1,3\n";
    EXPECT_ERROR_CODE(GridField::read_csv(ss), ErrorCode::ParseError);
}
