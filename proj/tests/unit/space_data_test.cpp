#include "common/fixtures.hpp"
#include "fracpme/data.hpp"
#include "fracpme/errors.hpp"
#include "fracpme/space.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <fstream>
#include <random>

using namespace fracpme;
using namespace fracpme::testing;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST(Space, MeshLayout) {
    const auto p = line(4);
    ASSERT_EQ(p.interior_count(), 3u);
    EXPECT_DOUBLE_EQ(p.coord(p.interior_node(0)).x(), 0.25);
    EXPECT_DOUBLE_EQ(p.coord(p.interior_node(1)).x(), 0.5);
    EXPECT_DOUBLE_EQ(p.coord(p.interior_node(2)).x(), 0.75);
    EXPECT_EQ(square(4).interior_count(), 9u);
    EXPECT_EQ(square(4).node_count(), 25u);
    EXPECT_THROW(line(1), ConfigError);
    MeshSpec bad;
    bad.dim = 3;
    EXPECT_THROW(build_mesh(bad, constant_coefficient(1.0), 1.0), ConfigError);
    EXPECT_THROW(SpatialProblem(MeshSpec{}, constant_coefficient(1.0), 0.0), ConfigError);
}

TEST(Space, OneDimensionalStencil) {
    const auto p = line(4);
    const Eigen::MatrixXd k = Eigen::MatrixXd(p.assemble_stiffness(0.0));
    Eigen::MatrixXd expected(3, 3);
    expected << 2, -1, 0, -1, 2, -1, 0, -1, 2;
    expected /= 0.25;
    EXPECT_LT((k - expected).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_DOUBLE_EQ(p.interior_mass(), 0.25);

    MeshSpec mesh;
    mesh.cells_x = 4;
    const SpatialProblem doubled(mesh, constant_coefficient(2.0), 1.0);
    const Eigen::MatrixXd k2 = Eigen::MatrixXd(doubled.assemble_stiffness(0.0));
    EXPECT_LT((k2 - 2.0 * expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Space, TwoDimensionalFivePoint) {
    const auto p = square(8);
    const Eigen::MatrixXd k = Eigen::MatrixXd(p.assemble_stiffness(0.0));
    // For A = I on this triangulation the P1 stiffness is the 5-point Laplacian (times h^2/h^2).
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        EXPECT_NEAR(k(i, i), 4.0, 1e-12);
        for (Eigen::Index j = 0; j < k.cols(); ++j) {
            if (i != j) EXPECT_TRUE(std::abs(k(i, j)) < 1e-12 || std::abs(k(i, j) + 1.0) < 1e-12);
        }
    }
    EXPECT_LT((k - k.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(p.interior_mass(), 1.0 / 64.0, 1e-15);
}

TEST(Space, EnergyOfLinearInterpolant) {
    // (K w, w) = int |grad w|^2 exactly for the P1 interpolant, any A constant.
    MeshSpec mesh;
    mesh.dim = 2;
    mesh.cells_x = 6;
    mesh.cells_y = 5;
    mesh.length_x = 2.0;
    Eigen::Matrix2d a;
    a << 2.0, 0.3, 0.3, 1.0;
    const SpatialProblem p(mesh, [a](double, double, double) { return a; }, 0.5);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    Eigen::VectorXd w(p.interior_count());
    for (auto& x : w) x = g(rng);
    const auto k = p.assemble_stiffness(0.0);
    const double energy = w.dot(k * w);
    // Recompute element by element.
    const double hx = p.hx(), hy = p.hy();
    const NodalField full = p.extend_interior(w);
    auto val = [&](std::size_t i, std::size_t j) { return full[static_cast<Eigen::Index>(j * (mesh.cells_x + 1) + i)]; };
    double sum = 0.0;
    for (std::size_t j = 0; j < mesh.cells_y; ++j) {
        for (std::size_t i = 0; i < mesh.cells_x; ++i) {
            const double w00 = val(i, j), w10 = val(i + 1, j), w11 = val(i + 1, j + 1), w01 = val(i, j + 1);
            const Eigen::Vector2d g1((w10 - w00) / hx, (w11 - w10) / hy);
            const Eigen::Vector2d g2((w11 - w01) / hx, (w01 - w00) / hy);
            sum += 0.5 * hx * hy * (g1.dot(a * g1) + g2.dot(a * g2));
        }
    }
    EXPECT_NEAR(energy, sum, 1e-10 * sum);
}

TEST(Space, CoercivityProbe) {
    MeshSpec mesh;
    mesh.cells_x = 8;
    const SpatialProblem ok(
        mesh,
        [](double t, double, double) {
            return Eigen::Matrix2d((1.0 + 0.5 * std::sin(2 * kPi * t)) * Eigen::Matrix2d::Identity());
        },
        0.5, true);
    EXPECT_NO_THROW(ok.probe_coercivity(TimeGrid::uniform(1.0, 64)));
    const SpatialProblem bad(
        mesh, [](double, double x, double) { return Eigen::Matrix2d((x - 0.4) * Eigen::Matrix2d::Identity()); },
        0.1);
    try {
        bad.assemble_stiffness(0.0);
        FAIL() << "probe did not fire";
    } catch (const HypothesisViolation& e) {
        EXPECT_EQ(e.hypothesis(), "HA");
        EXPECT_NE(std::string(e.what()).find("x="), std::string::npos) << e.what();
    }
}

TEST(Space, NormsDecomposeAndTile) {
    const auto p = line(16);
    NodalField one = NodalField::Ones(static_cast<Eigen::Index>(p.node_count()));
    EXPECT_NEAR(l1_norm(p, one), 1.0, 1e-14);
    EXPECT_NEAR(p.measure(), 1.0, 1e-14);
    const auto q = square(6);
    EXPECT_NEAR(q.l1_weights().sum(), 1.0, 1e-14);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        NodalField f = q.zero_field();
        for (auto& x : f) x = g(rng);
        EXPECT_NEAR(l1_norm(q, f), l1_norm(q, NodalField(-f)), 1e-14);
        EXPECT_NEAR(l1_norm_positive(q, f) + l1_norm_negative(q, f), l1_norm(q, f), 1e-13);
    }
    EXPECT_THROW(l1_norm(q, one), InternalError);
}

TEST(Space, SpaceTimeNormUsesRightEndpoints) {
    const auto p = line(8);
    const auto grid = TimeGrid::graded(1.0, 5, 2.0);
    std::vector<NodalField> w(6, p.zero_field());
    for (std::size_t n = 0; n <= 5; ++n) w[n].setConstant(static_cast<double>(n));
    double expected = 0.0;
    for (std::size_t n = 1; n <= 5; ++n) expected += grid.dt(n) * n;
    EXPECT_NEAR(l1_norm_qt(p, grid, w), expected, 1e-14);
    EXPECT_NEAR(l1_norm_qt(p, grid, w, NormPart::Negative), 0.0, 0.0);
}

TEST(Data, CellAveragesAgainstQuadrature) {
    const auto p = line(10);
    for (ProfileKind kind : {ProfileKind::Sine, ProfileKind::Bump, ProfileKind::InverseSqrt,
                             ProfileKind::Log, ProfileKind::SignedInverseSqrt, ProfileKind::RandomFourier}) {
        SpaceProfile prof;
        prof.kind = kind;
        prof.amplitude = 1.3;
        prof.center = 0.37;
        prof.width = 0.3;
        prof.seed = 9;
        for (auto [a, b] : {std::pair{0.05, 0.15}, std::pair{0.55, 0.65}, std::pair{0.0, 0.05}}) {
            if (kind == ProfileKind::SignedInverseSqrt && a < 0.37 && b > 0.37) continue;
            auto f = [&](double x) { return prof.value(x, 1.0); };
            // tanh-sinh copes with the endpoint singularities of the inverse-sqrt and log profiles.
            boost::math::quadrature::tanh_sinh<double> ts;
            const double q = ts.integrate(f, a, b);
            EXPECT_NEAR(prof.average(a, b, 1.0), q / (b - a), 1e-8) << to_string(kind) << " " << a;
        }
    }
}

TEST(Data, InverseSqrtSampleKeepsExactNorm) {
    SpaceProfile inv;
    inv.kind = ProfileKind::InverseSqrt;
    for (std::size_t n : {8u, 32u, 128u}) {
        const auto p = line(n);
        EXPECT_NEAR(l1_norm(p, sample_field(p, inv)), 2.0, 1e-12);
    }
    SpaceProfile lg;
    lg.kind = ProfileKind::Log;
    const auto p = line(16);
    EXPECT_NEAR(l1_norm(p, sample_field(p, lg)), 1.0, 1e-12);
}

TEST(Data, ForcingIsTimeCellAverage) {
    const auto p = line(8);
    const auto grid = TimeGrid::uniform(2.0, 4);
    SpaceProfile c;
    c.kind = ProfileKind::Constant;
    c.amplitude = 2.0;
    const auto f = sample_forcing(p, grid, c, TimeProfile{TimeKind::Decay, 1.5});
    EXPECT_EQ(f.size(), 5u);
    EXPECT_EQ(f[0].cwiseAbs().maxCoeff(), 0.0);
    // sum_n dt_n f_n = int_0^T 2 e^{-1.5 t} dt on each node.
    double total = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) total += grid.dt(n) * f[n][3];
    EXPECT_NEAR(total, 2.0 * (1 - std::exp(-3.0)) / 1.5, 1e-13);
}

TEST(Data, RandomFourierIsSeeded) {
    const auto a = fourier(3, 1.0).fourier_coefficients();
    const auto b = fourier(3, 1.0).fourier_coefficients();
    const auto c = fourier(4, 1.0).fourier_coefficients();
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(Data, FieldCsvLoading) {
    const auto p = line(4);
    const std::string path = ::testing::TempDir() + "fracpme_field.csv";
    {
        std::ofstream out(path);
        out << "x,value\n0,0\n0.25,1\n0.5,2\n0.75,3\n1,0\n";
    }
    const auto f = load_field_csv(p, path);
    EXPECT_EQ(f[2], 2.0);
    {
        std::ofstream out(path);
        out << "x,value\n0,0\n0.25,1\n";
    }
    EXPECT_THROW(load_field_csv(p, path), InputError);
    EXPECT_THROW(load_field_csv(p, path + ".missing"), InputError);
    EXPECT_THROW(parse_profile_kind("gaussian"), ConfigError);
}
