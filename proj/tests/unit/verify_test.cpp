#include "common/fixtures.hpp"
#include "fracpme/errors.hpp"
#include "fracpme/verify.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <random>

using namespace fracpme;
using namespace fracpme::testing;

namespace {

const auto kPme = NonlinearityProfile::porous_medium(2.0, 1.0, 1.0);

struct Fixture {
    SpatialProblem problem = line(24);
    TimeGrid grid = TimeGrid::uniform(1.0, 32);
    KernelPair pair = KernelPair::fractional(0.5);
    ProblemData data;
    SolutionHistory history{TimeGrid::uniform(1.0, 1)};
};

Fixture make_run(const SpaceProfile& u0, const SpaceProfile& f) {
    Fixture r;
    r.data.u0 = sample_field(r.problem, u0);
    r.data.f = sample_forcing(r.problem, r.grid, f, TimeProfile{TimeKind::Decay, 1.0});
    r.history = solve(r.problem, r.pair, kPme, r.grid, r.data.u0, r.data.f);
    return r;
}

NodalField hat(const SpatialProblem& p, std::size_t interior_index) {
    NodalField e = p.zero_field();
    e[static_cast<Eigen::Index>(p.interior_node(interior_index))] = 1.0;
    return e;
}

}  // namespace

TEST(KernelSplit, PartsAddUpAndBehave) {
    for (const auto& pair : {KernelPair::fractional(0.5), KernelPair::tempered(0.3, 2.0), KernelPair::ultra_slow()}) {
        for (double delta : {0.01, 0.2}) {
            const KernelSplit s(pair, delta);
            EXPECT_EQ(s.k2_at_zero(), pair.k(delta));
            double prev1 = std::numeric_limits<double>::infinity(), prev2 = prev1;
            for (double t : log_spaced(1e-6, 1.0, 400)) {
                EXPECT_NEAR(s.k1(t) + s.k2(t), pair.k(t), 1e-12 * std::max(1.0, pair.k(t)));
                EXPECT_GE(s.k1(t), 0.0);
                EXPECT_GE(s.k2(t), 0.0);
                EXPECT_LE(s.k1(t), prev1);
                EXPECT_LE(s.k2(t), prev2 * (1 + 1e-15));
                EXPECT_LE(s.k2(t), s.k2_at_zero());
                prev1 = s.k1(t);
                prev2 = s.k2(t);
                EXPECT_NEAR(s.k1_integral(t) + s.k2_integral(t), pair.k_integral(t),
                            1e-11 * std::max(1.0, pair.k_integral(t)));
            }
            const auto grid = TimeGrid::graded(1.0, 30, 2.0);
            const auto kappa = conv_weights(pair, grid);
            const auto kappa2 = s.k2_weights(grid);
            for (std::size_t n = 1; n <= 30; ++n) {
                for (std::size_t j = 1; j <= n; ++j) {
                    EXPECT_GE(kappa(n, j) - kappa2(n, j), -1e-12 * kappa(n, j));
                    if (j > 1) EXPECT_LE(kappa2(n, j - 1), kappa2(n, j) * (1 + 1e-12));
                }
            }
        }
    }
    EXPECT_THROW(KernelSplit(KernelPair::fractional(0.5), 0.0), ConfigError);
}

TEST(Contraction, IdenticalDataIsTight) {
    const auto r = make_run(fourier(1, 1.0), fourier(2, 1.0));
    const auto rep = contraction_check(r.history, r.history, r.data, r.data, r.problem, r.pair);
    ASSERT_EQ(rep.checks().size(), 3u);
    for (const auto& c : rep.checks()) {
        EXPECT_EQ(c.lhs, 0.0);
        EXPECT_EQ(c.rhs, 0.0);
        EXPECT_TRUE(c.pass);
    }
    const auto e = entropy_contraction_check(r.history, r.history, kPme, r.data, r.data, r.problem, r.pair);
    EXPECT_EQ(e.checks().front().lhs, 0.0);
}

TEST(Contraction, PositivePerturbation) {
    const auto a = make_run(fourier(3, 1.0), fourier(4, 1.0));
    Fixture b = a;
    b.data.u0 = a.data.u0 + sample_field(a.problem, bump(0.5, 0.3, 0.2));
    b.history = solve(b.problem, b.pair, kPme, b.grid, b.data.u0, b.data.f);
    const auto rep = contraction_check(b.history, a.history, b.data, a.data, a.problem, a.pair);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_LE(rep.checks()[2].lhs, 1e-9);  // negative part
    const auto e = entropy_contraction_check(b.history, a.history, kPme, b.data, a.data, a.problem, a.pair);
    EXPECT_NEAR(e.checks().front().lhs, rep.checks()[0].lhs, 1e-9);
}

TEST(Contraction, RandomPairsHold) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto a = make_run(fourier(10 + seed, 2.0), fourier(20 + seed, 1.0));
        const auto b = make_run(fourier(30 + seed, 2.0), fourier(40 + seed, 1.0));
        const auto rep = contraction_check(a.history, b.history, a.data, b.data, a.problem, a.pair);
        EXPECT_TRUE(rep.all_pass()) << seed;
    }
}

TEST(Contraction, GridMismatch) {
    const auto a = make_run(fourier(1, 1.0), fourier(2, 1.0));
    Fixture b;
    b.grid = TimeGrid::uniform(1.0, 16);
    b.data.u0 = a.data.u0;
    b.data.f = zero_forcing(b.problem, b.grid);
    b.history = solve(b.problem, b.pair, kPme, b.grid, b.data.u0, b.data.f);
    EXPECT_THROW(contraction_check(a.history, b.history, a.data, b.data, a.problem, a.pair), InputError);
}

TEST(WeakResidual, SchemeSatisfiesItsOwnEquation) {
    const auto r = make_run(fourier(5, 1.0), fourier(6, 2.0));
    EXPECT_EQ(weak_residual(r.history, r.problem, r.pair, r.data.f, r.problem.zero_field()), 0.0);
    for (std::size_t k : {0u, 7u, 22u}) {
        EXPECT_LE(weak_residual(r.history, r.problem, r.pair, r.data.f, hat(r.problem, k)), 1e-9);
    }
    NodalField bad = r.problem.zero_field();
    bad[0] = 1.0;
    EXPECT_THROW(weak_residual(r.history, r.problem, r.pair, r.data.f, bad), InputError);
}

TEST(WeakResidual, TruncatedTestFieldReconcilesWithEnergy) {
    // With eta_n = T_K(v_n) and zero initial data, the weak form gives
    //   sum dt (K v_n, T_K v_n) = sum dt m (f_n - D_n u, T_K v_n),
    // and (K v, T_K v) >= (K T_K v, T_K v) is the energy audit's left side.
    Fixture r;
    r.data.u0 = r.problem.zero_field();
    r.data.f = sample_forcing(r.problem, r.grid, fourier(9, 6.0), TimeProfile{});
    r.history = solve(r.problem, r.pair, kPme, r.grid, r.data.u0, r.data.f);
    const double level = 0.05;
    SpaceTimeField eta(r.grid.steps() + 1, r.problem.zero_field());
    for (std::size_t n = 1; n <= r.grid.steps(); ++n) {
        eta[n] = r.history.v[n].unaryExpr([&](double v) { return truncate_T(level, v); });
    }
    EXPECT_LE(weak_residual(r.history, r.problem, r.pair, r.data.f, eta), 1e-8);
    const auto audit = energy_audit(r.history, r.problem, r.pair, r.data.f, level);
    const auto k = r.problem.assemble_stiffness(0.0);
    double diffusion = 0.0;
    for (std::size_t n = 1; n <= r.grid.steps(); ++n) {
        const Eigen::VectorXd v = r.problem.restrict_interior(r.history.v[n]);
        const Eigen::VectorXd e = r.problem.restrict_interior(eta[n]);
        diffusion += r.grid.dt(n) * e.dot(k * v);
    }
    EXPECT_GT(audit.lhs, 0.0);
    EXPECT_LE(audit.lhs, diffusion + 1e-12);
    EXPECT_LE(diffusion, audit.bound + 1e-12);
}

TEST(Stieltjes, MatchesDirectQuadrature) {
    const auto s = entropy_S(0.7, 0.2);
    for (double psi : {0.0, 0.4, -1.1}) {
        for (auto [u0, u] : {std::pair{0.0, 1.5}, std::pair{1.2, -0.9}, std::pair{-2.0, -0.1}}) {
            auto f = [&](double x) { return s.S(kPme.phi(x) - psi); };
            const double lo = std::min(u0, u), hi = std::max(u0, u);
            double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 25, 1e-14);
            if (u < u0) q = -q;
            EXPECT_NEAR(stieltjes_entropy(kPme, s, psi, u0, u), q, 1e-10) << psi << " " << u0 << " " << u;
        }
    }
    EXPECT_EQ(stieltjes_entropy(kPme, s, 0.3, 1.0, 1.0), 0.0);
    // Identity phi and a clamp wide enough to be affine: int_{0}^{u} (s - psi) ds.
    const auto wide = entropy_S(100.0, 1.0);
    EXPECT_NEAR(stieltjes_entropy(NonlinearityProfile::identity(), wide, 0.5, 0.0, 2.0), 2.0 - 1.0, 1e-13);
}

TEST(Entropy, ZeroSolutionGivesZeroResidual) {
    Fixture r;
    r.data.u0 = r.problem.zero_field();
    r.data.f = zero_forcing(r.problem, r.grid);
    r.history = solve(r.problem, r.pair, kPme, r.grid, r.data.u0, r.data.f);
    const auto zeta = [](double t) { return 1.0 - t; };
    const auto e = entropy_residual(r.history, r.problem, kPme, r.data.f, entropy_S(1.0, 0.1),
                                    r.problem.zero_field(), zeta, KernelSplit(r.pair, 0.1));
    EXPECT_EQ(e.residual, 0.0);
}

TEST(Entropy, BatteryAndWideClampReduction) {
    const auto r = make_run(bump(1.0, 0.4, 0.3), fourier(12, 3.0));
    const double tol = 1e-4 * (l1_norm_qt(r.problem, r.grid, r.data.f) + l1_norm(r.problem, r.data.u0));
    const auto battery = default_entropy_battery(r.problem, 1.0, {0.05, 0.5});
    EXPECT_EQ(battery.shapes.size(), 5u);
    EXPECT_EQ(battery.psis.size(), 4u);
    EXPECT_EQ(battery.cutoffs.size(), 3u);
    const auto rep = entropy_battery(r.history, r.problem, kPme, r.pair, r.data.f, battery, tol);
    EXPECT_EQ(rep.checks().size(), 120u);
    EXPECT_TRUE(rep.all_pass()) << rep.worst_margin();

    // S affine over the whole solution range: the inequality degenerates toward the weak form.
    const auto wide = entropy_S(1e3, 1.0);
    const auto zeta = [](double t) { return 1.0 - t; };
    const auto e = entropy_residual(r.history, r.problem, kPme, r.data.f, wide, r.problem.zero_field(),
                                    zeta, KernelSplit(r.pair, 0.2));
    EXPECT_LE(e.residual, tol);
}

TEST(Entropy, CutoffAndPsiValidation) {
    const auto r = make_run(bump(1.0, 0.4, 0.3), fourier(12, 3.0));
    const KernelSplit split(r.pair, 0.1);
    const auto s = entropy_S(1.0, 0.1);
    EXPECT_THROW(entropy_residual(r.history, r.problem, kPme, r.data.f, s, r.problem.zero_field(),
                                  [](double) { return 1.0; }, split),
                 InputError);
    EXPECT_THROW(entropy_residual(r.history, r.problem, kPme, r.data.f, s, r.problem.zero_field(),
                                  [](double t) { return t - 1.0; }, split),
                 InputError);
    NodalField psi = r.problem.zero_field();
    psi[0] = 0.2;
    EXPECT_THROW(entropy_residual(r.history, r.problem, kPme, r.data.f, s, psi,
                                  [](double t) { return 1.0 - t; }, split),
                 InputError);
}

TEST(ScalarRelaxation, OracleAndTrivialCases) {
    const auto pair = KernelPair::fractional(0.5);
    const auto flat = scalar_relaxation(pair, 0.0, TimeGrid::uniform(1.0, 16), 2.5);
    for (double u : flat.u) EXPECT_EQ(u, 2.5);
    const auto r = scalar_relaxation(pair, 1.0, TimeGrid::graded(1.0, 1024, 3.0), 1.0);
    EXPECT_NEAR(r.oracle.back(), 0.4275836, 1e-7);
    EXPECT_LE(r.max_rel_error, 1e-3);
    const auto fast = scalar_relaxation(pair, 1.0, TimeGrid::graded(1.0, 1024, 3.0), 1.0, MemoryPath::SoE);
    EXPECT_LE(fast.max_rel_error, 1e-3);
    const auto us = scalar_relaxation(KernelPair::ultra_slow(), 1.0, TimeGrid::uniform(1.0, 32), 1.0);
    EXPECT_TRUE(us.oracle.empty());
    for (std::size_t n = 1; n < us.u.size(); ++n) EXPECT_LT(us.u[n], us.u[n - 1]);
}

TEST(FittedOrder, ExactPowerLawAndRejection) {
    std::vector<double> h{0.1, 0.05, 0.025}, e;
    for (double x : h) e.push_back(3.0 * std::pow(x, 1.5));
    EXPECT_NEAR(fitted_order(h, e), 1.5, 1e-12);
    EXPECT_THROW(fitted_order(h, {0.0, 0.0, 0.0}), InputError);
    EXPECT_THROW(fitted_order({0.1, 0.1}, {1.0, 2.0}), InputError);
    EXPECT_THROW(fitted_order({0.1}, {1.0}), InputError);
}

TEST(Report, Bookkeeping) {
    VerificationReport rep;
    rep.add("a", 1.0, 2.0, 0.0);
    rep.add("b", 2.0, 1.0, 0.5);
    rep.add("c", std::nan(""), 1.0, 0.5);
    EXPECT_EQ(rep.failures(), 2u);
    EXPECT_FALSE(rep.all_pass());
    EXPECT_NEAR(rep.worst_margin(), -0.5, 1e-15);
}
