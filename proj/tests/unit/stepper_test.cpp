#include "common/fixtures.hpp"
#include "fracpme/errors.hpp"
#include "fracpme/special.hpp"
#include "fracpme/stepper.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace fracpme;
using namespace fracpme::testing;

namespace {

const auto kPme = NonlinearityProfile::porous_medium(2.0, 1.0, 1.0);

}  // namespace

TEST(Stepper, ZeroDataGivesZeroSolution) {
    const auto p = line(16);
    const auto grid = TimeGrid::uniform(1.0, 20);
    const auto h = solve(p, KernelPair::fractional(0.5), kPme, grid, p.zero_field(), zero_forcing(p, grid));
    ASSERT_TRUE(h.complete());
    for (const auto& u : h.u) EXPECT_EQ(u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Stepper, SeparatedVariablesOracle) {
    // Continuous eigenvalue: error dominated by the O(h^2) eigenvalue gap.
    const double alpha = 0.5;
    const auto p = line(64);
    const auto grid = TimeGrid::graded(1.0, 512, (2.0 - alpha) / alpha);
    const NodalField u0 = sine_nodes(p);
    const auto h = solve(p, KernelPair::fractional(alpha), NonlinearityProfile::identity(), grid, u0,
                         zero_forcing(p, grid));
    double worst = 0.0;
    const double pi2 = 3.14159265358979323846 * 3.14159265358979323846;
    for (std::size_t n = 1; n <= grid.steps(); ++n) {
        const double e = relaxation_oracle(alpha, pi2, grid.t(n));
        for (std::size_t g : p.interior_nodes()) {
            const auto i = static_cast<Eigen::Index>(g);
            worst = std::max(worst, std::abs(h.u[n][i] - e * u0[i]) / std::abs(e * u0[i]));
        }
    }
    EXPECT_LE(worst, 2e-2);
}

TEST(Stepper, LinearProblemConvergesInOneIteration) {
    const auto p = square(6);
    const auto grid = TimeGrid::uniform(1.0, 10);
    const auto h = solve(p, KernelPair::tempered(0.4, 1.0), NonlinearityProfile::identity(), grid,
                         sample_field(p, fourier(2, 1.0)),
                         sample_forcing(p, grid, fourier(3, 1.0), TimeProfile{}));
    for (const auto& d : h.diagnostics) EXPECT_LE(d.iterations, 1u);
}

TEST(Stepper, StoredStateInvariants) {
    const auto p = line(24);
    const auto grid = TimeGrid::graded(1.0, 40, 2.0);
    const auto f = sample_forcing(p, grid, fourier(5, 2.0), TimeProfile{TimeKind::Oscillating, 0});
    const auto h = solve(p, KernelPair::ultra_slow(), kPme, grid, sample_field(p, fourier(6, 1.0)), f);
    for (std::size_t n = 0; n < h.u.size(); ++n) {
        for (Eigen::Index i = 0; i < h.u[n].size(); ++i) {
            EXPECT_NEAR(h.v[n][i], kPme.phi(h.u[n][i]), 1e-12 * std::max(1.0, std::abs(h.v[n][i])));
            if (p.is_boundary(static_cast<std::size_t>(i))) EXPECT_EQ(h.u[n][i], 0.0);
        }
    }
    for (const auto& d : h.diagnostics) {
        EXPECT_LE(d.residual, d.tolerance);
        EXPECT_EQ(d.residual_trace.size(), d.iterations + 1);
    }
}

TEST(Stepper, QuadraticNewtonConvergence) {
    const auto p = line(32);
    const auto grid = TimeGrid::uniform(1.0, 8);
    SolverOptions opt;
    opt.newton_tol = 1e-12;
    const auto h = solve(p, KernelPair::fractional(0.5), kPme, grid,
                         sample_field(p, bump(2.0, 0.5, 0.3)), zero_forcing(p, grid), opt);
    // Ratios r_{k+1}/r_k^2 stay bounded once in the asymptotic regime.
    for (const auto& d : h.diagnostics) {
        const auto& r = d.residual_trace;
        for (std::size_t k = 1; k + 1 < r.size(); ++k) {
            if (r[k] < 1e-2 && r[k + 1] > 1e-12) EXPECT_LT(r[k + 1] / (r[k] * r[k]), 1e3);
        }
    }
}

TEST(Stepper, DegenerateJacobianAtZero) {
    // PME with data vanishing on most of the domain: phi'(0) = 0 there.
    const auto p = line(32);
    const auto grid = TimeGrid::uniform(1.0, 16);
    EXPECT_NO_THROW(solve(p, KernelPair::fractional(0.5), kPme, grid,
                          sample_field(p, bump(1.0, 0.5, 0.1)), zero_forcing(p, grid)));
}

TEST(Stepper, LinearityForIdentity) {
    const auto p = line(16);
    const auto grid = TimeGrid::uniform(1.0, 12);
    const auto pair = KernelPair::fractional(0.3);
    const auto id = NonlinearityProfile::identity();
    const NodalField a = sample_field(p, fourier(1, 1.0));
    const NodalField b = sample_field(p, fourier(2, 1.0));
    const auto z = zero_forcing(p, grid);
    const auto ha = solve(p, pair, id, grid, a, z);
    const auto hb = solve(p, pair, id, grid, b, z);
    const auto hab = solve(p, pair, id, grid, NodalField(2.0 * a - b), z);
    for (std::size_t n = 0; n < ha.u.size(); ++n) {
        EXPECT_LT((hab.u[n] - (2.0 * ha.u[n] - hb.u[n])).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Stepper, ComparisonOnRandomOrderedData) {
    std::mt19937_64 rng(17);
    const auto p = line(20);
    const auto grid = TimeGrid::uniform(1.0, 24);
    const auto pair = KernelPair::tempered(0.6, 0.5);
    for (int trial = 0; trial < 5; ++trial) {
        const NodalField lo = sample_field(p, fourier(50 + trial, 2.0));
        const NodalField hi = lo + sample_field(p, random_bump(rng, 1.0));
        const auto f = zero_forcing(p, grid);
        const auto a = solve(p, pair, kPme, grid, lo, f);
        const auto b = solve(p, pair, kPme, grid, hi, f);
        for (std::size_t n = 0; n < a.u.size(); ++n) EXPECT_LE((a.u[n] - b.u[n]).maxCoeff(), 1e-9);
    }
}

TEST(Stepper, SoEPathMatchesNaive) {
    const auto p = line(16);
    const auto grid = TimeGrid::graded(1.0, 200, 2.0);
    SolverOptions fast;
    fast.memory = MemoryPath::SoE;
    const NodalField u0 = sample_field(p, bump(1.0, 0.5, 0.3));
    const auto f = zero_forcing(p, grid);
    const auto a = solve(p, KernelPair::fractional(0.5), kPme, grid, u0, f);
    const auto b = solve(p, KernelPair::fractional(0.5), kPme, grid, u0, f, fast);
    EXPECT_GT(b.soe_modes, 0u);
    for (std::size_t n = 0; n < a.u.size(); ++n) EXPECT_LT((a.u[n] - b.u[n]).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Stepper, InputValidation) {
    const auto p = line(8);
    const auto grid = TimeGrid::uniform(1.0, 4);
    const auto pair = KernelPair::fractional(0.5);
    EXPECT_THROW(solve(p, pair, kPme, grid, NodalField::Zero(3), zero_forcing(p, grid)), InputError);
    EXPECT_THROW(solve(p, pair, kPme, grid, p.zero_field(), zero_forcing(p, TimeGrid::uniform(1.0, 5))),
                 InputError);
    NodalField nan = p.zero_field();
    nan[3] = std::nan("");
    EXPECT_THROW(solve(p, pair, kPme, grid, nan, zero_forcing(p, grid)), InputError);
}

TEST(Stepper, FailureCarriesPartialHistory) {
    const auto p = line(8);
    const auto grid = TimeGrid::uniform(1.0, 6);
    SolverOptions opt;
    opt.max_iter = 1;
    opt.newton_tol = 1e-15;
    try {
        solve(p, KernelPair::fractional(0.5), NonlinearityProfile::porous_medium(4.0, 1.0, 1.0), grid,
              sample_field(p, bump(5.0, 0.5, 0.3)), zero_forcing(p, grid), opt);
        FAIL() << "expected a step failure";
    } catch (const StepFailure& e) {
        EXPECT_EQ(e.step(), 1u);
        EXPECT_EQ(e.partial().completed(), 0u);
        EXPECT_EQ(e.partial().u.size(), 1u);
    }
}

TEST(Energy, ZeroDataAndScaling) {
    const auto p = line(16);
    const auto grid = TimeGrid::uniform(1.0, 16);
    const auto pair = KernelPair::fractional(0.5);
    const auto z = zero_forcing(p, grid);
    const auto h0 = solve(p, pair, kPme, grid, p.zero_field(), z);
    const auto a0 = energy_audit(h0, p, pair, z, 1.0);
    EXPECT_EQ(a0.lhs, 0.0);
    EXPECT_EQ(a0.bound, 0.0);
    EXPECT_TRUE(a0.pass);

    const auto f = sample_forcing(p, grid, fourier(8, 10.0), TimeProfile{});
    const auto h = solve(p, pair, kPme, grid, p.zero_field(), f);
    double prev = 0.0;
    for (double k : {1e-3, 0.01, 0.1, 1.0, 10.0}) {
        const auto a = energy_audit(h, p, pair, f, k);
        EXPECT_TRUE(a.pass) << k;
        EXPECT_GE(a.lhs, prev);
        EXPECT_NEAR(a.bound, k * l1_norm_qt(p, grid, f), 1e-12 * a.bound);
        prev = a.lhs;
    }
    EXPECT_THROW(energy_audit(h, p, pair, f, 0.0), DomainError);
}

TEST(Energy, InitialDataTermIsReported) {
    const auto p = line(16);
    const auto grid = TimeGrid::uniform(1.0, 16);
    const auto pair = KernelPair::fractional(0.5);
    const auto z = zero_forcing(p, grid);
    const NodalField u0 = sample_field(p, bump(1.0, 0.5, 0.3));
    const auto h = solve(p, pair, kPme, grid, u0, z);
    const auto a = energy_audit(h, p, pair, z, 1.0);
    EXPECT_EQ(a.bound, 0.0);
    EXPECT_GT(a.lhs, 0.0);
    EXPECT_FALSE(a.pass);
    EXPECT_TRUE(a.pass_with_initial);
}

TEST(Stepper, HphiProbeFires) {
    const auto p = line(8);
    const auto grid = TimeGrid::uniform(1.0, 4);
    // phi'(r) = 2|r| drops below mu = 5 just outside |r| = R = 1.
    try {
        solve(p, KernelPair::fractional(0.5), NonlinearityProfile::porous_medium(2.0, 5.0, 1.0), grid,
              p.zero_field(), zero_forcing(p, grid));
        FAIL() << "probe did not fire";
    } catch (const HypothesisViolation& e) {
        EXPECT_EQ(e.hypothesis(), "Hphi");
    }
    SolverOptions off;
    off.probe_hypotheses = false;
    EXPECT_NO_THROW(solve(p, KernelPair::fractional(0.5), NonlinearityProfile::porous_medium(2.0, 5.0, 1.0),
                          grid, p.zero_field(), zero_forcing(p, grid), off));
}
