#include "fracpme/errors.hpp"
#include "fracpme/nonlinearity.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

using namespace fracpme;

namespace {

std::vector<NonlinearityProfile> profiles() {
    return {NonlinearityProfile::identity(), NonlinearityProfile::porous_medium(2.0, 2.0, 1.0),
            NonlinearityProfile::porous_medium(3.5, 1.0, 1.0),
            NonlinearityProfile::custom({-3, -1, 0, 0.5, 2, 4}, {-10, -1.5, 0, 0.2, 3, 12}, 1.0, 1.0)};
}

}  // namespace

TEST(Nonlinearity, PorousMediumExamples) {
    const auto p = NonlinearityProfile::porous_medium(2.0, 2.0, 1.0);
    EXPECT_DOUBLE_EQ(phi(p, 3.0), 9.0);
    EXPECT_DOUBLE_EQ(phi(p, -3.0), -9.0);
    EXPECT_DOUBLE_EQ(phi_prime(p, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(phi_prime(p, -1.5), 3.0);
    EXPECT_DOUBLE_EQ(b_inverse(p, 9.0), 3.0);
    EXPECT_NEAR(b_inverse(p, phi(p, 1.7)), 1.7, 1e-12);
    const auto id = NonlinearityProfile::identity();
    for (double x : {-2.0, 0.0, 0.3}) EXPECT_EQ(phi(id, x), x);
}

TEST(Nonlinearity, MonotoneRoundTripAndOrigin) {
    std::mt19937_64 rng(1);
    for (const auto& p : profiles()) {
        EXPECT_EQ(p.phi(0.0), 0.0);
        EXPECT_EQ(p.b_inverse(0.0), 0.0);
        const double lo = std::max(p.r_min(), -20.0), hi = std::min(p.r_max(), 20.0);
        std::uniform_real_distribution<double> u(lo, hi);
        std::vector<double> r(500);
        for (auto& x : r) x = u(rng);
        std::sort(r.begin(), r.end());
        for (std::size_t i = 1; i < r.size(); ++i) {
            if (r[i] > r[i - 1]) EXPECT_LT(p.phi(r[i - 1]), p.phi(r[i])) << p.describe();
        }
        for (double x : r) EXPECT_NEAR(p.b_inverse(p.phi(x)), x, 1e-12 * std::max(1.0, std::abs(x)));
    }
}

TEST(Nonlinearity, DerivativeMatchesCentralDifferences) {
    std::mt19937_64 rng(2);
    for (const auto& p : profiles()) {
        const double lo = std::max(p.r_min() + 1e-3, -5.0), hi = std::min(p.r_max() - 1e-3, 5.0);
        std::uniform_real_distribution<double> u(lo, hi);
        for (int i = 0; i < 300; ++i) {
            const double x = u(rng);
            if (std::abs(x) < 1e-3) continue;
            const double h = 1e-5;
            const double fd = (p.phi(x + h) - p.phi(x - h)) / (2 * h);
            EXPECT_NEAR(p.phi_prime(x), fd, 1e-6 * std::max(1.0, std::abs(fd))) << p.describe() << x;
        }
    }
}

TEST(Nonlinearity, CustomTableValidation) {
    EXPECT_THROW(NonlinearityProfile::custom({-1, 0, 1}, {-1, 0.5, 0.4}, 1, 0), InputError);
    EXPECT_THROW(NonlinearityProfile::custom({0.5, 1, 2}, {0.5, 1, 2}, 1, 0), InputError);
    EXPECT_THROW(NonlinearityProfile::custom({-1, 0, 1}, {-1, 0.1, 1}, 1, 0), InputError);
    const auto c = NonlinearityProfile::custom({-2, 0, 2}, {-4, 0, 4}, 1, 0);
    EXPECT_THROW(c.b_inverse(5.0), RangeError);
    EXPECT_THROW(c.phi(3.0), RangeError);
}

TEST(Nonlinearity, CustomFromCsv) {
    const std::string path = ::testing::TempDir() + "fracpme_phi.csv";
    {
        std::ofstream out(path);
        out << "r,phi\n-2,-8\n0,0\n1,1\n2,8\n";
    }
    const auto c = NonlinearityProfile::custom_from_csv(path, 1.0, 1.0);
    EXPECT_NEAR(c.phi(1.0), 1.0, 1e-15);
    EXPECT_NEAR(c.b_inverse(c.phi(1.3)), 1.3, 1e-12);
    std::remove(path.c_str());
    EXPECT_THROW(NonlinearityProfile::custom_from_csv(path, 1.0, 1.0), Error);
}

TEST(Nonlinearity, TruncationIsClampAndLipschitz) {
    EXPECT_EQ(truncate_T(2, 5), 2);
    EXPECT_EQ(truncate_T(2, -5), -2);
    EXPECT_EQ(truncate_T(2, 1), 1);
    EXPECT_THROW(truncate_T(0.0, 1.0), DomainError);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0, 5);
    for (int i = 0; i < 1000; ++i) {
        const double a = g(rng), b = g(rng), k = std::abs(g(rng)) + 0.01;
        EXPECT_LE(std::abs(truncate_T(k, a) - truncate_T(k, b)), std::abs(a - b));
    }
}

TEST(Nonlinearity, HEps) {
    EXPECT_EQ(h_eps(HVariant::Plus, 0.3, 0.0), 0.0);
    EXPECT_EQ(h_eps(HVariant::Minus, 0.3, 0.0), 0.0);
    EXPECT_EQ(h_eps(HVariant::Plus, 1.0, -3.0), 0.0);
    EXPECT_NEAR(h_eps(HVariant::Plus, 1e-6, 3.0), 3.0, 1e-6);
    EXPECT_NEAR(h_eps(HVariant::Minus, 1e-6, -3.0), 3.0, 1e-6);
    EXPECT_NEAR(h_eps(HVariant::Plus, 1.0, 1.0), std::sqrt(2.0) - 1.0, 1e-15);
    // Tiny eps relative to y: no cancellation.
    EXPECT_NEAR(h_eps(HVariant::Plus, 1e3, 1e-5), 0.5e-13, 1e-25);
    EXPECT_THROW(h_eps(HVariant::Plus, 0.0, 1.0), DomainError);
    double prev = 0.0;
    for (double y = 0.0; y < 5.0; y += 0.1) {
        const double h = h_eps(HVariant::Plus, 0.2, y);
        EXPECT_GE(h, prev);
        prev = h;
    }
}

TEST(EntropyS, AdmissibleFamilyInvariants) {
    for (auto [k, e] : {std::pair{0.1, 0.05}, std::pair{1.0, 0.5}, std::pair{10.0, 1.0}}) {
        const auto s = entropy_S(k, e);
        EXPECT_EQ(eval_S(s, 0.0), 0.0);
        EXPECT_EQ(eval_S_prime(s, k + 2 * e), 0.0);
        EXPECT_EQ(eval_S_prime(s, -(k + 2 * e)), 0.0);
        double max_slope = 0.0, integral = 0.0;
        const double lo = -(k + e) * 1.5, hi = (k + e) * 1.5;
        const std::size_t n = 20000;
        const double dx = (hi - lo) / n;
        for (std::size_t i = 0; i <= n; ++i) {
            const double x = lo + dx * i;
            const double sp = eval_S_prime(s, x);
            EXPECT_GE(sp, 0.0);
            max_slope = std::max(max_slope, sp);
            integral += sp * dx;
            EXPECT_NEAR(eval_S(s, -x), -eval_S(s, x), 1e-14);
            if (std::abs(x) > k + e) EXPECT_EQ(sp, 0.0);
        }
        EXPECT_LE(max_slope, 1.0 + 1e-12);
        EXPECT_LE(integral, 2 * (k + e) + 1e-9);
        // S is the antiderivative of S'.
        const double mid = 0.5 * (k + (k + e));
        double q = 0.0;
        const std::size_t m = 4000;
        for (std::size_t i = 0; i < m; ++i) q += eval_S_prime(s, (i + 0.5) * mid / m) * mid / m;
        EXPECT_NEAR(eval_S(s, mid), q, 1e-6);
    }
    EXPECT_THROW(entropy_S(0.0, 1.0), ConfigError);
}

TEST(Hphi, Examples) {
    EXPECT_TRUE(validate_hphi(NonlinearityProfile::identity(1.0, 0.0)).pass);
    EXPECT_TRUE(validate_hphi(NonlinearityProfile::porous_medium(2.0, 2.0, 1.0)).pass);
    const auto bad = validate_hphi(NonlinearityProfile::porous_medium(2.0, 0.5, 0.0));
    EXPECT_FALSE(bad.pass);
    EXPECT_LT(bad.min_slope, 0.5);
}

TEST(Nonlinearity, ParseKind) {
    EXPECT_EQ(parse_nonlinearity_kind("PME"), NonlinearityKind::PorousMedium);
    EXPECT_EQ(parse_nonlinearity_kind("identity"), NonlinearityKind::Identity);
    EXPECT_THROW(parse_nonlinearity_kind("cubic"), ConfigError);
    EXPECT_THROW(NonlinearityProfile::porous_medium(1.0, 1.0, 0.0), ConfigError);
}
