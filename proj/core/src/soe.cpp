#include "fracpme/soe.hpp"

#include "fracpme/errors.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fracpme {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

// Laplace density of k in the variable x = log(s): k(t) = int rho(x) exp(-e^x t) dx.
double log_density(const KernelPair& pair, double x) {
    if (pair.family() == KernelFamily::UltraSlow) {
        // int_0^1 g_beta dbeta has density (1/pi) int_0^1 sin(pi beta) s^{-beta} dbeta,
        // which integrates in closed form.
        return (std::exp(x) + 1.0) / (x * x + kPi * kPi);
    }
    const double a = pair.alpha();
    return std::sin(kPi * a) / kPi * std::exp(a * x);
}

struct TailMoments {
    double mass = 0.0;
    double first = 0.0;
};

// Trapezoid nodes x_top, x_top - h, ... summed to -infinity.
TailMoments lower_tail(const KernelPair& pair, double x_top, double h) {
    TailMoments out;
    if (pair.family() != KernelFamily::UltraSlow) {
        const double a = pair.alpha();
        const double c = std::sin(kPi * a) / kPi;
        out.mass = h * c * std::exp(a * x_top) / -std::expm1(-a * h);
        out.first = h * c * std::exp((1.0 + a) * x_top) / -std::expm1(-(1.0 + a) * h);
        return out;
    }
    // rho ~ 1/x^2 decays slowly: sum explicitly, then close with Euler-Maclaurin.
    constexpr double x_floor = -2.0e4;
    double x = x_top;
    for (; x > x_floor; x -= h) {
        const double w = h * log_density(pair, x);
        out.mass += w;
        out.first += w * std::exp(x);
    }
    const double f = 1.0 / (x * x + kPi * kPi);
    out.mass += std::atan(kPi / std::abs(x)) / kPi + 0.5 * h * f;
    return out;
}

std::vector<ExponentialMode> build_modes(const KernelPair& pair, double h, double x_merge,
                                         double x_top) {
    std::vector<ExponentialMode> modes;
    const TailMoments tail = lower_tail(pair, x_merge, h);
    if (tail.mass > 0.0) {
        modes.push_back({tail.mass, tail.first / tail.mass});
    }
    for (double x = x_merge + h; x <= x_top; x += h) {
        modes.push_back({h * log_density(pair, x), std::exp(x)});
    }
    if (pair.family() == KernelFamily::Tempered) {
        for (auto& m : modes) m.rate += pair.gamma();
    }
    return modes;
}

}  // namespace

SoECompression SoECompression::compress(const KernelPair& pair, double tol, double delta,
                                        double horizon, std::size_t max_modes) {
    if (!(tol > 0.0) || !(tol < 1.0)) {
        throw ConfigError("SoE tolerance must lie in (0,1)");
    }
    if (!(delta > 0.0) || !(delta < horizon)) {
        throw ConfigError("SoE interval needs 0 < delta < T");
    }
    const double log_tol = std::log(10.0 / tol);
    // The integrand is analytic in the strip |Im x| < pi/2, so the trapezoid error
    // behaves like exp(-pi^2 / h).
    double h = kPi * kPi / (log_tol + 2.0);
    double x_top = std::log((std::log(1.0 / tol) + 10.0) / delta) + 1.0;
    const double x_merge = std::log(0.1 * std::sqrt(tol) / horizon);

    // Infinity unless some candidate within the cap was actually measured.
    double achieved = std::numeric_limits<double>::infinity();
    for (;;) {
        SoECompression soe;
        soe.modes_ = build_modes(pair, h, x_merge, x_top);
        soe.delta_ = delta;
        soe.horizon_ = horizon;
        soe.certified_tol_ = tol;
        if (soe.modes_.size() > max_modes) break;
        achieved = soe_max_error(pair, soe, 2000);
        soe.achieved_ = achieved;
        if (achieved <= tol) return soe;
        h *= 0.75;
        x_top += 1.0;
    }
    std::ostringstream msg;
    msg << "SoE compression of " << pair.describe() << " cannot reach tol " << tol
        << " within " << max_modes << " modes (achieved " << achieved << ")";
    throw AccuracyError(msg.str(), achieved);
}

double SoECompression::evaluate(double t) const {
    double sum = 0.0;
    for (const auto& m : modes_) sum += m.weight * std::exp(-m.rate * t);
    return sum;
}

SoECompression SoECompression::shifted(double gamma) const {
    SoECompression out(*this);
    for (auto& m : out.modes_) m.rate += gamma;
    return out;
}

SoECompression soe_compress(const KernelPair& pair, double tol, double delta, double horizon) {
    return SoECompression::compress(pair, tol, delta, horizon);
}

double soe_max_error(const KernelPair& pair, const SoECompression& soe, std::size_t samples) {
    double worst = 0.0;
    for (double t : log_spaced(soe.delta(), soe.horizon(), samples)) {
        const double exact = pair.k(t);
        worst = std::max(worst, std::abs(exact - soe.evaluate(t)) / std::max(1.0, exact));
    }
    return worst;
}

}  // namespace fracpme
