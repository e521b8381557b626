#include "fracpme/kernel.hpp"

#include "fracpme/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace fracpme {

namespace {

namespace bq = boost::math::quadrature;

// Relative target for every nested quadrature; keeps absolute errors near 1e-12.
constexpr double kQuadTol = 1e-13;

template <class F>
double integrate_gk(F&& f, double a, double b, double tol = kQuadTol) {
    double error = 0.0;
    return bq::gauss_kronrod<double, 31>::integrate(f, a, b, 25, tol, &error);
}

double inv_gamma_1p(double beta) {
    return 1.0 / boost::math::tgamma(1.0 + beta);
}

// J_p(y) = int_0^1 beta^p e^{-beta y} / Gamma(1 + beta) dbeta.
// For y > 1 the integrand concentrates near beta = 0 on a 1/y scale; the
// substitution x = beta y spreads it over [0, y].
double ultraslow_moment(int power, double y) {
    if (y > 1.0) {
        const double upper = std::min(y, 60.0);
        auto f = [&](double x) {
            return std::pow(x, power) * std::exp(-x) * inv_gamma_1p(x / y);
        };
        return integrate_gk(f, 0.0, upper) / std::pow(y, power + 1);
    }
    auto f = [&](double beta) {
        return std::pow(beta, power) * std::exp(-beta * y) * inv_gamma_1p(beta);
    };
    return integrate_gk(f, 0.0, 1.0);
}

void require_positive_time(double t, const char* what) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        std::ostringstream msg;
        msg << what << " requires t > 0 (got " << t << ")";
        throw DomainError(msg.str());
    }
}

}  // namespace

std::string to_string(KernelFamily family) {
    switch (family) {
    case KernelFamily::Fractional: return "fractional";
    case KernelFamily::Tempered: return "tempered";
    case KernelFamily::UltraSlow: return "ultraslow";
    }
    return "unknown";
}

KernelFamily parse_kernel_family(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "fractional") return KernelFamily::Fractional;
    if (lower == "tempered") return KernelFamily::Tempered;
    if (lower == "ultraslow" || lower == "ultra_slow" || lower == "ultra-slow") {
        return KernelFamily::UltraSlow;
    }
    throw ConfigError("unknown kernel family '" + name + "'");
}

double g_beta(double beta, double t) {
    require_positive_time(t, "g_beta");
    return std::pow(t, beta - 1.0) / boost::math::tgamma(beta);
}

KernelPair::KernelPair(KernelFamily family, double alpha, double gamma, double horizon)
    : family_(family), alpha_(alpha), gamma_(gamma), horizon_(horizon) {
    if (!(horizon > 0.0)) {
        throw ConfigError("kernel horizon T must be positive");
    }
    if (family != KernelFamily::UltraSlow) {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw ConfigError("kernel alpha must lie strictly inside (0,1)");
        }
        // l = g_alpha (times a bounded factor) lies in L^p for p (1 - alpha) < 1.
        p_ = 0.5 * (1.0 + 1.0 / (1.0 - alpha));
    }
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw ConfigError("tempered kernel gamma must be non-negative");
    }
}

KernelPair KernelPair::fractional(double alpha, double horizon) {
    return KernelPair(KernelFamily::Fractional, alpha, 0.0, horizon);
}

KernelPair KernelPair::tempered(double alpha, double gamma, double horizon) {
    return KernelPair(KernelFamily::Tempered, alpha, gamma, horizon);
}

KernelPair KernelPair::ultra_slow(double horizon) {
    return KernelPair(KernelFamily::UltraSlow, 0.5, 0.0, horizon);
}

std::string KernelPair::describe() const {
    std::ostringstream out;
    out << to_string(family_);
    if (family_ == KernelFamily::Fractional) {
        out << "(alpha=" << alpha_ << ")";
    } else if (family_ == KernelFamily::Tempered) {
        out << "(alpha=" << alpha_ << ", gamma=" << gamma_ << ")";
    }
    return out.str();
}

double KernelPair::k(double t) const {
    require_positive_time(t, "eval_k");
    switch (family_) {
    case KernelFamily::Fractional:
        return std::pow(t, -alpha_) / boost::math::tgamma(1.0 - alpha_);
    case KernelFamily::Tempered:
        return std::exp(-gamma_ * t) * std::pow(t, -alpha_) / boost::math::tgamma(1.0 - alpha_);
    case KernelFamily::UltraSlow:
        return ultraslow_moment(1, -std::log(t)) / t;
    }
    return 0.0;
}

double KernelPair::k_times_t_at_log(double y) const {
    switch (family_) {
    case KernelFamily::Fractional:
        return std::exp(-(1.0 - alpha_) * y) / boost::math::tgamma(1.0 - alpha_);
    case KernelFamily::Tempered:
        return std::exp(-gamma_ * std::exp(-y)) * std::exp(-(1.0 - alpha_) * y) /
               boost::math::tgamma(1.0 - alpha_);
    case KernelFamily::UltraSlow:
        return ultraslow_moment(1, y);
    }
    return 0.0;
}

double KernelPair::l(double t) const {
    require_positive_time(t, "eval_l");
    switch (family_) {
    case KernelFamily::Fractional:
        return g_beta(alpha_, t);
    case KernelFamily::Tempered: {
        const double head = std::exp(-gamma_ * t) * g_beta(alpha_, t);
        if (gamma_ == 0.0) return head;
        return head + std::pow(gamma_, 1.0 - alpha_) * boost::math::gamma_p(alpha_, gamma_ * t);
    }
    case KernelFamily::UltraSlow: {
        // l(t) = int_0^inf e^{-x} / (t + x) dx. On [0,1] substitute x = t (e^z - 1),
        // which removes the log-type growth as t -> 0.
        const double z_end = std::log1p(1.0 / t);
        auto near = [&](double z) { return std::exp(-t * std::expm1(z)); };
        auto far = [&](double x) { return std::exp(-x) / (t + x); };
        return integrate_gk(near, 0.0, z_end) +
               integrate_gk(far, 1.0, std::numeric_limits<double>::infinity());
    }
    }
    return 0.0;
}

double KernelPair::k_integral(double t) const {
    if (t < 0.0) throw DomainError("k_integral requires t >= 0");
    if (t == 0.0) return 0.0;
    switch (family_) {
    case KernelFamily::Fractional:
        return std::pow(t, 1.0 - alpha_) / boost::math::tgamma(2.0 - alpha_);
    case KernelFamily::Tempered:
        if (gamma_ == 0.0) {
            return std::pow(t, 1.0 - alpha_) / boost::math::tgamma(2.0 - alpha_);
        }
        return std::pow(gamma_, alpha_ - 1.0) * boost::math::gamma_p(1.0 - alpha_, gamma_ * t);
    case KernelFamily::UltraSlow:
        return ultraslow_moment(0, -std::log(t));
    }
    return 0.0;
}

double KernelPair::l_integral(double t) const {
    if (t < 0.0) throw DomainError("l_integral requires t >= 0");
    if (t == 0.0) return 0.0;
    switch (family_) {
    case KernelFamily::Fractional:
        return std::pow(t, alpha_) / boost::math::tgamma(1.0 + alpha_);
    case KernelFamily::Tempered: {
        if (gamma_ == 0.0) return std::pow(t, alpha_) / boost::math::tgamma(1.0 + alpha_);
        const double g = gamma_;
        const double head = std::pow(g, -alpha_) * boost::math::gamma_p(alpha_, g * t);
        return head * (1.0 + g * t) -
               alpha_ * std::pow(g, -alpha_) * boost::math::gamma_p(alpha_ + 1.0, g * t);
    }
    case KernelFamily::UltraSlow: {
        // int_0^t l = int_0^inf (1 - e^{-st}) / (s (1 + s)) ds, with s = e^x.
        auto f = [&](double x) {
            const double s = std::exp(x);
            return -std::expm1(-s * t) / (1.0 + s);
        };
        const double inf = std::numeric_limits<double>::infinity();
        return integrate_gk(f, -inf, 0.0) + integrate_gk(f, 0.0, inf);
    }
    }
    return 0.0;
}

double KernelPair::cell_integral(double lo, double hi) const {
    if (!(lo >= 0.0 && hi > lo)) {
        throw DomainError("cell_integral requires 0 <= lo < hi");
    }
    const double width = hi - lo;
    // Away from the singularity at 0 the kernel is analytic on a wide ellipse
    // around the cell; Gauss-Legendre avoids the cancellation in K(hi) - K(lo).
    if (lo > 0.0 && width <= 0.25 * lo) {
        auto f = [&](double s) { return k(s); };
        if (width <= 1e-3 * lo) return bq::gauss<double, 2>::integrate(f, lo, hi);
        if (width <= 0.05 * lo) return bq::gauss<double, 4>::integrate(f, lo, hi);
        return bq::gauss<double, 8>::integrate(f, lo, hi);
    }
    return k_integral(hi) - k_integral(lo);
}

double eval_k(const KernelPair& pair, double t) { return pair.k(t); }
double eval_l(const KernelPair& pair, double t) { return pair.l(t); }

double sonine_convolution(const KernelPair& pair, double t) {
    require_positive_time(t, "sonine_residual");
    const double half = 0.5 * t;
    bq::tanh_sinh<double> ts;
    constexpr double ts_tol = 1e-12;

    // Left half: l singular at s = 0, k(t - s) smooth.
    auto left = [&](double s) { return s > 0.0 ? pair.l(s) * pair.k(t - s) : 0.0; };
    const double left_part = ts.integrate(left, 0.0, half, ts_tol);

    if (pair.family() != KernelFamily::UltraSlow) {
        auto right = [&](double r) { return r > 0.0 ? pair.k(r) * pair.l(t - r) : 0.0; };
        return left_part + ts.integrate(right, 0.0, half, ts_tol);
    }

    // UltraSlow: int_0^{t/2} k(r) l(t - r) dr has mass ~ 1/log(1/r) below r, far
    // beyond double range. With r = e^{-y}: int_{y0}^inf [r k(r)] l(t - e^{-y}) dy,
    // integrand ~ 1/y^2, and y = e^z on the tail gives exponential decay.
    const double y0 = -std::log(half);
    const double y_mid = std::max(y0, 1.0) + 1.0;
    auto in_y = [&](double y) {
        return pair.k_times_t_at_log(y) * pair.l(t - std::exp(-y));
    };
    auto in_z = [&](double z) {
        const double y = std::exp(z);
        if (!std::isfinite(y)) return 0.0;
        return pair.k_times_t_at_log(y) * y * pair.l(t - std::exp(-y));
    };
    const double body = integrate_gk(in_y, y0, y_mid, 1e-12);
    const double tail = integrate_gk(in_z, std::log(y_mid),
                                     std::numeric_limits<double>::infinity(), 1e-12);
    return left_part + body + tail;
}

double sonine_residual(const KernelPair& pair, std::span<const double> sample_grid) {
    double worst = 0.0;
    for (double t : sample_grid) {
        if (!(t > 0.0)) {
            throw DomainError("sonine_residual grid points must be positive");
        }
        worst = std::max(worst, std::abs(sonine_convolution(pair, t) - 1.0));
    }
    return worst;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0 && hi >= lo) || count == 0) {
        throw ConfigError("log_spaced needs 0 < lo <= hi and count >= 1");
    }
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

ConvolutionWeights ConvolutionWeights::build(const KernelPair& pair, const TimeGrid& grid) {
    return from_cell_integral([&](double lo, double hi) { return pair.cell_integral(lo, hi); },
                              grid);
}

ConvolutionWeights ConvolutionWeights::from_cell_integral(const CellIntegral& cell,
                                                          const TimeGrid& grid) {
    const std::size_t steps = grid.steps();
    if (grid.is_uniform()) {
        const double dt = grid.horizon() / static_cast<double>(steps);
        std::vector<double> toeplitz(steps);
        for (std::size_t m = 0; m < steps; ++m) {
            toeplitz[m] = cell(static_cast<double>(m) * dt, static_cast<double>(m + 1) * dt) / dt;
        }
        return ConvolutionWeights(grid, true, std::move(toeplitz));
    }
    std::vector<double> packed(steps * (steps + 1) / 2);
    for (std::size_t n = 1; n <= steps; ++n) {
        const double tn = grid.t(n);
        const std::size_t offset = n * (n - 1) / 2;
        for (std::size_t j = 1; j <= n; ++j) {
            const double lo = j == n ? 0.0 : tn - grid.t(j);
            const double hi = tn - grid.t(j - 1);
            packed[offset + j - 1] = cell(lo, hi) / grid.dt(j);
        }
    }
    return ConvolutionWeights(grid, false, std::move(packed));
}

double ConvolutionWeights::operator()(std::size_t n, std::size_t j) const {
    if (j < 1 || j > n || n > grid_.steps()) {
        throw InternalError("convolution weight index out of range");
    }
    if (uniform_) return data_[n - j];
    return data_[n * (n - 1) / 2 + j - 1];
}

void ConvolutionWeights::write_csv(std::ostream& out) const {
    out << "n,j,kappa\n";
    out.precision(17);
    for (std::size_t n = 1; n <= grid_.steps(); ++n) {
        for (std::size_t j = 1; j <= n; ++j) {
            out << n << ',' << j << ',' << (*this)(n, j) << '\n';
        }
    }
}

ConvolutionWeights conv_weights(const KernelPair& pair, const TimeGrid& grid) {
    return ConvolutionWeights::build(pair, grid);
}

}  // namespace fracpme
