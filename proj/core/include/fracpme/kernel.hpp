#pragma once

#include "fracpme/time_grid.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fracpme {

enum class KernelFamily { Fractional, Tempered, UltraSlow };

std::string to_string(KernelFamily family);
/// Parses "fractional", "tempered" or "ultraslow" (case-insensitive).
KernelFamily parse_kernel_family(const std::string& name);

/// g_beta(t) = t^(beta-1) / Gamma(beta), t > 0, beta > 0.
double g_beta(double beta, double t);

/// A Sonine pair (k, l) with k * l = 1 on (0, infinity).
///
/// Three families are supported:
///   Fractional(alpha):     k = g_{1-alpha},  l = g_alpha
///   Tempered(alpha, gamma): k = e^{-gamma t} g_{1-alpha},
///                          l = e^{-gamma t} g_alpha + gamma (1 * g_alpha e^{-gamma .})
///   UltraSlow:             k = int_0^1 g_beta dbeta,  l = int_0^inf e^{-st}/(1+s) ds
///
/// Every k is non-negative and non-increasing. Instances are immutable.
class KernelPair {
public:
    static KernelPair fractional(double alpha, double horizon = 1.0);
    /// gamma = 0 is accepted and reduces to the fractional pair.
    static KernelPair tempered(double alpha, double gamma, double horizon = 1.0);
    static KernelPair ultra_slow(double horizon = 1.0);

    KernelFamily family() const noexcept { return family_; }
    double alpha() const noexcept { return alpha_; }
    double gamma() const noexcept { return gamma_; }
    double horizon() const noexcept { return horizon_; }
    /// Exponent p > 1 with l in L^p(0,T); carried as metadata only.
    double l_integrability_p() const noexcept { return p_; }
    std::string describe() const;

    /// k(t), t > 0. Throws DomainError for t <= 0.
    double k(double t) const;
    /// l(t), t > 0. Throws DomainError for t <= 0.
    double l(double t) const;
    /// int_0^t k(s) ds, t >= 0.
    double k_integral(double t) const;
    /// int_0^t l(s) ds, t >= 0. k_integral-free closed forms where available.
    double l_integral(double t) const;
    /// int_lo^hi k(s) ds for 0 <= lo < hi, accurate also when hi - lo << lo.
    double cell_integral(double lo, double hi) const;

    /// t k(t) evaluated at t = exp(-y); finite for every real y.
    /// Used to resolve the UltraSlow singularity k(t) ~ 1 / (t log^2 t).
    double k_times_t_at_log(double y) const;

private:
    KernelPair(KernelFamily family, double alpha, double gamma, double horizon);

    KernelFamily family_;
    double alpha_ = 0.5;
    double gamma_ = 0.0;
    double horizon_ = 1.0;
    double p_ = 2.0;
};

double eval_k(const KernelPair& pair, double t);
double eval_l(const KernelPair& pair, double t);

/// (k * l)(t) by adaptive quadrature with the two endpoint singularities split at t/2.
double sonine_convolution(const KernelPair& pair, double t);
/// max over the grid of |(k * l)(t) - 1|. Grid points must be positive.
double sonine_residual(const KernelPair& pair, std::span<const double> sample_grid);

/// `count` log-spaced points in [lo, hi].
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// Product-integration weights for the memory derivative d/dt [k * (u - u_0)]:
///   kappa[n][j] = (1 / dt_j) int_{t_{j-1}}^{t_j} k(t_n - s) ds,  1 <= j <= n <= N,
/// so that d/dt [k * (u - u_0)](t_n) ~ sum_j kappa[n][j] (u_j - u_{j-1}).
/// Uniform grids store the Toeplitz sequence kappa[n - j] only.
class ConvolutionWeights {
public:
    /// int_lo^hi k(s) ds.
    using CellIntegral = std::function<double(double lo, double hi)>;

    static ConvolutionWeights build(const KernelPair& pair, const TimeGrid& grid);
    static ConvolutionWeights from_cell_integral(const CellIntegral& cell, const TimeGrid& grid);

    double operator()(std::size_t n, std::size_t j) const;
    double diagonal(std::size_t n) const { return (*this)(n, n); }
    bool uniform() const noexcept { return uniform_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t steps() const noexcept { return grid_.steps(); }

    /// Writes "n,j,kappa" rows for every 1 <= j <= n <= N.
    void write_csv(std::ostream& out) const;

private:
    ConvolutionWeights(TimeGrid grid, bool uniform, std::vector<double> data)
        : grid_(std::move(grid)), uniform_(uniform), data_(std::move(data)) {}

    TimeGrid grid_;
    bool uniform_;
    std::vector<double> data_;
};

ConvolutionWeights conv_weights(const KernelPair& pair, const TimeGrid& grid);

}  // namespace fracpme
