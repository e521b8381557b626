#pragma once

#include "fracpme/kernel.hpp"

#include <cstddef>
#include <vector>

namespace fracpme {

struct ExponentialMode {
    double weight;
    double rate;
};

/// k(t) ~ sum_i w_i exp(-lambda_i t) on [delta, T], certified on a dense log grid:
///   |k(t) - sum| <= certified_tol * max(1, k(t)).
///
/// Built from the trapezoid rule in x = log(s) applied to k(t) = int_0^inf rho(s) e^{-st} ds.
/// Modes with lambda T below ~sqrt(tol) are folded into one mode by matching mass
/// and first moment, so the count grows like log(T/delta) + log(1/tol).
class SoECompression {
public:
    static constexpr std::size_t kDefaultModeCap = 400;

    /// Throws ConfigError for tol <= 0 or delta >= T, AccuracyError if the mode cap is hit.
    static SoECompression compress(const KernelPair& pair, double tol, double delta, double horizon,
                                   std::size_t max_modes = kDefaultModeCap);

    double evaluate(double t) const;
    /// Same modes with every rate shifted by gamma (multiplies the sum by e^{-gamma t}).
    SoECompression shifted(double gamma) const;

    const std::vector<ExponentialMode>& modes() const noexcept { return modes_; }
    std::size_t size() const noexcept { return modes_.size(); }
    double certified_tol() const noexcept { return certified_tol_; }
    /// Largest observed max(1,k)-relative error on the certification grid.
    double achieved_error() const noexcept { return achieved_; }
    double delta() const noexcept { return delta_; }
    double horizon() const noexcept { return horizon_; }

private:
    std::vector<ExponentialMode> modes_;
    double certified_tol_ = 0.0;
    double achieved_ = 0.0;
    double delta_ = 0.0;
    double horizon_ = 0.0;
};

SoECompression soe_compress(const KernelPair& pair, double tol, double delta, double horizon);

/// Max relative error max|k - sum| / max(1, k) over `samples` log-spaced points of [delta, T].
double soe_max_error(const KernelPair& pair, const SoECompression& soe, std::size_t samples);

}  // namespace fracpme
