#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fracpme {

/// Time nodes 0 = t_0 < t_1 < ... < t_N = T.
///
/// Uniform grids are flagged so that convolution weights can use Toeplitz storage.
/// Graded grids t_n = T (n/N)^r cluster nodes near t = 0, where memory-type
/// solutions behave like t^alpha.
class TimeGrid {
public:
    static TimeGrid uniform(double horizon, std::size_t steps);
    static TimeGrid graded(double horizon, std::size_t steps, double grading);
    /// Arbitrary nodes; must start at 0 and be strictly increasing.
    static TimeGrid from_nodes(std::vector<double> nodes);

    double horizon() const noexcept { return nodes_.back(); }
    std::size_t steps() const noexcept { return nodes_.size() - 1; }
    double t(std::size_t n) const { return nodes_[n]; }
    /// Length of cell (t_{n-1}, t_n], n >= 1.
    double dt(std::size_t n) const { return nodes_[n] - nodes_[n - 1]; }
    double min_dt() const noexcept { return min_dt_; }
    double grading() const noexcept { return grading_; }
    bool is_uniform() const noexcept { return uniform_; }
    std::span<const double> nodes() const noexcept { return nodes_; }

    bool operator==(const TimeGrid& other) const { return nodes_ == other.nodes_; }

private:
    TimeGrid(std::vector<double> nodes, bool uniform, double grading);

    std::vector<double> nodes_;
    bool uniform_ = false;
    double grading_ = 1.0;
    double min_dt_ = 0.0;
};

}  // namespace fracpme
