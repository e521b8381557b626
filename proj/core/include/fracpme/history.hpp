#pragma once

#include "fracpme/kernel.hpp"
#include "fracpme/soe.hpp"
#include "fracpme/time_grid.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fracpme {

enum class MemoryPath { Naive, SoE };

std::string to_string(MemoryPath path);
MemoryPath parse_memory_path(const std::string& name);

/// Running state of the discrete memory derivative
///   D_n[u] = kappa[n][n] (u_n - u_{n-1}) + lagged_n,
///   lagged_n = sum_{j<n} kappa[n][j] (u_j - u_{j-1}),
/// for a field of fixed width. Increments are pushed in order 1, 2, ...
class MemoryHistory {
public:
    virtual ~MemoryHistory() = default;

    virtual MemoryPath path() const = 0;
    /// kappa[n][n], always exact.
    virtual double diagonal(std::size_t n) const = 0;
    /// Writes lagged_n into `out`. Requires increments 1..n-1 to have been pushed.
    virtual void lagged(std::size_t n, std::span<double> out) const = 0;
    /// Records u_n - u_{n-1}; n must equal pushed() + 1.
    virtual void push(std::size_t n, std::span<const double> increment) = 0;

    std::size_t pushed() const noexcept { return pushed_; }
    std::size_t width() const noexcept { return width_; }

protected:
    explicit MemoryHistory(std::size_t width) : width_(width) {}
    void check_push(std::size_t n, std::size_t size) const;
    void check_lagged(std::size_t n, std::size_t size) const;

    std::size_t width_;
    std::size_t pushed_ = 0;
};

/// Stores every increment and sums against the full weight table: O(n) per step.
class NaiveHistory final : public MemoryHistory {
public:
    NaiveHistory(ConvolutionWeights weights, std::size_t width);

    MemoryPath path() const override { return MemoryPath::Naive; }
    double diagonal(std::size_t n) const override { return weights_.diagonal(n); }
    void lagged(std::size_t n, std::span<double> out) const override;
    void push(std::size_t n, std::span<const double> increment) override;

    const ConvolutionWeights& weights() const noexcept { return weights_; }

private:
    ConvolutionWeights weights_;
    std::vector<double> increments_;  // row j-1 holds u_j - u_{j-1}
};

/// Exponential-mode recurrence: O(#modes) per step and node.
/// Off-diagonal cells see k only on [min dt, T], where the compression is certified.
class SoEHistory final : public MemoryHistory {
public:
    SoEHistory(const KernelPair& pair, const TimeGrid& grid, double tol, std::size_t width);

    MemoryPath path() const override { return MemoryPath::SoE; }
    double diagonal(std::size_t n) const override;
    void lagged(std::size_t n, std::span<double> out) const override;
    void push(std::size_t n, std::span<const double> increment) override;

    /// Empty for single-step grids, where no lagged term is ever needed.
    const std::optional<SoECompression>& compression() const noexcept { return soe_; }

private:
    TimeGrid grid_;
    std::optional<SoECompression> soe_;
    std::vector<double> diag_;
    std::vector<double> state_;  // mode-major: state_[i * width + node]
};

std::unique_ptr<MemoryHistory> make_history(MemoryPath path, const KernelPair& pair,
                                            const TimeGrid& grid, std::size_t width,
                                            double soe_tol);

/// Lagged memory term at step n from an explicit history u_0..u_{n-1}.
/// Throws InternalError if fewer than n states are supplied.
std::vector<double> history_term(const ConvolutionWeights& weights,
                                 const std::vector<std::vector<double>>& u_history, std::size_t n);
/// Same quantity from a running state that has absorbed increments 1..n-1.
std::vector<double> history_term(const MemoryHistory& state, std::size_t n);

}  // namespace fracpme
