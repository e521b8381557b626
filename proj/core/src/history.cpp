#include "fracpme/history.hpp"

#include "fracpme/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace fracpme {

std::string to_string(MemoryPath path) {
    return path == MemoryPath::Naive ? "naive" : "soe";
}

MemoryPath parse_memory_path(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "naive") return MemoryPath::Naive;
    if (lower == "soe") return MemoryPath::SoE;
    throw ConfigError("memory.path must be 'naive' or 'soe' (got '" + name + "')");
}

void MemoryHistory::check_push(std::size_t n, std::size_t size) const {
    if (n != pushed_ + 1) {
        throw InternalError("memory history expects increment " + std::to_string(pushed_ + 1) +
                            ", got " + std::to_string(n));
    }
    if (size != width_) throw InternalError("memory history increment has wrong width");
}

void MemoryHistory::check_lagged(std::size_t n, std::size_t size) const {
    // The recurrence state only represents the lag at the very next step.
    if (n != pushed_ + 1) {
        throw InternalError("memory history holds steps up to " + std::to_string(pushed_) +
                            ", cannot form the lag for step " + std::to_string(n));
    }
    if (size != width_) throw InternalError("memory history output has wrong width");
}

NaiveHistory::NaiveHistory(ConvolutionWeights weights, std::size_t width)
    : MemoryHistory(width), weights_(std::move(weights)) {
    increments_.reserve(weights_.steps() * width);
}

void NaiveHistory::lagged(std::size_t n, std::span<double> out) const {
    if (n == 0 || pushed_ + 1 < n) {
        throw InternalError("memory history is missing step before " + std::to_string(n));
    }
    if (out.size() != width_) throw InternalError("memory history output has wrong width");
    std::fill(out.begin(), out.end(), 0.0);
    double* dst = out.data();
    for (std::size_t j = 1; j < n; ++j) {
        const double w = weights_(n, j);
        const double* inc = increments_.data() + (j - 1) * width_;
        for (std::size_t i = 0; i < width_; ++i) dst[i] += w * inc[i];
    }
}

void NaiveHistory::push(std::size_t n, std::span<const double> increment) {
    check_push(n, increment.size());
    increments_.insert(increments_.end(), increment.begin(), increment.end());
    ++pushed_;
}

SoEHistory::SoEHistory(const KernelPair& pair, const TimeGrid& grid, double tol, std::size_t width)
    : MemoryHistory(width), grid_(grid) {
    const std::size_t steps = grid.steps();
    if (steps >= 2) {
        soe_ = SoECompression::compress(pair, tol, grid.min_dt(), grid.horizon());
        state_.assign(soe_->size() * width, 0.0);
    }
    if (grid.is_uniform()) {
        diag_.assign(1, pair.cell_integral(0.0, grid.dt(1)) / grid.dt(1));
    } else {
        diag_.resize(steps);
        for (std::size_t n = 1; n <= steps; ++n) {
            diag_[n - 1] = pair.cell_integral(0.0, grid.dt(n)) / grid.dt(n);
        }
    }
}

double SoEHistory::diagonal(std::size_t n) const {
    if (n == 0 || n > grid_.steps()) throw InternalError("diagonal weight index out of range");
    return diag_.size() == 1 ? diag_[0] : diag_[n - 1];
}

void SoEHistory::lagged(std::size_t n, std::span<double> out) const {
    check_lagged(n, out.size());
    std::fill(out.begin(), out.end(), 0.0);
    if (!soe_) return;
    const auto& modes = soe_->modes();
    double* dst = out.data();
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const double w = modes[m].weight;
        const double* h = state_.data() + m * width_;
        for (std::size_t i = 0; i < width_; ++i) dst[i] += w * h[i];
    }
}

void SoEHistory::push(std::size_t n, std::span<const double> increment) {
    check_push(n, increment.size());
    ++pushed_;
    if (!soe_ || n >= grid_.steps()) return;
    // H(n+1) = e^{-lambda dt_{n+1}} (H(n) + c(dt_n) du_n),  c(dt) = (1 - e^{-lambda dt}) / (lambda dt)
    const double dt_n = grid_.dt(n);
    const double dt_next = grid_.dt(n + 1);
    const auto& modes = soe_->modes();
    const double* du = increment.data();
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const double x = modes[m].rate * dt_n;
        const double c = x < 1e-12 ? 1.0 - 0.5 * x : -std::expm1(-x) / x;
        const double decay = std::exp(-modes[m].rate * dt_next);
        double* h = state_.data() + m * width_;
        for (std::size_t i = 0; i < width_; ++i) h[i] = decay * (h[i] + c * du[i]);
    }
}

std::unique_ptr<MemoryHistory> make_history(MemoryPath path, const KernelPair& pair,
                                            const TimeGrid& grid, std::size_t width,
                                            double soe_tol) {
    if (path == MemoryPath::SoE) {
        return std::make_unique<SoEHistory>(pair, grid, soe_tol, width);
    }
    return std::make_unique<NaiveHistory>(ConvolutionWeights::build(pair, grid), width);
}

std::vector<double> history_term(const ConvolutionWeights& weights,
                                 const std::vector<std::vector<double>>& u_history, std::size_t n) {
    if (n == 0 || n > weights.steps()) throw InternalError("history_term step out of range");
    if (u_history.size() < n) {
        throw InternalError("history_term needs steps 0.." + std::to_string(n - 1) + ", have " +
                            std::to_string(u_history.size()));
    }
    const std::size_t width = u_history.front().size();
    std::vector<double> out(width, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        if (u_history[j].size() != width || u_history[j - 1].size() != width) {
            throw InternalError("history_term fields have inconsistent widths");
        }
        const double w = weights(n, j);
        for (std::size_t i = 0; i < width; ++i) {
            out[i] += w * (u_history[j][i] - u_history[j - 1][i]);
        }
    }
    return out;
}

std::vector<double> history_term(const MemoryHistory& state, std::size_t n) {
    std::vector<double> out(state.width());
    state.lagged(n, out);
    return out;
}

}  // namespace fracpme
