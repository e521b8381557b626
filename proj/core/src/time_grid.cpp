#include "fracpme/time_grid.hpp"

#include "fracpme/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fracpme {

TimeGrid::TimeGrid(std::vector<double> nodes, bool uniform, double grading)
    : nodes_(std::move(nodes)), uniform_(uniform), grading_(grading) {
    if (nodes_.size() < 2) {
        throw ConfigError("time grid needs at least one step");
    }
    if (nodes_.front() != 0.0) {
        throw ConfigError("time grid must start at t = 0");
    }
    min_dt_ = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n < nodes_.size(); ++n) {
        const double step = nodes_[n] - nodes_[n - 1];
        if (!(step > 0.0) || !std::isfinite(nodes_[n])) {
            throw ConfigError("time grid is not strictly increasing at node " + std::to_string(n));
        }
        min_dt_ = std::min(min_dt_, step);
    }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
    if (!(horizon > 0.0) || steps < 1) {
        throw ConfigError("uniform time grid needs T > 0 and N_t >= 1");
    }
    std::vector<double> nodes(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) {
        nodes[n] = horizon * static_cast<double>(n) / static_cast<double>(steps);
    }
    nodes.back() = horizon;
    return TimeGrid(std::move(nodes), true, 1.0);
}

TimeGrid TimeGrid::graded(double horizon, std::size_t steps, double grading) {
    if (!(grading >= 1.0)) {
        throw ConfigError("time grading exponent must be >= 1");
    }
    if (grading == 1.0) {
        return uniform(horizon, steps);
    }
    if (!(horizon > 0.0) || steps < 1) {
        throw ConfigError("graded time grid needs T > 0 and N_t >= 1");
    }
    std::vector<double> nodes(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) {
        nodes[n] = horizon * std::pow(static_cast<double>(n) / static_cast<double>(steps), grading);
    }
    nodes.back() = horizon;
    return TimeGrid(std::move(nodes), false, grading);
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes) {
    return TimeGrid(std::move(nodes), false, 1.0);
}

}  // namespace fracpme
