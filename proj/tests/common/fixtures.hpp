#pragma once

#include "fracpme/data.hpp"
#include "fracpme/space.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace fracpme::testing {

inline SpatialProblem line(std::size_t cells, double length = 1.0) {
    MeshSpec mesh;
    mesh.dim = 1;
    mesh.length_x = length;
    mesh.cells_x = cells;
    return SpatialProblem(mesh, constant_coefficient(1.0), 1.0);
}

inline SpatialProblem square(std::size_t cells) {
    MeshSpec mesh;
    mesh.dim = 2;
    mesh.cells_x = cells;
    mesh.cells_y = cells;
    return SpatialProblem(mesh, constant_coefficient(1.0), 1.0);
}

inline SpaceProfile fourier(std::uint64_t seed, double amplitude, std::size_t modes = 6) {
    SpaceProfile p;
    p.kind = ProfileKind::RandomFourier;
    p.amplitude = amplitude;
    p.modes = modes;
    p.seed = seed;
    return p;
}

inline SpaceProfile bump(double amplitude, double center, double width) {
    SpaceProfile p;
    p.kind = ProfileKind::Bump;
    p.amplitude = amplitude;
    p.center = center;
    p.width = width;
    return p;
}

/// Non-negative bump with parameters drawn from `rng`.
inline SpaceProfile random_bump(std::mt19937_64& rng, double max_amplitude) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double width = 0.1 + 0.3 * u(rng);
    const double center = width + (1.0 - 2.0 * width) * u(rng);
    return bump(max_amplitude * (0.2 + 0.8 * u(rng)), center, width);
}

/// Point values sin(pi x) on every node.
inline NodalField sine_nodes(const SpatialProblem& problem) {
    NodalField out = problem.zero_field();
    for (std::size_t g = 0; g < problem.node_count(); ++g) {
        if (!problem.is_boundary(g)) {
            out[static_cast<Eigen::Index>(g)] =
                std::sin(3.14159265358979323846 * problem.coord(g).x() / problem.mesh().length_x);
        }
    }
    return out;
}

}  // namespace fracpme::testing
