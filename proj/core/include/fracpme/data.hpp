#pragma once

#include "fracpme/space.hpp"
#include "fracpme/time_grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fracpme {

/// Slices f_n, n = 0..N, on all nodes; slot 0 is unused by the scheme and kept at 0.
using SpaceTimeField = std::vector<NodalField>;

enum class ProfileKind {
    Zero,
    Constant,
    Sine,              // A sin(pi x / L)
    Bump,              // A (1 - ((x - c)/w)^2)^2 on |x - c| < w
    InverseSqrt,       // A / sqrt(x)
    Log,               // -A log(x / L)
    SignedInverseSqrt, // A sign(x - c) / sqrt|x - c|
    RandomFourier,     // sum_k a_k sin(k pi x / L), a_k ~ U(-A, A) / k
};

std::string to_string(ProfileKind kind);
ProfileKind parse_profile_kind(const std::string& name);

/// A closed-form profile in x. In 2D, Sine, Bump and RandomFourier are multiplied by
/// sin(pi y / L_y); the singular profiles are constant in y.
struct SpaceProfile {
    ProfileKind kind = ProfileKind::Zero;
    double amplitude = 1.0;
    double center = 0.5;  // fraction of L
    double width = 0.25;  // fraction of L
    std::size_t modes = 8;
    std::uint64_t seed = 1;

    /// Point value; singular profiles return +-infinity at their singularity.
    double value(double x, double length) const;
    /// (1 / (b - a)) int_a^b value, analytic where an antiderivative is available.
    double average(double a, double b, double length) const;
    bool varies_in_y() const noexcept;

    /// Random-Fourier coefficients a_1..a_modes (deterministic in seed).
    std::vector<double> fourier_coefficients() const;
};

enum class TimeKind {
    Constant,     // 1
    Linear,       // t / T
    Decay,        // exp(-rate t)
    Oscillating,  // sin(2 pi t / T)
    InverseSqrt,  // t^{-1/2}
};

std::string to_string(TimeKind kind);
TimeKind parse_time_kind(const std::string& name);

struct TimeProfile {
    TimeKind kind = TimeKind::Constant;
    double rate = 1.0;

    double average(double a, double b, double horizon) const;
};

/// Dual-cell averages of the profile at every node, so that l1_norm of the sample equals
/// the exact L^1 norm for sign-definite profiles.
NodalField sample_field(const SpatialProblem& problem, const SpaceProfile& profile);

/// f_n = (cell average of tau over (t_{n-1}, t_n]) * (dual-cell average of the profile).
SpaceTimeField sample_forcing(const SpatialProblem& problem, const TimeGrid& grid,
                              const SpaceProfile& profile, const TimeProfile& time);
SpaceTimeField zero_forcing(const SpatialProblem& problem, const TimeGrid& grid);

/// Reads a nodal field written by SpatialProblem::write_field_csv (last column is the value).
NodalField load_field_csv(const SpatialProblem& problem, const std::string& path);

}  // namespace fracpme
