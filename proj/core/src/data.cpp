#include "fracpme/data.hpp"

#include "fracpme/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace fracpme {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double sine_average(double a, double b, double length) {
    const double k = kPi / length;
    return (std::cos(k * a) - std::cos(k * b)) / (k * (b - a));
}

}  // namespace

std::string to_string(ProfileKind kind) {
    switch (kind) {
    case ProfileKind::Zero: return "zero";
    case ProfileKind::Constant: return "constant";
    case ProfileKind::Sine: return "sine";
    case ProfileKind::Bump: return "bump";
    case ProfileKind::InverseSqrt: return "inverse_sqrt";
    case ProfileKind::Log: return "log";
    case ProfileKind::SignedInverseSqrt: return "signed_inverse_sqrt";
    case ProfileKind::RandomFourier: return "random_fourier";
    }
    return "unknown";
}

ProfileKind parse_profile_kind(const std::string& name) {
    const std::string s = lowercase(name);
    if (s == "zero") return ProfileKind::Zero;
    if (s == "constant") return ProfileKind::Constant;
    if (s == "sine") return ProfileKind::Sine;
    if (s == "bump") return ProfileKind::Bump;
    if (s == "inverse_sqrt") return ProfileKind::InverseSqrt;
    if (s == "log") return ProfileKind::Log;
    if (s == "signed_inverse_sqrt") return ProfileKind::SignedInverseSqrt;
    if (s == "random_fourier") return ProfileKind::RandomFourier;
    throw ConfigError("unknown data profile '" + name + "'");
}

std::string to_string(TimeKind kind) {
    switch (kind) {
    case TimeKind::Constant: return "constant";
    case TimeKind::Linear: return "linear";
    case TimeKind::Decay: return "decay";
    case TimeKind::Oscillating: return "oscillating";
    case TimeKind::InverseSqrt: return "inverse_sqrt";
    }
    return "unknown";
}

TimeKind parse_time_kind(const std::string& name) {
    const std::string s = lowercase(name);
    if (s == "constant") return TimeKind::Constant;
    if (s == "linear") return TimeKind::Linear;
    if (s == "decay") return TimeKind::Decay;
    if (s == "oscillating") return TimeKind::Oscillating;
    if (s == "inverse_sqrt") return TimeKind::InverseSqrt;
    throw ConfigError("unknown time profile '" + name + "'");
}

std::vector<double> SpaceProfile::fourier_coefficients() const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> a(modes);
    for (std::size_t k = 0; k < modes; ++k) {
        a[k] = amplitude * dist(rng) / static_cast<double>(k + 1);
    }
    return a;
}

bool SpaceProfile::varies_in_y() const noexcept {
    return kind == ProfileKind::Sine || kind == ProfileKind::Bump ||
           kind == ProfileKind::RandomFourier;
}

double SpaceProfile::value(double x, double length) const {
    const double c = center * length;
    const double w = width * length;
    switch (kind) {
    case ProfileKind::Zero: return 0.0;
    case ProfileKind::Constant: return amplitude;
    case ProfileKind::Sine: return amplitude * std::sin(kPi * x / length);
    case ProfileKind::Bump: {
        const double s = (x - c) / w;
        return std::abs(s) < 1.0 ? amplitude * (1.0 - s * s) * (1.0 - s * s) : 0.0;
    }
    case ProfileKind::InverseSqrt:
        return x > 0.0 ? amplitude / std::sqrt(x) : std::numeric_limits<double>::infinity();
    case ProfileKind::Log:
        return x > 0.0 ? -amplitude * std::log(x / length) : std::numeric_limits<double>::infinity();
    case ProfileKind::SignedInverseSqrt: {
        const double d = x - c;
        if (d == 0.0) return std::numeric_limits<double>::infinity();
        return std::copysign(amplitude / std::sqrt(std::abs(d)), d);
    }
    case ProfileKind::RandomFourier: {
        const auto a = fourier_coefficients();
        double sum = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            sum += a[k] * std::sin(static_cast<double>(k + 1) * kPi * x / length);
        }
        return sum;
    }
    }
    return 0.0;
}

double SpaceProfile::average(double a, double b, double length) const {
    if (!(b > a)) throw InternalError("profile average needs a < b");
    const double width_ab = b - a;
    switch (kind) {
    case ProfileKind::Zero: return 0.0;
    case ProfileKind::Constant: return amplitude;
    case ProfileKind::Sine: return amplitude * sine_average(a, b, length);
    case ProfileKind::Bump: {
        const double c = center * length;
        const double w = width * length;
        const double lo = std::max(a, c - w);
        const double hi = std::min(b, c + w);
        if (!(hi > lo)) return 0.0;
        auto f = [&](double x) { return value(x, length); };
        // Quartic on the support: 10-point Gauss-Legendre is exact.
        return boost::math::quadrature::gauss<double, 10>::integrate(f, lo, hi) / width_ab;
    }
    case ProfileKind::InverseSqrt:
        return 2.0 * amplitude * (std::sqrt(b) - std::sqrt(a)) / width_ab;
    case ProfileKind::Log: {
        auto prim = [&](double x) { return x > 0.0 ? x * std::log(x / length) - x : 0.0; };
        return -amplitude * (prim(b) - prim(a)) / width_ab;
    }
    case ProfileKind::SignedInverseSqrt: {
        const double c = center * length;
        auto prim = [&](double x) { return 2.0 * amplitude * std::sqrt(std::abs(x - c)); };
        return (prim(b) - prim(a)) / width_ab;
    }
    case ProfileKind::RandomFourier: {
        const auto coeffs = fourier_coefficients();
        double sum = 0.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            sum += coeffs[k] * sine_average(a, b, length / static_cast<double>(k + 1));
        }
        return sum;
    }
    }
    return 0.0;
}

double TimeProfile::average(double a, double b, double horizon) const {
    if (!(b > a)) throw InternalError("time profile average needs a < b");
    switch (kind) {
    case TimeKind::Constant: return 1.0;
    case TimeKind::Linear: return 0.5 * (a + b) / horizon;
    case TimeKind::Decay:
        if (rate == 0.0) return 1.0;
        return std::exp(-rate * a) * -std::expm1(-rate * (b - a)) / (rate * (b - a));
    case TimeKind::Oscillating: {
        const double k = 2.0 * kPi / horizon;
        return (std::cos(k * a) - std::cos(k * b)) / (k * (b - a));
    }
    case TimeKind::InverseSqrt: return 2.0 / (std::sqrt(a) + std::sqrt(b));
    }
    return 1.0;
}

NodalField sample_field(const SpatialProblem& problem, const SpaceProfile& profile) {
    NodalField out = problem.zero_field();
    if (profile.kind == ProfileKind::Zero) return out;
    const auto& mesh = problem.mesh();
    const double hx = problem.hx();
    const double hy = problem.hy();
    for (std::size_t g = 0; g < problem.node_count(); ++g) {
        const Eigen::Vector2d p = problem.coord(g);
        const double xa = std::max(0.0, p.x() - 0.5 * hx);
        const double xb = std::min(mesh.length_x, p.x() + 0.5 * hx);
        double value = profile.average(xa, xb, mesh.length_x);
        if (problem.dim() == 2 && profile.varies_in_y()) {
            const double ya = std::max(0.0, p.y() - 0.5 * hy);
            const double yb = std::min(mesh.length_y, p.y() + 0.5 * hy);
            value *= sine_average(ya, yb, mesh.length_y);
        }
        out[static_cast<Eigen::Index>(g)] = value;
    }
    return out;
}

SpaceTimeField sample_forcing(const SpatialProblem& problem, const TimeGrid& grid,
                              const SpaceProfile& profile, const TimeProfile& time) {
    SpaceTimeField out = zero_forcing(problem, grid);
    if (profile.kind == ProfileKind::Zero) return out;
    const NodalField shape = sample_field(problem, profile);
    for (std::size_t n = 1; n <= grid.steps(); ++n) {
        out[n] = time.average(grid.t(n - 1), grid.t(n), grid.horizon()) * shape;
    }
    return out;
}

SpaceTimeField zero_forcing(const SpatialProblem& problem, const TimeGrid& grid) {
    return SpaceTimeField(grid.steps() + 1, problem.zero_field());
}

NodalField load_field_csv(const SpatialProblem& problem, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open field file '" + path + "'");
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find_last_of(',');
        const std::string last = comma == std::string::npos ? line : line.substr(comma + 1);
        std::istringstream field(last);
        double v = 0.0;
        if (!(field >> v)) {
            if (values.empty()) continue;  // header
            throw InputError(path + ":" + std::to_string(line_no) + ": not a number");
        }
        if (!std::isfinite(v)) {
            throw InputError(path + ":" + std::to_string(line_no) + ": value is not finite");
        }
        values.push_back(v);
    }
    if (values.size() != problem.node_count()) {
        throw InputError(path + ": expected " + std::to_string(problem.node_count()) +
                         " node values, found " + std::to_string(values.size()));
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace fracpme
