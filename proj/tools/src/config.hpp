#pragma once

#include "fracpme/data.hpp"
#include "fracpme/kernel.hpp"
#include "fracpme/nonlinearity.hpp"
#include "fracpme/space.hpp"
#include "fracpme/stepper.hpp"
#include "fracpme/time_grid.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fracpme::cli {

/// Flat "section.key" -> value view of an INI file plus command-line overrides.
/// Lookups record the key so unknown keys can be reported.
class KeyValues {
public:
    static KeyValues from_file(const std::filesystem::path& path);
    /// "section.key=value"; later calls win.
    void set(const std::string& assignment);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    bool has_section(const std::string& section) const;
    std::string text(const std::string& key, const std::string& fallback) const;
    double real(const std::string& key, double fallback) const;
    std::size_t count(const std::string& key, std::size_t fallback) const;
    std::uint64_t seed(const std::string& key, std::uint64_t fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<int> ints(const std::string& key, const std::vector<int>& fallback) const;

    /// Sorted key=value lines; the config hash is taken over this text.
    std::string canonical() const;
    const std::map<std::string, std::string>& values() const noexcept { return values_; }
    const std::filesystem::path& base_dir() const noexcept { return base_dir_; }

private:
    std::map<std::string, std::string> values_;
    std::filesystem::path base_dir_ = ".";
};

/// Thrown for bad configuration; `path` names the offending field.
class FieldError : public ConfigError {
public:
    FieldError(std::string path, const std::string& what)
        : ConfigError("config error at " + path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct KernelSpec {
    KernelFamily family = KernelFamily::Fractional;
    double alpha = 0.5;
    double gamma = 0.0;
};

struct NonlinearitySpec {
    NonlinearityKind kind = NonlinearityKind::PorousMedium;
    double exponent = 2.0;
    double mu = 1.0;
    double R = 1.0;
    std::filesystem::path table;
};

struct MeshConfig {
    MeshSpec mesh;
    double nu = 1.0;
    double coefficient = 1.0;
    /// A(t) = coefficient * (1 + oscillation sin(2 pi t / T)) I.
    double oscillation = 0.0;
};

struct TimeSpec {
    double horizon = 1.0;
    std::size_t steps = 64;
    double grading = 1.0;
};

struct DataSpec {
    SpaceProfile profile;
    TimeProfile time;         // forcing only
    std::filesystem::path file;  // CSV field, overrides profile (initial data only)
};

struct VerifySpec {
    std::vector<std::string> checks{"contraction", "entropy_contraction", "entropy", "weak", "energy"};
    std::uint64_t battery_seed = 0;
    std::vector<double> delta_list{0.05, 0.2, 0.5};
    double psi_scale = 0.5;
    double entropy_tol = 1e-4;
    double weak_tol = 1e-8;
    std::vector<double> energy_levels{0.5, 1.0, 2.0};
    /// "two_level", "none" or a number.
    std::string allowance = "two_level";
};

struct CascadeSpec {
    std::vector<int> m_ladder{1, 2, 4, 8};
    std::vector<int> n_ladder{1, 2, 4, 8};
    /// Relative to ||u0||_1 + ||f||_{L^1(Q_T)}.
    double tol = 1e-3;
    std::size_t threads = 0;
};

struct LadderEntry {
    std::size_t nx = 0;
    std::size_t nt = 0;
};

struct ConvergenceSpec {
    std::vector<LadderEntry> ladder{{16, 32}, {32, 64}, {64, 128}};
    bool has_expected = false;
    double expected_order = 0.0;
    double order_tol = 0.3;
};

struct RunConfig {
    KernelSpec kernel;
    NonlinearitySpec nonlinearity;
    MeshConfig mesh;
    TimeSpec time;
    DataSpec initial;
    DataSpec forcing;
    DataSpec pair_initial;
    DataSpec pair_forcing;
    bool has_pair = false;
    SolverOptions solver;
    VerifySpec verify;
    CascadeSpec cascade;
    ConvergenceSpec convergence;
    std::filesystem::path output_dir;
    bool dump_steps = false;
    std::string canonical;

    KernelPair kernel_pair() const;
    NonlinearityProfile profile() const;
    SpatialProblem problem() const;
    SpatialProblem problem(std::size_t cells) const;
    TimeGrid grid() const;
    TimeGrid grid(std::size_t steps) const;
    NodalField initial_field(const SpatialProblem& p, const DataSpec& spec) const;
    SpaceTimeField forcing_field(const SpatialProblem& p, const TimeGrid& g, const DataSpec& spec) const;
};

/// Parses and cross-validates everything before any compute. Unknown keys are errors.
RunConfig parse_config(const KeyValues& kv, const std::string& subcommand);

std::vector<LadderEntry> parse_ladder(const std::string& path, const std::string& text);
std::vector<int> parse_int_list(const std::string& path, const std::string& text);
std::vector<double> parse_real_list(const std::string& path, const std::string& text);

}  // namespace fracpme::cli
