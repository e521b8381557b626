#include "config.hpp"

#include "fracpme/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <sstream>

namespace fracpme::cli {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_real(const std::string& path, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(x)) {
        throw FieldError(path, "expected a finite number, got '" + text + "'");
    }
    return x;
}

long long to_integer(const std::string& path, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const long long x = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
        throw FieldError(path, "expected an integer, got '" + text + "'");
    }
    return x;
}

const std::set<std::string>& data_keys() {
    static const std::set<std::string> keys{"profile", "amplitude", "center", "width", "modes",
                                            "seed",    "file",      "time",   "rate"};
    return keys;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = [] {
        std::set<std::string> k{
            "kernel.family",        "kernel.alpha",          "kernel.gamma",
            "nonlinearity.kind",    "nonlinearity.exponent", "nonlinearity.mu",
            "nonlinearity.R",       "nonlinearity.table",    "mesh.dim",
            "mesh.cells_x",         "mesh.cells_y",          "mesh.length_x",
            "mesh.length_y",        "mesh.nu",               "mesh.coefficient",
            "mesh.oscillation",     "time.T",                "time.N_t",
            "time.grading",         "newton.tol",            "newton.max_iter",
            "newton.max_backtracks", "newton.regularization", "memory.path",
            "memory.soe_tol",       "verify.checks",         "verify.battery_seed",
            "verify.delta_list",    "verify.psi_scale",      "verify.entropy_tol",
            "verify.weak_tol",      "verify.energy_levels",  "verify.allowance",
            "cascade.m_ladder",     "cascade.n_ladder",      "cascade.tol",
            "cascade.threads",      "convergence.ladder",    "convergence.expected_order",
            "convergence.order_tol", "output.dir",           "output.dump_steps"};
        for (const char* section : {"initial", "forcing", "pair_initial", "pair_forcing"}) {
            for (const auto& key : data_keys()) k.insert(std::string(section) + "." + key);
        }
        return k;
    }();
    return keys;
}

const std::set<std::string>& check_names() {
    static const std::set<std::string> names{"contraction", "entropy_contraction", "entropy",
                                             "weak", "energy"};
    return names;
}

template <class F>
auto at_path(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const FieldError&) {
        throw;
    } catch (const Error& e) {
        throw FieldError(path, e.what());
    }
}

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw FieldError(path, what);
}

DataSpec parse_data(const KeyValues& kv, const std::string& section, const DataSpec& fallback,
                    bool forcing) {
    DataSpec d = fallback;
    const auto key = [&](const char* k) { return section + "." + k; };
    if (kv.has(key("profile"))) {
        const std::string name = kv.text(key("profile"), "zero");
        if (name != "csv") {
            d.profile.kind = at_path(key("profile"), [&] { return parse_profile_kind(name); });
            d.file.clear();
        }
    }
    d.profile.amplitude = kv.real(key("amplitude"), d.profile.amplitude);
    d.profile.center = kv.real(key("center"), d.profile.center);
    d.profile.width = kv.real(key("width"), d.profile.width);
    d.profile.modes = kv.count(key("modes"), d.profile.modes);
    d.profile.seed = kv.seed(key("seed"), d.profile.seed);
    require(d.profile.center >= 0.0 && d.profile.center <= 1.0, key("center"),
            "must lie in [0,1] (fraction of the domain length)");
    require(d.profile.width > 0.0 && d.profile.width <= 1.0, key("width"), "must lie in (0,1]");
    require(d.profile.modes >= 1, key("modes"), "must be at least 1");
    if (kv.has(key("file"))) {
        require(!forcing, key("file"), "CSV fields are supported for initial data only");
        d.file = kv.base_dir() / kv.text(key("file"), "");
    }
    if (kv.text(key("profile"), "") == "csv") {
        require(!d.file.empty(), key("file"), "profile = csv needs a file");
    }
    if (kv.has(key("time")) || kv.has(key("rate"))) {
        require(forcing, key("time"), "only forcing sections take a time profile");
    }
    if (kv.has(key("time"))) {
        d.time.kind = at_path(key("time"), [&] { return parse_time_kind(kv.text(key("time"), "")); });
    }
    d.time.rate = kv.real(key("rate"), d.time.rate);
    return d;
}

void check_increasing(const std::string& path, const std::vector<int>& v, std::size_t min_size) {
    require(v.size() >= min_size, path,
            "needs at least " + std::to_string(min_size) + " entries");
    for (std::size_t i = 0; i < v.size(); ++i) {
        require(v[i] >= 1, path, "entries must be positive integers");
        if (i > 0) require(v[i] > v[i - 1], path, "entries must be strictly increasing");
    }
}

}  // namespace

// --- KeyValues ------------------------------------------------------------------------------

KeyValues KeyValues::from_file(const std::filesystem::path& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("cannot read config: " + std::string(e.what()));
    }
    KeyValues kv;
    kv.base_dir_ = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw FieldError(section, "keys must sit inside a [section]");
        }
        for (const auto& [key, value] : body) {
            kv.values_[section + "." + key] = trim(value.data());
        }
    }
    return kv;
}

void KeyValues::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || assignment.find('.') > eq) {
        throw ConfigError("override '" + assignment + "' must look like section.key=value");
    }
    values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

bool KeyValues::has_section(const std::string& section) const {
    const auto it = values_.lower_bound(section + ".");
    return it != values_.end() && it->first.rfind(section + ".", 0) == 0;
}

std::string KeyValues::text(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValues::real(const std::string& key, double fallback) const {
    return has(key) ? to_real(key, values_.at(key)) : fallback;
}

std::size_t KeyValues::count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const long long x = to_integer(key, values_.at(key));
    if (x < 0) throw FieldError(key, "must be non-negative");
    return static_cast<std::size_t>(x);
}

std::uint64_t KeyValues::seed(const std::string& key, std::uint64_t fallback) const {
    return static_cast<std::uint64_t>(count(key, static_cast<std::size_t>(fallback)));
}

bool KeyValues::flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string v = values_.at(key);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw FieldError(key, "expected true/false, got '" + values_.at(key) + "'");
}

std::vector<double> KeyValues::reals(const std::string& key, const std::vector<double>& fallback) const {
    return has(key) ? parse_real_list(key, values_.at(key)) : fallback;
}

std::vector<int> KeyValues::ints(const std::string& key, const std::vector<int>& fallback) const {
    return has(key) ? parse_int_list(key, values_.at(key)) : fallback;
}

std::string KeyValues::canonical() const {
    std::string out;
    // The output location is not part of the experiment.
    for (const auto& [k, v] : values_) {
        if (k != "output.dir") out += k + "=" + v + "\n";
    }
    return out;
}

// --- list parsing ---------------------------------------------------------------------------

std::vector<int> parse_int_list(const std::string& path, const std::string& text) {
    std::vector<int> out;
    for (const auto& item : split(text, ',')) {
        const long long x = to_integer(path, item);
        if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
            throw FieldError(path, "entry '" + item + "' is out of range");
        }
        out.push_back(static_cast<int>(x));
    }
    return out;
}

std::vector<double> parse_real_list(const std::string& path, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(to_real(path, item));
    return out;
}

std::vector<LadderEntry> parse_ladder(const std::string& path, const std::string& text) {
    std::vector<LadderEntry> out;
    for (const auto& item : split(text, ',')) {
        const auto x = item.find('x');
        if (x == std::string::npos) {
            throw FieldError(path, "ladder entries look like NxxNt (e.g. 16x32), got '" + item + "'");
        }
        const long long nx = to_integer(path, item.substr(0, x));
        const long long nt = to_integer(path, item.substr(x + 1));
        if (nx < 2 || nt < 1) throw FieldError(path, "entry '" + item + "' needs N_x >= 2, N_t >= 1");
        out.push_back({static_cast<std::size_t>(nx), static_cast<std::size_t>(nt)});
    }
    return out;
}

// --- RunConfig ------------------------------------------------------------------------------

RunConfig parse_config(const KeyValues& kv, const std::string& subcommand) {
    for (const auto& [key, value] : kv.values()) {
        if (!known_keys().count(key)) throw FieldError(key, "unknown key");
    }
    RunConfig c;
    c.canonical = kv.canonical();

    c.kernel.family = at_path("kernel.family",
                              [&] { return parse_kernel_family(kv.text("kernel.family", "fractional")); });
    c.kernel.alpha = kv.real("kernel.alpha", c.kernel.alpha);
    c.kernel.gamma = kv.real("kernel.gamma", c.kernel.gamma);
    if (c.kernel.family != KernelFamily::UltraSlow) {
        require(c.kernel.alpha > 0.0 && c.kernel.alpha < 1.0, "kernel.alpha", "must lie in (0,1)");
    }
    require(c.kernel.gamma >= 0.0, "kernel.gamma", "must be non-negative");

    auto& nl = c.nonlinearity;
    nl.kind = at_path("nonlinearity.kind",
                      [&] { return parse_nonlinearity_kind(kv.text("nonlinearity.kind", "pme")); });
    nl.exponent = kv.real("nonlinearity.exponent", nl.exponent);
    nl.mu = kv.real("nonlinearity.mu", nl.mu);
    nl.R = kv.real("nonlinearity.R", nl.kind == NonlinearityKind::Identity ? 0.0 : nl.R);
    if (nl.kind == NonlinearityKind::PorousMedium) {
        require(nl.exponent > 1.0, "nonlinearity.exponent", "porous-medium exponent must exceed 1");
    }
    require(nl.mu > 0.0, "nonlinearity.mu", "must be positive");
    require(nl.R >= 0.0, "nonlinearity.R", "must be non-negative");
    if (kv.has("nonlinearity.table")) nl.table = kv.base_dir() / kv.text("nonlinearity.table", "");
    if (nl.kind == NonlinearityKind::Custom) {
        require(!nl.table.empty(), "nonlinearity.table", "custom nonlinearity needs a CSV table");
    }

    auto& m = c.mesh;
    m.mesh.dim = static_cast<int>(kv.count("mesh.dim", 1));
    m.mesh.cells_x = kv.count("mesh.cells_x", 32);
    m.mesh.cells_y = kv.count("mesh.cells_y", m.mesh.cells_x);
    m.mesh.length_x = kv.real("mesh.length_x", 1.0);
    m.mesh.length_y = kv.real("mesh.length_y", 1.0);
    m.nu = kv.real("mesh.nu", 1.0);
    m.coefficient = kv.real("mesh.coefficient", 1.0);
    m.oscillation = kv.real("mesh.oscillation", 0.0);
    require(m.mesh.dim == 1 || m.mesh.dim == 2, "mesh.dim", "must be 1 or 2");
    require(m.mesh.cells_x >= 2, "mesh.cells_x", "needs at least 2 cells");
    require(m.mesh.dim == 1 || m.mesh.cells_y >= 2, "mesh.cells_y", "needs at least 2 cells");
    require(m.mesh.length_x > 0.0, "mesh.length_x", "must be positive");
    require(m.mesh.length_y > 0.0, "mesh.length_y", "must be positive");
    require(m.nu > 0.0, "mesh.nu", "must be positive");

    c.time.horizon = kv.real("time.T", 1.0);
    c.time.steps = kv.count("time.N_t", 64);
    c.time.grading = kv.real("time.grading", 1.0);
    require(c.time.horizon > 0.0, "time.T", "must be positive");
    require(c.time.steps >= 1, "time.N_t", "must be at least 1");
    require(c.time.grading >= 1.0, "time.grading", "must be >= 1 (1 = uniform)");

    c.initial = parse_data(kv, "initial", DataSpec{}, false);
    c.forcing = parse_data(kv, "forcing", DataSpec{}, true);
    c.has_pair = kv.has_section("pair_initial") || kv.has_section("pair_forcing");
    c.pair_initial = parse_data(kv, "pair_initial", c.initial, false);
    c.pair_forcing = parse_data(kv, "pair_forcing", c.forcing, true);

    auto& s = c.solver;
    s.newton_tol = kv.real("newton.tol", s.newton_tol);
    s.max_iter = kv.count("newton.max_iter", s.max_iter);
    s.max_backtracks = kv.count("newton.max_backtracks", s.max_backtracks);
    s.regularization = kv.real("newton.regularization", s.regularization);
    s.memory = at_path("memory.path", [&] { return parse_memory_path(kv.text("memory.path", "naive")); });
    s.soe_tol = kv.real("memory.soe_tol", s.soe_tol);
    require(s.newton_tol > 0.0, "newton.tol", "must be positive");
    require(s.max_iter >= 1, "newton.max_iter", "must be at least 1");
    require(s.regularization > 0.0 && s.regularization < s.regularization_cap,
            "newton.regularization", "must lie in (0, 1e-2)");
    require(s.soe_tol > 0.0 && s.soe_tol < 1.0, "memory.soe_tol", "must lie in (0,1)");

    auto& v = c.verify;
    if (kv.has("verify.checks")) v.checks = split(kv.text("verify.checks", ""), ',');
    require(!v.checks.empty(), "verify.checks", "must name at least one check");
    for (const auto& name : v.checks) {
        require(check_names().count(name) != 0, "verify.checks",
                "unknown check '" + name +
                    "' (contraction, entropy_contraction, entropy, weak, energy)");
    }
    v.battery_seed = kv.seed("verify.battery_seed", v.battery_seed);
    v.delta_list = kv.reals("verify.delta_list", v.delta_list);
    require(!v.delta_list.empty(), "verify.delta_list", "needs at least one entry");
    for (double d : v.delta_list) {
        require(d > 0.0 && d < 1.0, "verify.delta_list", "entries are fractions of T in (0,1)");
    }
    v.psi_scale = kv.real("verify.psi_scale", v.psi_scale);
    v.entropy_tol = kv.real("verify.entropy_tol", v.entropy_tol);
    v.weak_tol = kv.real("verify.weak_tol", v.weak_tol);
    v.energy_levels = kv.reals("verify.energy_levels", v.energy_levels);
    require(v.entropy_tol > 0.0, "verify.entropy_tol", "must be positive");
    require(v.weak_tol > 0.0, "verify.weak_tol", "must be positive");
    for (double k : v.energy_levels) require(k > 0.0, "verify.energy_levels", "levels must be positive");
    v.allowance = kv.text("verify.allowance", v.allowance);
    if (v.allowance != "two_level" && v.allowance != "none") {
        require(to_real("verify.allowance", v.allowance) >= 0.0, "verify.allowance",
                "must be two_level, none or a non-negative number");
    }

    auto& cs = c.cascade;
    cs.m_ladder = kv.ints("cascade.m_ladder", cs.m_ladder);
    cs.n_ladder = kv.ints("cascade.n_ladder", cs.n_ladder);
    cs.tol = kv.real("cascade.tol", cs.tol);
    cs.threads = kv.count("cascade.threads", cs.threads);
    check_increasing("cascade.m_ladder", cs.m_ladder, 3);
    check_increasing("cascade.n_ladder", cs.n_ladder, 3);
    require(cs.tol > 0.0, "cascade.tol", "must be positive");

    auto& cv = c.convergence;
    if (kv.has("convergence.ladder")) {
        cv.ladder = parse_ladder("convergence.ladder", kv.text("convergence.ladder", ""));
    }
    require(cv.ladder.size() >= 3, "convergence.ladder", "needs at least 3 entries");
    const auto& finest = cv.ladder.back();
    for (std::size_t i = 0; i < cv.ladder.size(); ++i) {
        const auto& e = cv.ladder[i];
        if (i > 0) {
            require(e.nx >= cv.ladder[i - 1].nx && e.nt >= cv.ladder[i - 1].nt, "convergence.ladder",
                    "entries must be non-decreasing in N_x and N_t");
        }
        require(finest.nx % e.nx == 0 && finest.nt % e.nt == 0, "convergence.ladder",
                "every entry must nest in the finest one");
    }
    cv.has_expected = kv.has("convergence.expected_order");
    cv.expected_order = kv.real("convergence.expected_order", 0.0);
    cv.order_tol = kv.real("convergence.order_tol", cv.order_tol);
    require(cv.order_tol > 0.0, "convergence.order_tol", "must be positive");

    c.output_dir = kv.text("output.dir", "fracpme-out/" + subcommand);
    c.dump_steps = kv.flag("output.dump_steps", false);
    return c;
}

KernelPair RunConfig::kernel_pair() const {
    return at_path("kernel", [&] {
        switch (kernel.family) {
        case KernelFamily::Fractional: return KernelPair::fractional(kernel.alpha, time.horizon);
        case KernelFamily::Tempered:
            return KernelPair::tempered(kernel.alpha, kernel.gamma, time.horizon);
        case KernelFamily::UltraSlow: return KernelPair::ultra_slow(time.horizon);
        }
        throw ConfigError("unknown kernel family");
    });
}

NonlinearityProfile RunConfig::profile() const {
    return at_path("nonlinearity", [&] {
        switch (nonlinearity.kind) {
        case NonlinearityKind::Identity:
            return NonlinearityProfile::identity(nonlinearity.mu, nonlinearity.R);
        case NonlinearityKind::PorousMedium:
            return NonlinearityProfile::porous_medium(nonlinearity.exponent, nonlinearity.mu,
                                                      nonlinearity.R);
        case NonlinearityKind::Custom:
            return NonlinearityProfile::custom_from_csv(nonlinearity.table.string(), nonlinearity.mu,
                                                        nonlinearity.R);
        }
        throw ConfigError("unknown nonlinearity kind");
    });
}

SpatialProblem RunConfig::problem() const { return problem(mesh.mesh.cells_x); }

SpatialProblem RunConfig::problem(std::size_t cells) const {
    MeshSpec spec = mesh.mesh;
    if (cells != spec.cells_x) {
        spec.cells_x = cells;
        spec.cells_y = cells;
    }
    const double scale = mesh.coefficient, osc = mesh.oscillation, horizon = time.horizon;
    CoefficientField a = [scale, osc, horizon](double t, double, double) {
        return Eigen::Matrix2d(scale * (1.0 + osc * std::sin(2.0 * kPi * t / horizon)) *
                               Eigen::Matrix2d::Identity());
    };
    return at_path("mesh", [&] { return SpatialProblem(spec, std::move(a), mesh.nu, osc != 0.0); });
}

TimeGrid RunConfig::grid() const { return grid(time.steps); }

TimeGrid RunConfig::grid(std::size_t steps) const {
    return at_path("time", [&] {
        return time.grading == 1.0 ? TimeGrid::uniform(time.horizon, steps)
                                   : TimeGrid::graded(time.horizon, steps, time.grading);
    });
}

NodalField RunConfig::initial_field(const SpatialProblem& p, const DataSpec& spec) const {
    if (!spec.file.empty()) {
        return at_path("initial.file", [&] { return load_field_csv(p, spec.file.string()); });
    }
    return sample_field(p, spec.profile);
}

SpaceTimeField RunConfig::forcing_field(const SpatialProblem& p, const TimeGrid& g,
                                        const DataSpec& spec) const {
    return sample_forcing(p, g, spec.profile, spec.time);
}

}  // namespace fracpme::cli
