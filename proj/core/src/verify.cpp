#include "fracpme/verify.hpp"

#include "fracpme/errors.hpp"
#include "fracpme/history.hpp"
#include "fracpme/special.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace fracpme {

namespace {

void require_same_grid(const SolutionHistory& a, const SolutionHistory& b) {
    if (!(a.grid == b.grid)) throw InputError("histories live on different time grids");
    if (!a.complete() || !b.complete()) throw InputError("histories must be complete");
    if (a.u.front().size() != b.u.front().size()) {
        throw InputError("histories live on different meshes");
    }
}

void require_boundary_zero(const SpatialProblem& problem, const NodalField& field,
                           const char* what) {
    if (static_cast<std::size_t>(field.size()) != problem.node_count()) {
        throw InputError(std::string(what) + " does not match the mesh");
    }
    for (std::size_t g = 0; g < problem.node_count(); ++g) {
        if (problem.is_boundary(g) && field[static_cast<Eigen::Index>(g)] != 0.0) {
            throw InputError(std::string(what) + " must vanish on the Dirichlet boundary");
        }
    }
}

std::string format_double(double x) {
    std::ostringstream out;
    out << x;
    return out.str();
}

double rhs_for(double horizon, double l_norm, const SpatialProblem& problem, const TimeGrid& grid,
               const ProblemData& d1, const ProblemData& d2, NormPart part) {
    const NodalField du0 = d1.u0 - d2.u0;
    double u0_part = 0.0;
    switch (part) {
    case NormPart::Absolute: u0_part = l1_norm(problem, du0); break;
    case NormPart::Positive: u0_part = l1_norm_positive(problem, du0); break;
    case NormPart::Negative: u0_part = l1_norm_negative(problem, du0); break;
    }
    SpaceTimeField df(grid.steps() + 1);
    for (std::size_t n = 0; n <= grid.steps(); ++n) df[n] = d1.f[n] - d2.f[n];
    return horizon * u0_part + l_norm * l1_norm_qt(problem, grid, df, part);
}

}  // namespace

// --- KernelSplit -------------------------------------------------------------------------

KernelSplit::KernelSplit(KernelPair pair, double delta)
    : pair_(std::move(pair)), delta_(delta) {
    if (!(delta > 0.0)) throw ConfigError("kernel split point delta must be positive");
    k_delta_ = pair_.k(delta);
}

double KernelSplit::k1(double t) const {
    if (!(t > 0.0)) throw DomainError("k1 requires t > 0");
    return t < delta_ ? std::max(pair_.k(t) - k_delta_, 0.0) : 0.0;
}

double KernelSplit::k2(double t) const {
    if (!(t > 0.0)) throw DomainError("k2 requires t > 0");
    return t < delta_ ? k_delta_ : std::min(pair_.k(t), k_delta_);
}

double KernelSplit::k2_integral(double t) const {
    if (t < 0.0) throw DomainError("k2_integral requires t >= 0");
    const double flat = k_delta_ * std::min(t, delta_);
    return t > delta_ ? flat + pair_.cell_integral(delta_, t) : flat;
}

double KernelSplit::k1_integral(double t) const {
    if (t < 0.0) throw DomainError("k1_integral requires t >= 0");
    const double s = std::min(t, delta_);
    return s > 0.0 ? pair_.k_integral(s) - k_delta_ * s : 0.0;
}

double KernelSplit::k2_cell_integral(double lo, double hi) const {
    double sum = 0.0;
    if (lo < delta_) sum += k_delta_ * (std::min(hi, delta_) - lo);
    if (hi > delta_) sum += pair_.cell_integral(std::max(lo, delta_), hi);
    return sum;
}

ConvolutionWeights KernelSplit::k2_weights(const TimeGrid& grid) const {
    return ConvolutionWeights::from_cell_integral(
        [this](double lo, double hi) { return k2_cell_integral(lo, hi); }, grid);
}

// --- VerificationReport ------------------------------------------------------------------

const CheckRecord& VerificationReport::add(std::string name, double lhs, double rhs,
                                           double tolerance, std::string note) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.lhs = lhs;
    rec.rhs = rhs;
    rec.slack = rhs - lhs;
    rec.tolerance = tolerance;
    rec.pass = std::isfinite(lhs) && std::isfinite(rhs) && lhs <= rhs + tolerance;
    rec.note = std::move(note);
    checks_.push_back(std::move(rec));
    return checks_.back();
}

void VerificationReport::merge(const VerificationReport& other) {
    checks_.insert(checks_.end(), other.checks_.begin(), other.checks_.end());
    for (const auto& [k, v] : other.metadata_) metadata_.emplace(k, v);
}

bool VerificationReport::all_pass() const { return failures() == 0; }

std::size_t VerificationReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(checks_.begin(), checks_.end(), [](const auto& c) { return !c.pass; }));
}

double VerificationReport::worst_margin() const {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& c : checks_) worst = std::min(worst, c.slack + c.tolerance);
    return worst;
}

// --- contraction -------------------------------------------------------------------------

VerificationReport contraction_check(const SolutionHistory& h1, const SolutionHistory& h2,
                                     const ProblemData& d1, const ProblemData& d2,
                                     const SpatialProblem& problem, const KernelPair& pair,
                                     double allowance) {
    require_same_grid(h1, h2);
    const TimeGrid& grid = h1.grid;
    if (d1.f.size() != grid.steps() + 1 || d2.f.size() != grid.steps() + 1) {
        throw InputError("forcing does not match the time grid");
    }
    std::vector<NodalField> diff(grid.steps() + 1);
    for (std::size_t n = 0; n <= grid.steps(); ++n) diff[n] = h1.u[n] - h2.u[n];

    const double horizon = grid.horizon();
    const double l_norm = pair.l_integral(horizon);
    const double tol = 1e-6 + allowance;
    VerificationReport report;
    report.set_metadata("kernel", pair.describe());
    report.set_metadata("time_steps", std::to_string(grid.steps()));
    report.set_metadata("l_norm", format_double(l_norm));
    report.set_metadata("allowance", format_double(allowance));
    report.add("contraction_abs", l1_norm_qt(problem, grid, diff, NormPart::Absolute),
               rhs_for(horizon, l_norm, problem, grid, d1, d2, NormPart::Absolute), tol);
    report.add("contraction_pos", l1_norm_qt(problem, grid, diff, NormPart::Positive),
               rhs_for(horizon, l_norm, problem, grid, d1, d2, NormPart::Positive), tol);
    report.add("contraction_neg", l1_norm_qt(problem, grid, diff, NormPart::Negative),
               rhs_for(horizon, l_norm, problem, grid, d1, d2, NormPart::Negative), tol);
    return report;
}

VerificationReport entropy_contraction_check(const SolutionHistory& h1, const SolutionHistory& h2,
                                             const NonlinearityProfile& profile,
                                             const ProblemData& d1, const ProblemData& d2,
                                             const SpatialProblem& problem,
                                             const KernelPair& pair, double allowance) {
    require_same_grid(h1, h2);
    const TimeGrid& grid = h1.grid;
    std::vector<NodalField> diff(grid.steps() + 1);
    for (std::size_t n = 0; n <= grid.steps(); ++n) {
        diff[n] = h1.v[n].unaryExpr([&](double v) { return profile.b_inverse(v); }) -
                  h2.v[n].unaryExpr([&](double v) { return profile.b_inverse(v); });
    }
    const double l_norm = pair.l_integral(grid.horizon());
    VerificationReport report;
    report.set_metadata("kernel", pair.describe());
    report.set_metadata("nonlinearity", profile.describe());
    report.add("entropy_contraction", l1_norm_qt(problem, grid, diff),
               rhs_for(grid.horizon(), l_norm, problem, grid, d1, d2, NormPart::Absolute),
               1e-6 + allowance);
    return report;
}

// --- weak residual -----------------------------------------------------------------------

double weak_residual(const SolutionHistory& history, const SpatialProblem& problem,
                     const KernelPair& pair, const SpaceTimeField& forcing,
                     const SpaceTimeField& eta) {
    const TimeGrid& grid = history.grid;
    if (!history.complete()) throw InputError("weak residual needs a completed history");
    if (eta.size() != grid.steps() + 1 || forcing.size() != grid.steps() + 1) {
        throw InputError("test field or forcing does not match the time grid");
    }
    for (std::size_t n = 1; n <= grid.steps(); ++n) require_boundary_zero(problem, eta[n], "eta");

    const ConvolutionWeights weights = ConvolutionWeights::build(pair, grid);
    const double mass = problem.interior_mass();
    std::vector<Eigen::VectorXd> u(grid.steps() + 1);
    for (std::size_t n = 0; n <= grid.steps(); ++n) u[n] = problem.restrict_interior(history.u[n]);

    SparseMatrix k;
    if (!problem.time_dependent()) k = problem.assemble_stiffness(0.0);
    double total = 0.0;
    for (std::size_t n = 1; n <= grid.steps(); ++n) {
        if (problem.time_dependent()) k = problem.assemble_stiffness(grid.t(n));
        Eigen::VectorXd d = Eigen::VectorXd::Zero(u[n].size());
        for (std::size_t j = 1; j <= n; ++j) d += weights(n, j) * (u[j] - u[j - 1]);
        const Eigen::VectorXd e = problem.restrict_interior(eta[n]);
        const Eigen::VectorXd v = problem.restrict_interior(history.v[n]);
        const Eigen::VectorXd f = problem.restrict_interior(forcing[n]);
        total += grid.dt(n) * (mass * e.dot(d) + e.dot(k * v) - mass * e.dot(f));
    }
    return std::abs(total);
}

double weak_residual(const SolutionHistory& history, const SpatialProblem& problem,
                     const KernelPair& pair, const SpaceTimeField& forcing, const NodalField& eta) {
    return weak_residual(history, problem, pair, forcing,
                         SpaceTimeField(history.grid.steps() + 1, eta));
}

// --- entropy -----------------------------------------------------------------------------

double stieltjes_entropy(const NonlinearityProfile& profile, const EntropyTestFunction& S,
                         double psi, double u0, double u) {
    if (u == u0) return 0.0;
    const double lo = std::min(u0, u);
    const double hi = std::max(u0, u);
    std::vector<double> cuts{lo, hi};
    auto add_cut = [&](double sigma) {
        try {
            const double s = profile.b_inverse(sigma);
            if (s > lo && s < hi) cuts.push_back(s);
        } catch (const RangeError&) {
        }
    };
    const double K = S.level();
    const double e = S.smoothing();
    for (double sigma : {psi - K - e, psi - K, psi + K, psi + K + e}) add_cut(sigma);
    if (lo < 0.0 && hi > 0.0) cuts.push_back(0.0);
    std::sort(cuts.begin(), cuts.end());

    auto integrand = [&](double s) { return S.S(profile.phi(s) - psi); };
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] > cuts[i]) {
            sum += boost::math::quadrature::gauss<double, 10>::integrate(integrand, cuts[i],
                                                                        cuts[i + 1]);
        }
    }
    return u >= u0 ? sum : -sum;
}

namespace {

EntropyResidual entropy_residual_with(const SolutionHistory& history,
                                      const SpatialProblem& problem,
                                      const NonlinearityProfile& profile,
                                      const SpaceTimeField& forcing, const EntropyTestFunction& S,
                                      const NodalField& psi, const TimeCutoff& zeta,
                                      const ConvolutionWeights& kappa,
                                      const ConvolutionWeights& kappa2) {
    const TimeGrid& grid = history.grid;
    const std::size_t steps = grid.steps();
    const double mass = problem.interior_mass();
    const Eigen::VectorXd p = problem.restrict_interior(psi);
    const Eigen::Index w = p.size();

    std::vector<Eigen::VectorXd> u(steps + 1), phi_int(steps + 1), s_val(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) {
        u[n] = problem.restrict_interior(history.u[n]);
        const Eigen::VectorXd v = problem.restrict_interior(history.v[n]);
        phi_int[n].resize(w);
        s_val[n].resize(w);
        for (Eigen::Index i = 0; i < w; ++i) {
            phi_int[n][i] = n == 0 ? 0.0 : stieltjes_entropy(profile, S, p[i], u[0][i], u[n][i]);
            if (!std::isfinite(phi_int[n][i])) {
                std::ostringstream msg;
                msg << "Stieltjes integral is not finite at step " << n << ", unknown " << i;
                throw AccuracyError(msg.str(), phi_int[n][i]);
            }
            s_val[n][i] = S.S(v[i] - p[i]);
        }
    }

    SparseMatrix k;
    if (!problem.time_dependent()) k = problem.assemble_stiffness(0.0);
    EntropyResidual out;
    Eigen::VectorXd d1(w), d2(w);
    for (std::size_t n = 1; n <= steps; ++n) {
        const double z = zeta(grid.t(n));
        if (z == 0.0) continue;
        if (problem.time_dependent()) k = problem.assemble_stiffness(grid.t(n));
        d1.setZero();
        for (std::size_t j = 1; j <= n; ++j) {
            const double k1w = kappa(n, j) - kappa2(n, j);
            d1 += k1w * (phi_int[j] - phi_int[j - 1]);
        }
        // k2(0+) (u_n - u_0) structure: kappa2_nn (u_n - u_0) - sum_{j<n} (kappa2_{n,j+1} - kappa2_{n,j}) (u_j - u_0)
        d2 = kappa2(n, n) * (u[n] - u[0]);
        for (std::size_t j = 1; j < n; ++j) {
            d2 -= (kappa2(n, j + 1) - kappa2(n, j)) * (u[j] - u[0]);
        }
        const Eigen::VectorXd v = problem.restrict_interior(history.v[n]);
        const Eigen::VectorXd f = problem.restrict_interior(forcing[n]);
        const double dt = grid.dt(n);
        out.memory_k1 += dt * z * mass * d1.sum();
        out.memory_k2 += dt * z * mass * d2.dot(s_val[n]);
        out.diffusion += dt * z * s_val[n].dot(k * v);
        out.source += dt * z * mass * f.dot(s_val[n]);
    }
    out.residual = out.memory_k1 + out.memory_k2 + out.diffusion - out.source;
    return out;
}

void validate_entropy_inputs(const SolutionHistory& history, const SpatialProblem& problem,
                             const SpaceTimeField& forcing, const NodalField& psi,
                             const TimeCutoff& zeta) {
    const TimeGrid& grid = history.grid;
    if (!history.complete()) throw InputError("entropy residual needs a completed history");
    if (forcing.size() != grid.steps() + 1) throw InputError("forcing does not match the grid");
    require_boundary_zero(problem, psi, "psi_test");
    if (!zeta) throw InputError("time cutoff zeta is empty");
    if (std::abs(zeta(grid.horizon())) > 1e-14) throw InputError("time cutoff must vanish at T");
    for (std::size_t n = 0; n <= grid.steps(); ++n) {
        if (zeta(grid.t(n)) < 0.0) throw InputError("time cutoff must be non-negative");
    }
}

}  // namespace

EntropyResidual entropy_residual(const SolutionHistory& history, const SpatialProblem& problem,
                                 const NonlinearityProfile& profile, const SpaceTimeField& forcing,
                                 const EntropyTestFunction& S, const NodalField& psi,
                                 const TimeCutoff& zeta, const KernelSplit& split) {
    validate_entropy_inputs(history, problem, forcing, psi, zeta);
    const ConvolutionWeights kappa = ConvolutionWeights::build(split.pair(), history.grid);
    const ConvolutionWeights kappa2 = split.k2_weights(history.grid);
    return entropy_residual_with(history, problem, profile, forcing, S, psi, zeta, kappa, kappa2);
}

EntropyBattery default_entropy_battery(const SpatialProblem& problem, double horizon,
                                       const std::vector<double>& delta_fractions,
                                       double psi_scale) {
    EntropyBattery battery;
    for (auto [level, smooth] : {std::pair{0.1, 0.05}, std::pair{0.5, 0.1}, std::pair{1.0, 0.5},
                                 std::pair{2.0, 0.2}, std::pair{10.0, 1.0}}) {
        battery.shapes.emplace_back(level, smooth);
    }
    battery.psis.push_back(problem.zero_field());
    const auto& mesh = problem.mesh();
    const std::array<std::pair<double, double>, 3> bumps{
        std::pair{0.25, 1.0}, std::pair{0.5, -1.0}, std::pair{0.75, 1.0}};
    for (const auto& [c, sign] : bumps) {
        NodalField psi = problem.zero_field();
        for (std::size_t g = 0; g < problem.node_count(); ++g) {
            if (problem.is_boundary(g)) continue;
            const Eigen::Vector2d x = problem.coord(g);
            double hat = std::max(0.0, 1.0 - std::abs(x.x() / mesh.length_x - c) / 0.25);
            if (problem.dim() == 2) {
                hat *= std::max(0.0, 1.0 - std::abs(x.y() / mesh.length_y - 0.5) / 0.25);
            }
            psi[static_cast<Eigen::Index>(g)] = psi_scale * sign * hat;
        }
        battery.psis.push_back(std::move(psi));
    }
    battery.cutoffs.emplace_back("1-t/T", [horizon](double t) { return 1.0 - t / horizon; });
    battery.cutoffs.emplace_back("(1-t/T)^2", [horizon](double t) {
        const double s = 1.0 - t / horizon;
        return s * s;
    });
    battery.cutoffs.emplace_back("1-(t/T)^2", [horizon](double t) {
        const double s = t / horizon;
        return 1.0 - s * s;
    });
    for (double frac : delta_fractions) {
        if (!(frac > 0.0)) throw ConfigError("split fractions must be positive");
        battery.deltas.push_back(frac * horizon);
    }
    return battery;
}

VerificationReport entropy_battery(const SolutionHistory& history, const SpatialProblem& problem,
                                   const NonlinearityProfile& profile, const KernelPair& pair,
                                   const SpaceTimeField& forcing, const EntropyBattery& battery,
                                   double tolerance) {
    VerificationReport report;
    report.set_metadata("kernel", pair.describe());
    report.set_metadata("nonlinearity", profile.describe());
    report.set_metadata("entropy_tol", format_double(tolerance));
    const ConvolutionWeights kappa = ConvolutionWeights::build(pair, history.grid);
    for (double delta : battery.deltas) {
        const KernelSplit split(pair, delta);
        const ConvolutionWeights kappa2 = split.k2_weights(history.grid);
        for (std::size_t si = 0; si < battery.shapes.size(); ++si) {
            for (std::size_t pi = 0; pi < battery.psis.size(); ++pi) {
                for (const auto& [zname, zeta] : battery.cutoffs) {
                    validate_entropy_inputs(history, problem, forcing, battery.psis[pi], zeta);
                    const EntropyResidual r =
                        entropy_residual_with(history, problem, profile, forcing,
                                              battery.shapes[si], battery.psis[pi], zeta, kappa,
                                              kappa2);
                    std::ostringstream name;
                    name << "entropy[S=" << si << ",psi=" << pi << ",zeta=" << zname
                         << ",delta=" << delta << "]";
                    std::ostringstream note;
                    note << "k1=" << r.memory_k1 << " k2=" << r.memory_k2
                         << " diff=" << r.diffusion << " src=" << r.source;
                    report.add(name.str(), r.residual, 0.0, tolerance, note.str());
                }
            }
        }
    }
    return report;
}

// --- scalar relaxation -------------------------------------------------------------------

ScalarRelaxation scalar_relaxation(const KernelPair& pair, double lambda, const TimeGrid& grid,
                                   double u0, MemoryPath path, double soe_tol) {
    if (!(lambda >= 0.0)) throw DomainError("relaxation rate must be non-negative");
    auto memory = make_history(path, pair, grid, 1, soe_tol);
    ScalarRelaxation out;
    out.t.assign(grid.nodes().begin(), grid.nodes().end());
    out.u.push_back(u0);
    double lag = 0.0;
    for (std::size_t n = 1; n <= grid.steps(); ++n) {
        const double kappa = memory->diagonal(n);
        memory->lagged(n, std::span<double>(&lag, 1));
        const double un = (kappa * out.u.back() - lag) / (kappa + lambda);
        const double inc = un - out.u.back();
        memory->push(n, std::span<const double>(&inc, 1));
        out.u.push_back(un);
    }
    const bool has_oracle = pair.family() == KernelFamily::Fractional ||
                            (pair.family() == KernelFamily::Tempered && pair.gamma() == 0.0);
    if (has_oracle) {
        for (double t : out.t) out.oracle.push_back(u0 * relaxation_oracle(pair.alpha(), lambda, t));
        for (std::size_t n = 1; n < out.t.size(); ++n) {
            const double o = out.oracle[n];
            const double err = std::abs(out.u[n] - o);
            out.max_rel_error = std::max(out.max_rel_error, o != 0.0 ? err / std::abs(o) : err);
        }
    } else {
        out.max_rel_error = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

double fitted_order(const std::vector<double>& steps, const std::vector<double>& errors) {
    if (steps.size() != errors.size() || steps.size() < 2) {
        throw InputError("order fit needs at least two (step, error) pairs");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!(errors[i] > 0.0) || !(steps[i] > 0.0)) {
            throw InputError("order fit rejected: errors must be positive (identical ladder runs?)");
        }
        const double x = std::log(steps[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 1e-300)) throw InputError("order fit rejected: step sizes coincide");
    return (n * sxy - sx * sy) / denom;
}

}  // namespace fracpme
