#include "commands.hpp"

#include "fracpme/cascade.hpp"
#include "fracpme/errors.hpp"
#include "fracpme/report.hpp"
#include "fracpme/soe.hpp"
#include "fracpme/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

namespace fracpme::cli {

namespace {

std::string fixed_name(const char* prefix, std::size_t n) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%05zu.csv", prefix, n);
    return buf;
}

double data_scale(const SpatialProblem& p, const TimeGrid& g, const NodalField& u0,
                  const SpaceTimeField& f) {
    return l1_norm(p, u0) + l1_norm_qt(p, g, f);
}

void print_checks(const VerificationReport& report, std::size_t limit = 30) {
    std::vector<const CheckRecord*> rows;
    for (const auto& c : report.checks()) rows.push_back(&c);
    if (rows.size() > limit) {
        std::stable_sort(rows.begin(), rows.end(), [](const CheckRecord* a, const CheckRecord* b) {
            return a->slack + a->tolerance < b->slack + b->tolerance;
        });
        std::cout << "showing the " << limit << " smallest margins of " << rows.size()
                  << " checks (all rows in checks.csv)\n";
        rows.resize(limit);
    }
    std::cout << std::left << std::setw(44) << "check" << std::right << std::setw(13) << "lhs"
              << std::setw(13) << "rhs" << std::setw(13) << "slack" << std::setw(11) << "tol"
              << "  result\n";
    for (const auto* c : rows) {
        std::cout << std::left << std::setw(44) << c->name << std::right << std::scientific
                  << std::setprecision(3) << std::setw(13) << c->lhs << std::setw(13) << c->rhs
                  << std::setw(13) << c->slack << std::setw(11) << std::setprecision(1)
                  << c->tolerance << "  " << (c->pass ? "PASS" : "FAIL") << "\n";
    }
    std::cout << std::defaultfloat;
}

// P1 hats with random centres, half-widths and signs; support stays inside the domain.
std::vector<NodalField> random_psis(const SpatialProblem& p, std::uint64_t seed, double scale,
                                    std::size_t count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> centre(0.3, 0.7), width(0.1, 0.25);
    std::bernoulli_distribution sign(0.5);
    const double lx = p.mesh().length_x, ly = p.mesh().length_y;
    std::vector<NodalField> out;
    for (std::size_t k = 0; k < count; ++k) {
        const double cx = centre(rng), wx = width(rng), cy = centre(rng), wy = width(rng);
        const double s = sign(rng) ? scale : -scale;
        NodalField psi = p.zero_field();
        for (std::size_t node = 0; node < p.node_count(); ++node) {
            const auto x = p.coord(node);
            double v = std::max(0.0, 1.0 - std::abs(x.x() / lx - cx) / wx);
            if (p.dim() == 2) v *= std::max(0.0, 1.0 - std::abs(x.y() / ly - cy) / wy);
            if (p.is_boundary(node)) v = 0.0;
            psi[static_cast<Eigen::Index>(node)] = s * v;
        }
        out.push_back(std::move(psi));
    }
    return out;
}

struct Solved {
    ProblemData data;
    SolutionHistory history;
};

Solved solve_data(const RunConfig& cfg, const SpatialProblem& p, const TimeGrid& g,
                  const DataSpec& initial, const DataSpec& forcing) {
    ProblemData d{cfg.initial_field(p, initial), cfg.forcing_field(p, g, forcing)};
    auto h = solve(p, cfg.kernel_pair(), cfg.profile(), g, d.u0, d.f, cfg.solver);
    return {std::move(d), std::move(h)};
}

double difference_qt(const SpatialProblem& p, const SolutionHistory& a, const SolutionHistory& b) {
    std::vector<NodalField> diff;
    for (std::size_t n = 0; n < a.u.size(); ++n) diff.push_back(a.u[n] - b.u[n]);
    return l1_norm_qt(p, a.grid, diff);
}

}  // namespace

// --- solve ----------------------------------------------------------------------------------

int run_solve(const RunConfig& cfg, OutputDir& out) {
    const auto problem = cfg.problem();
    const auto grid = cfg.grid();
    const NodalField u0 = cfg.initial_field(problem, cfg.initial);
    const auto f = cfg.forcing_field(problem, grid, cfg.forcing);
    auto emit = [&](const SolutionHistory& h) {
        out.write("history.csv", [&](std::ostream& s) { write_history_csv(s, h, problem); });
        out.write_text("solve.json", to_json(h));
        if (cfg.dump_steps) {
            for (std::size_t n = 0; n < h.u.size(); ++n) {
                out.write("steps/" + fixed_name("u_", n),
                          [&](std::ostream& s) { problem.write_field_csv(s, h.u[n]); });
            }
        }
    };
    try {
        const auto h = solve(problem, cfg.kernel_pair(), cfg.profile(), grid, u0, f, cfg.solver);
        emit(h);
        std::size_t iterations = 0;
        for (const auto& d : h.diagnostics) iterations += d.iterations;
        std::cout << "solved " << h.completed() << " steps on " << problem.node_count()
                  << " nodes; Newton iterations " << iterations << "; ||u(T)||_1 = "
                  << l1_norm(problem, h.u.back())
                  << "; max|u(T)| = " << h.u.back().cwiseAbs().maxCoeff() << "\n";
    } catch (const StepFailure& e) {
        emit(e.partial());
        throw;
    }
    return kExitOk;
}

// --- verify ---------------------------------------------------------------------------------

int run_verify(const RunConfig& cfg, OutputDir& out) {
    const auto problem = cfg.problem();
    const auto grid = cfg.grid();
    const auto pair = cfg.kernel_pair();
    const auto profile = cfg.profile();
    const auto& v = cfg.verify;
    const auto wants = [&](const char* name) {
        return std::find(v.checks.begin(), v.checks.end(), name) != v.checks.end();
    };
    const bool paired = wants("contraction") || wants("entropy_contraction");

    const auto first = solve_data(cfg, problem, grid, cfg.initial, cfg.forcing);
    const double scale = data_scale(problem, grid, first.data.u0, first.data.f);
    VerificationReport report;
    report.set_metadata("kernel", pair.describe());
    report.set_metadata("nonlinearity", profile.describe());
    report.set_metadata("battery_seed", std::to_string(v.battery_seed));
    report.set_metadata("data_scale", std::to_string(scale));

    if (paired) {
        if (!cfg.has_pair) {
            std::cout << "note: no [pair_initial]/[pair_forcing] sections; the second run "
                         "repeats the first data set\n";
        }
        const auto second = solve_data(cfg, problem, grid, cfg.pair_initial, cfg.pair_forcing);
        double allowance = 0.0;
        if (v.allowance == "two_level") {
            if (!cfg.initial.file.empty() || !cfg.pair_initial.file.empty()) {
                throw FieldError("verify.allowance", "two_level needs closed-form initial data");
            }
            const auto fine_problem = cfg.problem(2 * problem.mesh().cells_x);
            const auto fine_grid = cfg.grid(2 * grid.steps());
            const auto a = solve_data(cfg, fine_problem, fine_grid, cfg.initial, cfg.forcing);
            const auto b = solve_data(cfg, fine_problem, fine_grid, cfg.pair_initial, cfg.pair_forcing);
            allowance = std::abs(difference_qt(problem, first.history, second.history) -
                                 difference_qt(fine_problem, a.history, b.history));
        } else if (v.allowance != "none") {
            allowance = std::stod(v.allowance);
        }
        if (wants("contraction")) {
            report.merge(contraction_check(first.history, second.history, first.data, second.data,
                                           problem, pair, allowance));
        }
        if (wants("entropy_contraction")) {
            report.merge(entropy_contraction_check(first.history, second.history, profile,
                                                   first.data, second.data, problem, pair,
                                                   allowance));
        }
        report.set_metadata("allowance", std::to_string(allowance));
    }

    auto battery = default_entropy_battery(problem, grid.horizon(), v.delta_list, v.psi_scale);
    if (v.battery_seed != 0) {
        auto psis = random_psis(problem, v.battery_seed, v.psi_scale, battery.psis.size() - 1);
        std::copy(psis.begin(), psis.end(), battery.psis.begin() + 1);
    }
    if (wants("entropy")) {
        report.merge(entropy_battery(first.history, problem, profile, pair, first.data.f, battery,
                                     v.entropy_tol * scale));
    }
    if (wants("weak")) {
        for (std::size_t j = 1; j < battery.psis.size(); ++j) {
            const auto& eta = battery.psis[j];
            const double r = weak_residual(first.history, problem, pair, first.data.f, eta);
            const double tol = v.weak_tol * std::max(1.0, scale) *
                               std::max(1.0, eta.cwiseAbs().maxCoeff());
            report.add("weak[eta=" + std::to_string(j) + "]", r, 0.0, tol);
        }
    }
    if (wants("energy")) {
        const bool zero_initial = first.data.u0.cwiseAbs().maxCoeff() == 0.0;
        for (double k : v.energy_levels) {
            const auto audit = energy_audit(first.history, problem, pair, first.data.f, k);
            std::ostringstream name;
            name << "energy[K=" << k << "]";
            report.add(name.str(), audit.lhs, zero_initial ? audit.bound : audit.bound_with_initial,
                       audit.allowed_excess,
                       zero_initial ? "" : "bound includes the initial-data term");
        }
    }

    out.write_text("verify.json", to_json(report));
    out.write("checks.csv", [&](std::ostream& s) { write_checks_csv(s, report); });
    print_checks(report);
    std::cout << report.checks().size() << " checks, " << report.failures() << " failed\n";
    return report.all_pass() ? kExitOk : kExitCheckFailed;
}

// --- cascade --------------------------------------------------------------------------------

int run_cascade(const RunConfig& cfg, OutputDir& out) {
    const auto problem = cfg.problem();
    const auto grid = cfg.grid();
    const NodalField u0 = cfg.initial_field(problem, cfg.initial);
    const auto f = cfg.forcing_field(problem, grid, cfg.forcing);
    const auto& cs = cfg.cascade;
    const auto report = run_cascade(problem, cfg.kernel_pair(), cfg.profile(), grid, u0, f,
                                    cs.m_ladder, cs.n_ladder, cfg.solver, cs.threads);
    const double tol = cs.tol * std::max(data_scale(problem, grid, u0, f),
                                         std::numeric_limits<double>::min());
    const auto cert = extract_limit(report, tol);

    out.write_text("cascade.json", to_json(report));
    out.write_text("limit.json", to_json(cert));
    out.write("increments.csv", [&](std::ostream& s) { write_increments_csv(s, report); });
    if (cert.limit) {
        out.write("limit_history.csv", [&](std::ostream& s) { write_history_csv(s, *cert.limit, problem); });
    }

    const std::size_t violations = report.monotone_m.violations + report.monotone_n.violations +
                                   report.envelope_n.violations + report.envelope.violations +
                                   report.negative_part_direct.violations;
    std::cout << report.runs.size() << " runs (" << report.failed_runs() << " failed); ordering "
              << "violations " << violations << "; L1 bounds "
              << (report.all_bounds_pass() ? "hold" : "FAIL") << "\n"
              << "limit at (m,n) = (" << cert.idx.m << "," << cert.idx.n << "): " << cert.message
              << "\n";
    const bool ok = report.failed_runs() == 0 && violations == 0 && report.all_bounds_pass() &&
                    cert.converged;
    return ok ? kExitOk : kExitCheckFailed;
}

// --- kernels --------------------------------------------------------------------------------

int run_kernels(const RunConfig& cfg, const KernelsArgs& args, OutputDir& out) {
    const auto pair = cfg.kernel_pair();
    const double horizon = cfg.time.horizon;
    const auto points = log_spaced(1e-2 * horizon, horizon, std::max<std::size_t>(args.points, 2));

    out.write("kernels.csv", [&](std::ostream& s) {
        s << "t,k,l,k_integral,l_integral\n" << std::setprecision(17);
        for (double t : points) {
            s << t << ',' << pair.k(t) << ',' << pair.l(t) << ',' << pair.k_integral(t) << ','
              << pair.l_integral(t) << '\n';
        }
    });
    Json summary{{"kernel", pair.describe()},
                 {"family", to_string(pair.family())},
                 {"alpha", number(pair.alpha())},
                 {"gamma", number(pair.gamma())},
                 {"horizon", number(horizon)},
                 {"l_integrability_p", number(pair.l_integrability_p())}};
    bool ok = true;
    if (args.sonine_check) {
        const double residual = sonine_residual(pair, points);
        const bool pass = residual <= args.sonine_tol;
        ok = ok && pass;
        summary["sonine"] = {{"t_min", number(points.front())},
                             {"t_max", number(points.back())},
                             {"points", points.size()},
                             {"max_residual", number(residual)},
                             {"tolerance", number(args.sonine_tol)},
                             {"pass", pass}};
        std::cout << pair.describe() << ": max |(k*l)(t) - 1| = " << std::scientific
                  << std::setprecision(3) << residual << " over " << points.size()
                  << " points in [" << points.front() << ", " << points.back() << "] -> "
                  << (pass ? "PASS" : "FAIL") << std::defaultfloat << "\n";
    }
    if (args.weights) {
        const auto grid = cfg.grid();
        const auto w = conv_weights(pair, grid);
        out.write("weights.csv", [&](std::ostream& s) { w.write_csv(s); });
        summary["weights"] = {{"steps", grid.steps()}, {"uniform", w.uniform()}};
    }
    if (args.soe) {
        const auto grid = cfg.grid();
        const auto soe = SoECompression::compress(pair, cfg.solver.soe_tol, grid.min_dt(), horizon);
        out.write_text("soe.json", to_json(soe));
        summary["soe_modes"] = soe.size();
        std::cout << "SoE: " << soe.size() << " modes, achieved error " << soe.achieved_error() << "\n";
    }
    out.write_json("kernels.json", summary);
    return ok ? kExitOk : kExitCheckFailed;
}

// --- convergence ----------------------------------------------------------------------------

int run_convergence(const RunConfig& cfg, OutputDir& out) {
    const auto& ladder = cfg.convergence.ladder;
    const auto pair = cfg.kernel_pair();
    const auto profile = cfg.profile();
    if (!cfg.initial.file.empty()) {
        throw FieldError("initial.file", "convergence ladders need closed-form initial data");
    }

    std::vector<SpatialProblem> problems;
    std::vector<SolutionHistory> runs;
    for (const auto& e : ladder) {
        problems.push_back(cfg.problem(e.nx));
        const auto grid = cfg.grid(e.nt);
        const NodalField u0 = cfg.initial_field(problems.back(), cfg.initial);
        runs.push_back(solve(problems.back(), pair, profile, grid, u0,
                             cfg.forcing_field(problems.back(), grid, cfg.forcing), cfg.solver));
    }

    const auto& fine = runs.back();
    const std::size_t fine_stride = ladder.back().nx + 1;
    const bool vary_x = ladder.front().nx != ladder.back().nx;
    const bool vary_t = ladder.front().nt != ladder.back().nt;
    const std::string axis = vary_x && vary_t ? "joint" : (vary_x ? "space" : "time");

    std::vector<double> steps, max_errors, l1_errors;
    for (std::size_t k = 0; k + 1 < ladder.size(); ++k) {
        const auto& e = ladder[k];
        const std::size_t rx = ladder.back().nx / e.nx, rt = ladder.back().nt / e.nt;
        const auto& p = problems[k];
        double worst = 0.0;
        NodalField diff_T = p.zero_field();
        for (std::size_t n = 1; n <= e.nt; ++n) {
            if (std::abs(runs[k].grid.t(n) - fine.grid.t(n * rt)) > 1e-12 * cfg.time.horizon) {
                throw FieldError("convergence.ladder", "time grids do not nest");
            }
            for (std::size_t node = 0; node < p.node_count(); ++node) {
                const std::size_t i = node % (e.nx + 1), j = node / (e.nx + 1);
                const std::size_t fnode = j * rx * fine_stride + i * rx;
                const double d = runs[k].u[n][static_cast<Eigen::Index>(node)] -
                                 fine.u[n * rt][static_cast<Eigen::Index>(fnode)];
                worst = std::max(worst, std::abs(d));
                if (n == e.nt) diff_T[static_cast<Eigen::Index>(node)] = d;
            }
        }
        max_errors.push_back(worst);
        l1_errors.push_back(l1_norm(p, diff_T));
        steps.push_back(axis == "time" ? cfg.time.horizon / static_cast<double>(e.nt)
                                       : p.mesh().length_x / static_cast<double>(e.nx));
    }

    double order = std::numeric_limits<double>::quiet_NaN();
    std::string message;
    try {
        order = fitted_order(steps, max_errors);
        message = "fitted " + axis + " order " + std::to_string(order);
    } catch (const InputError& e) {
        message = e.what();
    }
    bool ok = std::isfinite(order);
    if (ok && cfg.convergence.has_expected) {
        ok = std::abs(order - cfg.convergence.expected_order) <= cfg.convergence.order_tol;
    }

    Json rows = Json::array();
    out.write("convergence.csv", [&](std::ostream& s) {
        s << "nx,nt,step,max_error,l1_error_T,observed_order\n" << std::setprecision(17);
        for (std::size_t k = 0; k < steps.size(); ++k) {
            double local = std::numeric_limits<double>::quiet_NaN();
            if (k + 1 < steps.size() && max_errors[k] > 0.0 && max_errors[k + 1] > 0.0 &&
                steps[k] != steps[k + 1]) {
                local = std::log(max_errors[k] / max_errors[k + 1]) / std::log(steps[k] / steps[k + 1]);
            }
            s << ladder[k].nx << ',' << ladder[k].nt << ',' << steps[k] << ',' << max_errors[k] << ','
              << l1_errors[k] << ',';
            if (std::isfinite(local)) s << local;
            s << '\n';
            rows.push_back({{"nx", ladder[k].nx},
                            {"nt", ladder[k].nt},
                            {"step", number(steps[k])},
                            {"max_error", number(max_errors[k])},
                            {"l1_error_T", number(l1_errors[k])},
                            {"observed_order", number(local)}});
        }
    });
    Json summary{{"kernel", pair.describe()},
                 {"nonlinearity", profile.describe()},
                 {"axis", axis},
                 {"reference", {{"nx", ladder.back().nx}, {"nt", ladder.back().nt}}},
                 {"rows", rows},
                 {"fitted_order", number(order)},
                 {"message", message}};
    if (cfg.convergence.has_expected) {
        summary["expected_order"] = number(cfg.convergence.expected_order);
        summary["order_tol"] = number(cfg.convergence.order_tol);
    }
    summary["pass"] = ok;
    out.write_json("convergence.json", summary);

    std::cout << std::setw(6) << "nx" << std::setw(8) << "nt" << std::setw(14) << "max error"
              << std::setw(14) << "L1 error(T)\n";
    for (std::size_t k = 0; k < steps.size(); ++k) {
        std::cout << std::setw(6) << ladder[k].nx << std::setw(8) << ladder[k].nt << std::scientific
                  << std::setprecision(3) << std::setw(14) << max_errors[k] << std::setw(14)
                  << l1_errors[k] << std::defaultfloat << "\n";
    }
    std::cout << message << (ok ? "" : " -> FAIL") << "\n";
    return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace fracpme::cli
