#include "fracpme/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <iomanip>

namespace fracpme {

namespace {

using json = nlohmann::ordered_json;

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json numbers(const std::vector<double>& xs) {
    json out = json::array();
    for (double x : xs) out.push_back(number(x));
    return out;
}

json audit_json(const OrderingAudit& a) {
    return json{{"checked", a.checked}, {"violations", a.violations}, {"max_excess", number(a.max_excess)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_double(std::ostream& out, double x) {
    out << std::setprecision(17) << x;
}

}  // namespace

std::string to_json(const VerificationReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks()) {
        checks.push_back(json{{"name", c.name},
                              {"lhs", number(c.lhs)},
                              {"rhs", number(c.rhs)},
                              {"slack", number(c.slack)},
                              {"tolerance", number(c.tolerance)},
                              {"pass", c.pass},
                              {"note", c.note}});
    }
    json meta = json::object();
    for (const auto& [k, v] : report.metadata()) meta[k] = v;
    return dump(json{{"all_pass", report.all_pass()},
                     {"failures", report.failures()},
                     {"worst_margin", number(report.worst_margin())},
                     {"metadata", meta},
                     {"checks", checks}});
}

std::string to_json(const CascadeReport& report) {
    json runs = json::array();
    for (const auto& r : report.runs) {
        runs.push_back(json{{"m", r.idx.m},
                            {"n", r.idx.n},
                            {"ok", r.ok},
                            {"error", r.error},
                            {"l1_qt", number(r.l1_qt)},
                            {"bound_truncated", number(r.bound_truncated)},
                            {"bound", number(r.bound)},
                            {"bound_pass", r.bound_pass}});
    }
    json inc_m = json::array();
    for (const auto& row : report.increments_m) inc_m.push_back(numbers(row));
    return dump(json{{"m_list", report.m_list},
                     {"n_list", report.n_list},
                     {"slack", number(report.slack)},
                     {"l_norm", number(report.l_norm)},
                     {"u0_norm", number(report.u0_norm)},
                     {"f_norm", number(report.f_norm)},
                     {"failed_runs", report.failed_runs()},
                     {"monotone_m", audit_json(report.monotone_m)},
                     {"monotone_n", audit_json(report.monotone_n)},
                     {"envelope_n", audit_json(report.envelope_n)},
                     {"envelope", audit_json(report.envelope)},
                     {"negative_part_swapped", audit_json(report.negative_part_swapped)},
                     {"negative_part_direct", audit_json(report.negative_part_direct)},
                     {"increments_m", inc_m},
                     {"increments_n", numbers(report.increments_n)},
                     {"runs", runs}});
}

std::string to_json(const LimitCertificate& cert) {
    return dump(json{{"m", cert.idx.m},
                     {"n", cert.idx.n},
                     {"tol", number(cert.tol)},
                     {"converged", cert.converged},
                     {"warning", cert.warning},
                     {"message", cert.message},
                     {"tail_m", numbers(cert.tail_m)},
                     {"tail_n", numbers(cert.tail_n)}});
}

std::string to_json(const EnergyAudit& a) {
    return dump(json{{"level", number(a.level)},
                     {"lhs", number(a.lhs)},
                     {"bound", number(a.bound)},
                     {"bound_with_initial", number(a.bound_with_initial)},
                     {"slack", number(a.slack)},
                     {"allowed_excess", number(a.allowed_excess)},
                     {"pass", a.pass},
                     {"pass_with_initial", a.pass_with_initial}});
}

std::string to_json(const SoECompression& soe) {
    json modes = json::array();
    for (const auto& m : soe.modes()) modes.push_back(json{{"weight", number(m.weight)}, {"rate", number(m.rate)}});
    return dump(json{{"size", soe.size()},
                     {"certified_tol", number(soe.certified_tol())},
                     {"achieved_error", number(soe.achieved_error())},
                     {"delta", number(soe.delta())},
                     {"horizon", number(soe.horizon())},
                     {"modes", modes}});
}

std::string to_json(const SolutionHistory& history) {
    json steps = json::array();
    std::size_t iterations = 0;
    std::size_t backtracks = 0;
    for (const auto& d : history.diagnostics) {
        iterations += d.iterations;
        backtracks += d.backtracks;
        steps.push_back(json{{"iterations", d.iterations},
                             {"backtracks", d.backtracks},
                             {"residual", number(d.residual)},
                             {"tolerance", number(d.tolerance)},
                             {"regularization", number(d.regularization)}});
    }
    return dump(json{{"time_steps", history.grid.steps()},
                     {"completed", history.completed()},
                     {"horizon", number(history.grid.horizon())},
                     {"memory", to_string(history.memory)},
                     {"soe_modes", history.soe_modes},
                     {"newton_iterations", iterations},
                     {"backtracks", backtracks},
                     {"steps", steps}});
}

void write_history_csv(std::ostream& out, const SolutionHistory& history,
                       const SpatialProblem& problem) {
    out << "t,node,x,y,u,v\n";
    for (std::size_t n = 0; n < history.u.size(); ++n) {
        for (std::size_t g = 0; g < problem.node_count(); ++g) {
            const auto p = problem.coord(g);
            const auto i = static_cast<Eigen::Index>(g);
            write_double(out, history.grid.t(n));
            out << ',' << g << ',';
            write_double(out, p.x());
            out << ',';
            write_double(out, p.y());
            out << ',';
            write_double(out, history.u[n][i]);
            out << ',';
            write_double(out, history.v[n][i]);
            out << '\n';
        }
    }
}

void write_increments_csv(std::ostream& out, const CascadeReport& report) {
    out << "direction,fixed,from,to,increment\n";
    for (std::size_t j = 0; j < report.increments_m.size(); ++j) {
        for (std::size_t i = 0; i < report.increments_m[j].size(); ++i) {
            out << "m," << report.n_list[j] << ',' << report.m_list[i] << ','
                << report.m_list[i + 1] << ',';
            write_double(out, report.increments_m[j][i]);
            out << '\n';
        }
    }
    for (std::size_t j = 0; j < report.increments_n.size(); ++j) {
        out << "n," << report.m_list.back() << ',' << report.n_list[j] << ','
            << report.n_list[j + 1] << ',';
        write_double(out, report.increments_n[j]);
        out << '\n';
    }
}

void write_checks_csv(std::ostream& out, const VerificationReport& report) {
    out << "name,lhs,rhs,slack,tolerance,pass\n";
    for (const auto& c : report.checks()) {
        out << '"' << c.name << "\",";
        write_double(out, c.lhs);
        out << ',';
        write_double(out, c.rhs);
        out << ',';
        write_double(out, c.slack);
        out << ',';
        write_double(out, c.tolerance);
        out << ',' << (c.pass ? 1 : 0) << '\n';
    }
}

}  // namespace fracpme
