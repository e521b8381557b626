#include "fracpme/cascade.hpp"

#include "fracpme/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace fracpme {

namespace {

NodalField clip(const NodalField& x, TruncationIndex idx) {
    return x.cwiseMax(-static_cast<double>(idx.n)).cwiseMin(static_cast<double>(idx.m));
}

void require_increasing(const std::vector<int>& list, const char* name) {
    if (list.empty()) throw ConfigError(std::string(name) + " ladder is empty");
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (list[i] < 1) throw ConfigError(std::string(name) + " ladder entries must be >= 1");
        if (i > 0 && list[i] <= list[i - 1]) {
            throw ConfigError(std::string(name) + " ladder must be strictly increasing");
        }
    }
}

// Nodewise audit of lo <= hi + slack over every time node.
void audit_le(OrderingAudit& audit, const SolutionHistory& lo, const SolutionHistory& hi,
              double slack) {
    for (std::size_t t = 0; t < lo.u.size(); ++t) {
        const double excess = (lo.u[t] - hi.u[t]).maxCoeff();
        ++audit.checked;
        audit.max_excess = std::max(audit.max_excess, excess);
        if (excess > slack) ++audit.violations;
    }
}

template <class Lhs, class Rhs>
void audit_fields(OrderingAudit& audit, const SolutionHistory& base, Lhs lhs, Rhs rhs,
                  double slack) {
    for (std::size_t t = 0; t < base.u.size(); ++t) {
        const double excess = (lhs(t) - rhs(t)).maxCoeff();
        ++audit.checked;
        audit.max_excess = std::max(audit.max_excess, excess);
        if (excess > slack) ++audit.violations;
    }
}

double difference_norm(const SpatialProblem& problem, const SolutionHistory& a,
                       const SolutionHistory& b) {
    std::vector<NodalField> diff(a.u.size());
    for (std::size_t t = 0; t < a.u.size(); ++t) diff[t] = a.u[t] - b.u[t];
    return l1_norm_qt(problem, a.grid, diff);
}

int find_index(const std::vector<int>& list, int value) {
    const auto it = std::find(list.begin(), list.end(), value);
    return it == list.end() ? -1 : static_cast<int>(it - list.begin());
}

}  // namespace

std::pair<NodalField, SpaceTimeField> truncate_data(const NodalField& u0, const SpaceTimeField& f,
                                                    TruncationIndex idx) {
    if (idx.m < 1 || idx.n < 1) throw ConfigError("truncation indices must be >= 1");
    SpaceTimeField ft(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) ft[k] = clip(f[k], idx);
    return {clip(u0, idx), std::move(ft)};
}

std::size_t CascadeReport::failed_runs() const {
    return static_cast<std::size_t>(
        std::count_if(runs.begin(), runs.end(), [](const auto& r) { return !r.ok; }));
}

bool CascadeReport::all_bounds_pass() const {
    return std::all_of(runs.begin(), runs.end(), [](const auto& r) { return r.ok && r.bound_pass; });
}

CascadeReport run_cascade(const SpatialProblem& problem, const KernelPair& pair,
                          const NonlinearityProfile& profile, const TimeGrid& grid,
                          const NodalField& u0, const SpaceTimeField& f,
                          const std::vector<int>& m_list, const std::vector<int>& n_list,
                          const SolverOptions& options, std::size_t threads) {
    require_increasing(m_list, "m");
    require_increasing(n_list, "n");
    if (f.size() != grid.steps() + 1) throw InputError("forcing does not match the time grid");

    CascadeReport report;
    report.m_list = m_list;
    report.n_list = n_list;
    report.slack = 10.0 * options.newton_tol;
    report.l_norm = pair.l_integral(grid.horizon());
    report.u0_norm = l1_norm(problem, u0);
    report.f_norm = l1_norm_qt(problem, grid, f);
    const double horizon = grid.horizon();
    const double untruncated = horizon * report.u0_norm + report.l_norm * report.f_norm;

    const std::size_t nm = m_list.size();
    const std::size_t nn = n_list.size();
    report.runs.resize(nm * nn);

    // Hypotheses are probed once here; the runs skip it.
    if (options.probe_hypotheses) problem.probe_coercivity(grid);
    SolverOptions run_options = options;
    run_options.probe_hypotheses = false;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < report.runs.size(); k = next++) {
            CascadeRun& run = report.runs[k];
            run.idx = {m_list[k / nn], n_list[k % nn]};
            const auto [ut, ft] = truncate_data(u0, f, run.idx);
            run.bound_truncated =
                horizon * l1_norm(problem, ut) + report.l_norm * l1_norm_qt(problem, grid, ft);
            run.bound = untruncated;
            try {
                auto h = std::make_shared<SolutionHistory>(
                    solve(problem, pair, profile, grid, ut, ft, run_options));
                run.l1_qt = l1_norm_qt(problem, grid, h->u);
                run.history = std::move(h);
                run.ok = true;
            } catch (const StepFailure& e) {
                run.error = e.what();
                run.history = std::make_shared<SolutionHistory>(e.partial());
            } catch (const Error& e) {
                run.error = e.what();
            }
            // The truncated-data bound is the sharper one and implies the other.
            const double tol = report.slack * horizon * problem.measure() + 1e-12 * run.bound_truncated;
            run.bound_pass = run.ok && std::isfinite(run.l1_qt) &&
                             run.l1_qt <= run.bound_truncated + tol && run.l1_qt <= run.bound + tol;
        }
    };
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t count = std::min(threads == 0 ? hw : threads, report.runs.size());
    if (count <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
    }

    auto ok = [&](std::size_t mi, std::size_t ni) { return report.at(mi, ni).ok; };
    auto hist = [&](std::size_t mi, std::size_t ni) -> const SolutionHistory& {
        return *report.at(mi, ni).history;
    };
    const double slack = report.slack;

    for (std::size_t ni = 0; ni < nn; ++ni) {
        for (std::size_t mi = 0; mi + 1 < nm; ++mi) {
            if (ok(mi, ni) && ok(mi + 1, ni)) audit_le(report.monotone_m, hist(mi, ni), hist(mi + 1, ni), slack);
        }
    }
    for (std::size_t mi = 0; mi < nm; ++mi) {
        for (std::size_t ni = 0; ni + 1 < nn; ++ni) {
            if (ok(mi, ni) && ok(mi, ni + 1)) audit_le(report.monotone_n, hist(mi, ni + 1), hist(mi, ni), slack);
        }
    }

    const std::size_t big_m = nm - 1;
    const std::size_t big_n = nn - 1;
    for (std::size_t ni = 0; ni < nn; ++ni) {
        if (!ok(0, ni) || !ok(big_m, ni)) continue;
        const auto& lo = hist(0, ni);
        const auto& hi = hist(big_m, ni);
        for (std::size_t mi = 0; mi < nm; ++mi) {
            if (!ok(mi, ni)) continue;
            const auto& u = hist(mi, ni);
            audit_fields(
                report.envelope_n, u, [&](std::size_t t) { return NodalField(u.u[t].cwiseAbs()); },
                [&](std::size_t t) { return NodalField(hi.u[t].cwiseAbs() + lo.u[t].cwiseAbs()); },
                slack);
        }
    }
    if (ok(big_m, big_n) && ok(big_m, 0)) {
        const auto& a = hist(big_m, big_n);
        const auto& b = hist(big_m, 0);
        for (std::size_t ni = 0; ni < nn; ++ni) {
            if (!ok(big_m, ni)) continue;
            const auto& u = hist(big_m, ni);
            audit_fields(
                report.envelope, u, [&](std::size_t t) { return NodalField(u.u[t].cwiseAbs()); },
                [&](std::size_t t) { return NodalField(a.u[t].cwiseAbs() + b.u[t].cwiseAbs()); },
                slack);
        }
    }

    auto neg = [](const NodalField& x) { return NodalField((-x).cwiseMax(0.0)); };
    for (std::size_t mi = 0; mi < nm; ++mi) {
        for (std::size_t ni = 0; ni < nn; ++ni) {
            if (!ok(mi, ni)) continue;
            const auto& u = hist(mi, ni);
            const int swapped_m = find_index(m_list, n_list[ni]);
            if (swapped_m >= 0 && ok(static_cast<std::size_t>(swapped_m), 0)) {
                const auto& w = hist(static_cast<std::size_t>(swapped_m), 0);
                audit_fields(
                    report.negative_part_swapped, u, [&](std::size_t t) { return neg(u.u[t]); },
                    [&](std::size_t t) { return neg(w.u[t]); }, slack);
            }
            if (ok(0, ni)) {
                const auto& w = hist(0, ni);
                audit_fields(
                    report.negative_part_direct, u, [&](std::size_t t) { return neg(u.u[t]); },
                    [&](std::size_t t) { return neg(w.u[t]); }, slack);
            }
        }
    }

    report.increments_m.assign(nn, {});
    for (std::size_t ni = 0; ni < nn; ++ni) {
        for (std::size_t mi = 0; mi + 1 < nm; ++mi) {
            report.increments_m[ni].push_back(ok(mi, ni) && ok(mi + 1, ni)
                                                  ? difference_norm(problem, hist(mi + 1, ni), hist(mi, ni))
                                                  : std::numeric_limits<double>::quiet_NaN());
        }
    }
    for (std::size_t ni = 0; ni + 1 < nn; ++ni) {
        report.increments_n.push_back(ok(big_m, ni) && ok(big_m, ni + 1)
                                          ? difference_norm(problem, hist(big_m, ni + 1), hist(big_m, ni))
                                          : std::numeric_limits<double>::quiet_NaN());
    }
    return report;
}

namespace {

// Last increment, and whether the tail fails to decrease.
std::pair<double, bool> tail_state(const std::vector<double>& inc) {
    if (inc.empty()) return {0.0, false};
    const double last = inc.back();
    const bool stalled = inc.size() >= 2 && last > 0.0 && last >= inc[inc.size() - 2];
    return {last, stalled};
}

}  // namespace

LimitCertificate extract_limit(const CascadeReport& report, double tol) {
    if (report.m_list.size() < 3 || report.n_list.size() < 3) {
        throw InputError("limit extraction needs at least 3 m-values and 3 n-values");
    }
    if (!(tol > 0.0)) throw ConfigError("limit tolerance must be positive");
    LimitCertificate cert;
    cert.tol = tol;
    const auto& last = report.at(report.m_list.size() - 1, report.n_list.size() - 1);
    cert.idx = last.idx;
    cert.limit = last.history;
    cert.tail_m = report.increments_m.back();
    cert.tail_n = report.increments_n;

    if (!last.ok || report.failed_runs() > 0) {
        cert.message = "some cascade runs failed; no certificate";
        cert.warning = true;
        return cert;
    }
    const auto [lm, stalled_m] = tail_state(cert.tail_m);
    const auto [ln, stalled_n] = tail_state(cert.tail_n);
    cert.warning = stalled_m || stalled_n;
    cert.converged = lm <= tol && ln <= tol && !cert.warning;
    if (cert.converged) {
        cert.message = "tail increments below tolerance";
    } else {
        cert.message = "tail increments above tolerance";
    }
    if (cert.warning) cert.message += "; increments are not decreasing";
    return cert;
}

}  // namespace fracpme
