#pragma once

#include "fracpme/data.hpp"
#include "fracpme/kernel.hpp"
#include "fracpme/nonlinearity.hpp"
#include "fracpme/space.hpp"
#include "fracpme/stepper.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace fracpme {

struct TruncationIndex {
    int m = 1;  // clip above at m
    int n = 1;  // clip below at -n
};

/// Componentwise clip of u0 and every forcing slice to [-n, m].
std::pair<NodalField, SpaceTimeField> truncate_data(const NodalField& u0, const SpaceTimeField& f,
                                                    TruncationIndex idx);

struct CascadeRun {
    TruncationIndex idx;
    bool ok = false;
    std::string error;
    std::shared_ptr<const SolutionHistory> history;  // partial on failure, may be null
    double l1_qt = 0.0;           // ||u_{m,n}||_{L1(Q_T)}
    double bound_truncated = 0.0;  // T ||u0^{m,n}||_1 + ||l||_1 ||f^{m,n}||_1
    double bound = 0.0;            // same with the untruncated data
    bool bound_pass = false;
};

/// Worst nodewise excess of an ordering that should hold, over all time nodes.
struct OrderingAudit {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double max_excess = 0.0;
};

struct CascadeReport {
    std::vector<int> m_list;
    std::vector<int> n_list;
    /// runs[i * n_list.size() + j] solves (m_list[i], n_list[j]).
    std::vector<CascadeRun> runs;
    double slack = 0.0;
    double l_norm = 0.0;
    double u0_norm = 0.0;
    double f_norm = 0.0;

    OrderingAudit monotone_m;  // u_{m,n} <= u_{m',n} for m < m'
    OrderingAudit monotone_n;  // u_{m,n} >= u_{m,n'} for n < n'
    OrderingAudit envelope_n;  // |u_{m,n}| <= g^n = |u_{M,n}| + |u_{1,n}|
    OrderingAudit envelope;    // |u_{M,n}| <= g = |u_{M,N}| + |u_{M,1}|
    // Two readings of the index order in the negative-part comparison.
    OrderingAudit negative_part_swapped;  // (u_{m,n})^- <= (u_{n,1})^-
    OrderingAudit negative_part_direct;   // (u_{m,n})^- <= (u_{1,n})^-

    /// increments_m[j][i] = ||u_{m_{i+1},n_j} - u_{m_i,n_j}||_{L1(Q_T)}.
    std::vector<std::vector<double>> increments_m;
    /// increments_n[j] = ||u_{M,n_{j+1}} - u_{M,n_j}||_{L1(Q_T)}.
    std::vector<double> increments_n;

    const CascadeRun& at(std::size_t mi, std::size_t ni) const {
        return runs.at(mi * n_list.size() + ni);
    }
    std::size_t failed_runs() const;
    bool all_bounds_pass() const;
};

/// Solves P(u0^{m,n}, f^{m,n}) on the whole ladder grid (concurrently), then audits
/// monotonicity, envelopes, L1 bounds and increments. Failed runs are recorded and skipped
/// by the audits that need them.
CascadeReport run_cascade(const SpatialProblem& problem, const KernelPair& pair,
                          const NonlinearityProfile& profile, const TimeGrid& grid,
                          const NodalField& u0, const SpaceTimeField& f,
                          const std::vector<int>& m_list, const std::vector<int>& n_list,
                          const SolverOptions& options = {}, std::size_t threads = 0);

struct LimitCertificate {
    std::shared_ptr<const SolutionHistory> limit;
    TruncationIndex idx;
    std::vector<double> tail_m;  // increments in m at the largest n
    std::vector<double> tail_n;  // increments in n at the largest m
    double tol = 0.0;
    bool converged = false;
    bool warning = false;
    std::string message;
};

LimitCertificate extract_limit(const CascadeReport& report, double tol);

}  // namespace fracpme
