#pragma once

#include "fracpme/data.hpp"
#include "fracpme/errors.hpp"
#include "fracpme/history.hpp"
#include "fracpme/kernel.hpp"
#include "fracpme/nonlinearity.hpp"
#include "fracpme/space.hpp"
#include "fracpme/time_grid.hpp"

#include <cstddef>
#include <memory>
#include <vector>

namespace fracpme {

struct SolverOptions {
    double newton_tol = 1e-10;
    std::size_t max_iter = 50;
    std::size_t max_backtracks = 30;
    double damping = 0.5;
    double armijo = 1e-4;
    /// Jacobian shift eps_reg = regularization * max(1, ||u||_inf); escalated x10 up to the cap.
    double regularization = 1e-8;
    double regularization_cap = 1e-2;
    MemoryPath memory = MemoryPath::Naive;
    double soe_tol = 1e-9;
    /// Probe (HA) on all time nodes and (Hphi) before stepping.
    bool probe_hypotheses = true;
};

struct StepDiagnostics {
    std::size_t iterations = 0;
    std::size_t backtracks = 0;
    /// Max-norm of the final residual and the scaled tolerance it was compared with.
    double residual = 0.0;
    double tolerance = 0.0;
    double regularization = 0.0;
    /// Max-norm residual before each Newton update and after the last one.
    std::vector<double> residual_trace;
};

/// u_n and v_n = phi(u_n) on all nodes for n = 0..completed; boundary values are 0.
/// u[0] holds the interior initial data (boundary zeroed); the raw data stays in u0_data.
struct SolutionHistory {
    explicit SolutionHistory(TimeGrid time_grid) : grid(std::move(time_grid)) {}

    TimeGrid grid;
    NodalField u0_data;
    std::vector<NodalField> u;
    std::vector<NodalField> v;
    std::vector<StepDiagnostics> diagnostics;  // index n-1 for step n
    MemoryPath memory = MemoryPath::Naive;
    std::size_t soe_modes = 0;

    std::size_t completed() const noexcept { return u.empty() ? 0 : u.size() - 1; }
    bool complete() const noexcept { return completed() == grid.steps(); }
};

/// Newton failure or NaN at some step; carries everything computed before it.
class StepFailure : public Error {
public:
    StepFailure(const std::string& what, std::size_t step, std::shared_ptr<SolutionHistory> partial)
        : Error(what), step_(step), partial_(std::move(partial)) {}

    std::size_t step() const noexcept { return step_; }
    const SolutionHistory& partial() const { return *partial_; }

private:
    std::size_t step_;
    std::shared_ptr<SolutionHistory> partial_;
};

/// Fully implicit scheme on interior nodes i, steps n = 1..N:
///   kappa[n][n] (u_n - u_{n-1}) + lagged_n + (K(t_n) phi(u_n))_i / m_i = f_n,i.
/// `u0` and every f slice live on all nodes; boundary entries only affect data norms.
SolutionHistory solve(const SpatialProblem& problem, const KernelPair& pair,
                      const NonlinearityProfile& profile, const TimeGrid& grid,
                      const NodalField& u0, const SpaceTimeField& forcing,
                      const SolverOptions& options = {});

/// Discrete ||grad T_K(v)||^2_{L^2(Q_T)} against (K/nu) ||f||_{L^1(Q_T)}.
struct EnergyAudit {
    double level = 0.0;
    double lhs = 0.0;
    /// (K/nu) ||f||_1.
    double bound = 0.0;
    /// (K/nu) (||f||_1 + int_0^T k * ||u_0||_1); reduces to `bound` when u_0 = 0.
    double bound_with_initial = 0.0;
    double slack = 0.0;  // bound - lhs
    double allowed_excess = 0.0;
    bool pass = false;
    bool pass_with_initial = false;
};

EnergyAudit energy_audit(const SolutionHistory& history, const SpatialProblem& problem,
                         const KernelPair& pair, const SpaceTimeField& forcing, double level,
                         double allowed_fraction = 0.05);

}  // namespace fracpme
