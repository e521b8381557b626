#include "fracpme/stepper.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fracpme {

namespace {

using Eigen::VectorXd;

// K / m on interior unknowns with the two operations Newton needs: apply, and solve
// (kappa I + (K/m) diag(d)) x = rhs.
class ScaledOperator {
public:
    ScaledOperator(SparseMatrix k, double mass) : k_(std::move(k)) {
        k_ /= mass;
        const Eigen::Index n = k_.rows();
        tridiagonal_ = true;
        for (Eigen::Index i = 0; i < n && tridiagonal_; ++i) {
            for (SparseMatrix::InnerIterator it(k_, i); it; ++it) {
                if (std::abs(it.col() - i) > 1) {
                    tridiagonal_ = false;
                    break;
                }
            }
        }
        if (tridiagonal_) {
            lower_ = VectorXd::Zero(n);
            diag_ = VectorXd::Zero(n);
            upper_ = VectorXd::Zero(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                for (SparseMatrix::InnerIterator it(k_, i); it; ++it) {
                    if (it.col() == i - 1) lower_[i] = it.value();
                    else if (it.col() == i) diag_[i] = it.value();
                    else upper_[i] = it.value();
                }
            }
        }
    }

    void apply(const VectorXd& x, VectorXd& y) const {
        if (tridiagonal_) {
            const Eigen::Index n = x.size();
            for (Eigen::Index i = 0; i < n; ++i) {
                double s = diag_[i] * x[i];
                if (i > 0) s += lower_[i] * x[i - 1];
                if (i + 1 < n) s += upper_[i] * x[i + 1];
                y[i] = s;
            }
            return;
        }
        y.noalias() = k_ * x;
    }

    /// Returns false if the factorization breaks down.
    bool solve(double kappa, const VectorXd& d, const VectorXd& rhs, VectorXd& x) {
        return tridiagonal_ ? solve_thomas(kappa, d, rhs, x) : solve_sparse(kappa, d, rhs, x);
    }

private:
    // J is column diagonally dominant (K is an M-matrix scaled by d >= 0 on columns),
    // so elimination without pivoting is stable.
    bool solve_thomas(double kappa, const VectorXd& d, const VectorXd& rhs, VectorXd& x) {
        const Eigen::Index n = rhs.size();
        scratch_c_.resize(n);
        x.resize(n);
        double b = kappa + diag_[0] * d[0];
        if (!(std::abs(b) > 0.0) || !std::isfinite(b)) return false;
        scratch_c_[0] = n > 1 ? upper_[0] * d[1] / b : 0.0;
        x[0] = rhs[0] / b;
        for (Eigen::Index i = 1; i < n; ++i) {
            const double a = lower_[i] * d[i - 1];
            b = kappa + diag_[i] * d[i] - a * scratch_c_[i - 1];
            if (!(std::abs(b) > 0.0) || !std::isfinite(b)) return false;
            scratch_c_[i] = i + 1 < n ? upper_[i] * d[i + 1] / b : 0.0;
            x[i] = (rhs[i] - a * x[i - 1]) / b;
        }
        for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= scratch_c_[i] * x[i + 1];
        return x.allFinite();
    }

    bool solve_sparse(double kappa, const VectorXd& d, const VectorXd& rhs, VectorXd& x) {
        Eigen::SparseMatrix<double> j = (k_ * d.asDiagonal()).eval();
        for (Eigen::Index i = 0; i < j.rows(); ++i) j.coeffRef(i, i) += kappa;
        j.makeCompressed();
        if (!analyzed_) {
            lu_.analyzePattern(j);
            analyzed_ = true;
        }
        lu_.factorize(j);
        if (lu_.info() != Eigen::Success) return false;
        x = lu_.solve(rhs);
        return lu_.info() == Eigen::Success && x.allFinite();
    }

    SparseMatrix k_;
    bool tridiagonal_ = false;
    VectorXd lower_, diag_, upper_, scratch_c_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    bool analyzed_ = false;
};

double max_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

SolutionHistory solve(const SpatialProblem& problem, const KernelPair& pair,
                      const NonlinearityProfile& profile, const TimeGrid& grid,
                      const NodalField& u0, const SpaceTimeField& forcing,
                      const SolverOptions& options) {
    if (static_cast<std::size_t>(u0.size()) != problem.node_count()) {
        throw InputError("initial data does not match the mesh");
    }
    if (!u0.allFinite()) throw InputError("initial data has non-finite values");
    if (forcing.size() != grid.steps() + 1) {
        throw InputError("forcing must provide slices for t_0..t_N");
    }
    for (std::size_t n = 1; n < forcing.size(); ++n) {
        if (static_cast<std::size_t>(forcing[n].size()) != problem.node_count() ||
            !forcing[n].allFinite()) {
            throw InputError("forcing slice " + std::to_string(n) + " is malformed");
        }
    }
    if (options.probe_hypotheses) {
        problem.probe_coercivity(grid);
        const auto hphi = validate_hphi(profile);
        if (!hphi.pass) {
            std::ostringstream msg;
            msg << "phi' = " << hphi.min_slope << " at r = " << hphi.argmin << " is below mu = "
                << hphi.mu << " outside |r| <= R = " << hphi.R;
            throw HypothesisViolation("Hphi", msg.str());
        }
    }

    auto history = std::make_shared<SolutionHistory>(grid);
    history->memory = options.memory;
    history->u0_data = u0;
    const std::size_t width = problem.interior_count();
    const double mass = problem.interior_mass();

    auto memory = make_history(options.memory, pair, grid, width, options.soe_tol);
    if (const auto* soe = dynamic_cast<const SoEHistory*>(memory.get());
        soe != nullptr && soe->compression()) {
        history->soe_modes = soe->compression()->size();
    }

    VectorXd u_prev = problem.restrict_interior(u0);
    history->u.push_back(problem.extend_interior(u_prev));
    {
        NodalField v0 = history->u.front();
        for (Eigen::Index i = 0; i < v0.size(); ++i) v0[i] = profile.phi(v0[i]);
        history->v.push_back(std::move(v0));
    }

    std::unique_ptr<ScaledOperator> op;
    if (!problem.time_dependent()) {
        op = std::make_unique<ScaledOperator>(problem.assemble_stiffness(0.0), mass);
    }

    VectorXd lag(width), f(width), u(width), r(width), r_try(width), u_try(width);
    VectorXd phi_u(width), k_phi(width), d(width), delta(width), rhs_scale(width);
    const Eigen::Index w = static_cast<Eigen::Index>(width);

    auto residual = [&](const VectorXd& x, double kappa, VectorXd& out) {
        for (Eigen::Index i = 0; i < w; ++i) phi_u[i] = profile.phi(x[i]);
        op->apply(phi_u, k_phi);
        out = kappa * (x - u_prev) + lag + k_phi - f;
    };

    auto fail = [&](std::size_t n, const std::string& why) {
        std::ostringstream msg;
        msg << "step " << n << " (t=" << grid.t(n) << "): " << why;
        throw StepFailure(msg.str(), n, history);
    };

    for (std::size_t n = 1; n <= grid.steps(); ++n) {
        if (problem.time_dependent()) {
            op = std::make_unique<ScaledOperator>(problem.assemble_stiffness(grid.t(n)), mass);
        }
        const double kappa = memory->diagonal(n);
        memory->lagged(n, std::span<double>(lag.data(), width));
        f = problem.restrict_interior(forcing[n]);

        const double scale = std::max(1.0, max_norm(kappa * u_prev - lag + f));
        const double tol = options.newton_tol * scale;

        StepDiagnostics diag;
        u = u_prev;
        residual(u, kappa, r);
        double r_inf = max_norm(r);
        diag.residual_trace.push_back(r_inf);
        double eps = options.regularization * std::max(1.0, max_norm(u));
        while (r_inf > tol) {
            if (!r.allFinite()) fail(n, "residual is NaN");
            if (diag.iterations >= options.max_iter) {
                fail(n, "Newton did not converge in " + std::to_string(options.max_iter) +
                            " iterations (residual " + std::to_string(r_inf) + ")");
            }
            for (Eigen::Index i = 0; i < w; ++i) d[i] = std::max(profile.phi_prime(u[i]), eps);
            if (!op->solve(kappa, d, -r, delta)) {
                eps *= 10.0;
                if (eps > options.regularization_cap * std::max(1.0, max_norm(u))) {
                    fail(n, "Jacobian is singular after regularization escalation");
                }
                continue;
            }
            const double r_norm = r.norm();
            double step = 1.0;
            bool accepted = false;
            for (std::size_t b = 0; b <= options.max_backtracks; ++b) {
                u_try = u + step * delta;
                residual(u_try, kappa, r_try);
                if (r_try.allFinite() && r_try.norm() <= (1.0 - options.armijo * step) * r_norm) {
                    accepted = true;
                    break;
                }
                step *= options.damping;
                ++diag.backtracks;
            }
            if (!accepted) {
                eps *= 10.0;
                if (eps > options.regularization_cap * std::max(1.0, max_norm(u))) {
                    fail(n, "line search exhausted (residual " + std::to_string(r_inf) + ")");
                }
                continue;
            }
            u.swap(u_try);
            r.swap(r_try);
            r_inf = max_norm(r);
            diag.residual_trace.push_back(r_inf);
            ++diag.iterations;
        }
        if (!u.allFinite()) fail(n, "solution is NaN");
        diag.residual = r_inf;
        diag.tolerance = tol;
        diag.regularization = eps;

        const VectorXd increment = u - u_prev;
        memory->push(n, std::span<const double>(increment.data(), width));
        u_prev = u;

        NodalField full = problem.extend_interior(u);
        NodalField vfull = problem.zero_field();
        for (std::size_t k = 0; k < width; ++k) {
            vfull[static_cast<Eigen::Index>(problem.interior_node(k))] =
                profile.phi(u[static_cast<Eigen::Index>(k)]);
        }
        history->u.push_back(std::move(full));
        history->v.push_back(std::move(vfull));
        history->diagnostics.push_back(diag);
    }
    return std::move(*history);
}

EnergyAudit energy_audit(const SolutionHistory& history, const SpatialProblem& problem,
                         const KernelPair& pair, const SpaceTimeField& forcing, double level,
                         double allowed_fraction) {
    if (!(level > 0.0)) throw DomainError("energy audit level K must be positive");
    if (!history.complete()) throw InputError("energy audit needs a completed history");
    const TimeGrid& grid = history.grid;
    if (forcing.size() != grid.steps() + 1) throw InputError("forcing does not match the grid");

    // Plain gradient energy: stiffness of A = I on the same mesh.
    const SpatialProblem laplace(problem.mesh(), constant_coefficient(1.0), 1.0);
    const SparseMatrix k = laplace.assemble_stiffness(0.0);

    EnergyAudit audit;
    audit.level = level;
    for (std::size_t n = 1; n <= grid.steps(); ++n) {
        Eigen::VectorXd t = problem.restrict_interior(history.v[n]);
        for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = truncate_T(level, t[i]);
        audit.lhs += grid.dt(n) * t.dot(k * t);
    }
    const double f_norm = l1_norm_qt(problem, grid, forcing);
    const double u0_norm = l1_norm(problem, history.u0_data);
    audit.bound = level / problem.nu() * f_norm;
    audit.bound_with_initial =
        level / problem.nu() * (f_norm + pair.k_integral(grid.horizon()) * u0_norm);
    audit.slack = audit.bound - audit.lhs;
    audit.allowed_excess = allowed_fraction * audit.bound;
    audit.pass = audit.lhs <= audit.bound + audit.allowed_excess;
    audit.pass_with_initial =
        audit.lhs <= audit.bound_with_initial + allowed_fraction * audit.bound_with_initial;
    return audit;
}

}  // namespace fracpme
