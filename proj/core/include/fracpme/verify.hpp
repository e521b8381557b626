#pragma once

#include "fracpme/data.hpp"
#include "fracpme/kernel.hpp"
#include "fracpme/nonlinearity.hpp"
#include "fracpme/space.hpp"
#include "fracpme/stepper.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fracpme {

/// k = k1 + k2 with k1 = (k - k(delta))^+ 1_{t<delta} and k2 = min(k, k(delta)).
/// Both parts are non-negative and non-increasing, and k2(0+) = k(delta) is finite.
class KernelSplit {
public:
    KernelSplit(KernelPair pair, double delta);

    const KernelPair& pair() const noexcept { return pair_; }
    double delta() const noexcept { return delta_; }
    double k2_at_zero() const noexcept { return k_delta_; }

    double k1(double t) const;
    double k2(double t) const;
    /// Antiderivatives from 0.
    double k1_integral(double t) const;
    double k2_integral(double t) const;
    double k2_cell_integral(double lo, double hi) const;

    /// Product-integration weights of k2; those of k1 are kappa - kappa2.
    ConvolutionWeights k2_weights(const TimeGrid& grid) const;

private:
    KernelPair pair_;
    double delta_;
    double k_delta_;
};

struct CheckRecord {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

/// Named inequality checks; pass <=> lhs <= rhs + tolerance.
class VerificationReport {
public:
    const CheckRecord& add(std::string name, double lhs, double rhs, double tolerance,
                           std::string note = {});
    void merge(const VerificationReport& other);
    void set_metadata(const std::string& key, const std::string& value) { metadata_[key] = value; }

    const std::vector<CheckRecord>& checks() const noexcept { return checks_; }
    const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }
    bool all_pass() const;
    std::size_t failures() const;
    /// Smallest slack + tolerance over the checks (negative means a failure).
    double worst_margin() const;

private:
    std::vector<CheckRecord> checks_;
    std::map<std::string, std::string> metadata_;
};

/// Data of one problem instance P(u0, f).
struct ProblemData {
    NodalField u0;
    SpaceTimeField f;
};

/// The three L^1 contraction inequalities: absolute value, positive part, negative part.
/// `allowance` is added to the 1e-6 base tolerance.
VerificationReport contraction_check(const SolutionHistory& h1, const SolutionHistory& h2,
                                     const ProblemData& d1, const ProblemData& d2,
                                     const SpatialProblem& problem, const KernelPair& pair,
                                     double allowance = 0.0);

/// ||b(v1) - b(v2)||_{L^1(Q_T)} against the same right side, with b applied to stored v.
VerificationReport entropy_contraction_check(const SolutionHistory& h1, const SolutionHistory& h2,
                                             const NonlinearityProfile& profile,
                                             const ProblemData& d1, const ProblemData& d2,
                                             const SpatialProblem& problem,
                                             const KernelPair& pair, double allowance = 0.0);

/// |sum_n dt_n [ (eta, D_n u)_m + (K(t_n) phi(u_n), eta) - (f_n, eta)_m ]| with the scheme's
/// own operators (naive weights). eta[n] is the test slice at t_n and must vanish on the
/// boundary.
double weak_residual(const SolutionHistory& history, const SpatialProblem& problem,
                     const KernelPair& pair, const SpaceTimeField& forcing,
                     const SpaceTimeField& eta);
/// Time-independent test field.
double weak_residual(const SolutionHistory& history, const SpatialProblem& problem,
                     const KernelPair& pair, const SpaceTimeField& forcing, const NodalField& eta);

using TimeCutoff = std::function<double(double t)>;

struct EntropyResidual {
    double memory_k1 = 0.0;    // -int zeta_t [k1 * int S db], summed by parts
    double memory_k2 = 0.0;    // int zeta d_t[k2 * (b(v) - b(v0))] S(v - psi)
    double diffusion = 0.0;    // int zeta (A grad v, grad S(v - psi))
    double source = 0.0;       // int zeta f S(v - psi)
    double residual = 0.0;     // memory_k1 + memory_k2 + diffusion - source
};

/// Left side minus right side of the entropy inequality for one test triple (S, psi, zeta)
/// and one kernel split. psi must vanish on the boundary; zeta >= 0 with zeta(T) = 0.
EntropyResidual entropy_residual(const SolutionHistory& history, const SpatialProblem& problem,
                                 const NonlinearityProfile& profile, const SpaceTimeField& forcing,
                                 const EntropyTestFunction& S, const NodalField& psi,
                                 const TimeCutoff& zeta, const KernelSplit& split);

/// int_{u0}^{u} S(phi(s) - psi) ds, the inner Stieltjes integral int_{v0}^{v} S(sigma - psi) db
/// after sigma = phi(s). Piecewise Gauss-Legendre split at the kinks of the integrand.
double stieltjes_entropy(const NonlinearityProfile& profile, const EntropyTestFunction& S,
                         double psi, double u0, double u);

struct EntropyBattery {
    std::vector<EntropyTestFunction> shapes;
    std::vector<NodalField> psis;
    std::vector<std::pair<std::string, TimeCutoff>> cutoffs;
    std::vector<double> deltas;  // absolute split points
};

/// Default battery: 5 S shapes, 4 P1 bumps psi (including 0), 3 polynomial cutoffs and the
/// given split points. Bumps are scaled by `psi_scale`.
EntropyBattery default_entropy_battery(const SpatialProblem& problem, double horizon,
                                       const std::vector<double>& delta_fractions,
                                       double psi_scale = 0.5);

/// Runs every combination; each residual is checked against `tolerance`.
VerificationReport entropy_battery(const SolutionHistory& history, const SpatialProblem& problem,
                                   const NonlinearityProfile& profile, const KernelPair& pair,
                                   const SpaceTimeField& forcing, const EntropyBattery& battery,
                                   double tolerance);

struct ScalarRelaxation {
    std::vector<double> t;
    std::vector<double> u;
    std::vector<double> oracle;  // empty when no closed form is known
    double max_rel_error = 0.0;
};

/// Solves D_n[u] + lambda u_n = 0 with u(0) = u0. The oracle u0 E_alpha(-lambda t^alpha)
/// is attached for the fractional family (and the tempered one with gamma = 0).
ScalarRelaxation scalar_relaxation(const KernelPair& pair, double lambda, const TimeGrid& grid,
                                   double u0, MemoryPath path = MemoryPath::Naive,
                                   double soe_tol = 1e-9);

/// Least-squares slope of log(error) against log(step size).
double fitted_order(const std::vector<double>& steps, const std::vector<double>& errors);

}  // namespace fracpme
