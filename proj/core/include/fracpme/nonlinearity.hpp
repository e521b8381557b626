#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace fracpme {

enum class NonlinearityKind { Identity, PorousMedium, Custom };

std::string to_string(NonlinearityKind kind);
NonlinearityKind parse_nonlinearity_kind(const std::string& name);

/// Strictly increasing phi with phi(0) = 0 and its inverse b = phi^{-1}.
///
/// mu and R describe the slope bound phi'(r) >= mu for |r| > R; they are checked by
/// validate_hphi, not enforced at construction.
class NonlinearityProfile {
public:
    static NonlinearityProfile identity(double mu = 1.0, double R = 0.0);
    /// phi(r) = |r|^{m-1} r with m = exponent > 1.
    static NonlinearityProfile porous_medium(double exponent, double mu, double R);
    /// Monotone C^1 cubic (Fritsch-Carlson) through (r_i, phi_i). The table must be
    /// strictly increasing in both columns and pass through the origin.
    static NonlinearityProfile custom(std::vector<double> r, std::vector<double> phi, double mu,
                                      double R);
    /// CSV with columns r,phi (a header line is allowed).
    static NonlinearityProfile custom_from_csv(const std::string& path, double mu, double R);

    NonlinearityKind kind() const noexcept { return kind_; }
    double exponent() const noexcept { return exponent_; }
    double mu() const noexcept { return mu_; }
    double R() const noexcept { return R_; }
    std::string describe() const;

    double phi(double r) const;
    double phi_prime(double r) const;
    /// b(v) = phi^{-1}(v). Custom profiles throw RangeError outside the tabulated range.
    double b_inverse(double v) const;

    /// Domain of phi: infinite except for Custom tables.
    double r_min() const noexcept;
    double r_max() const noexcept;

private:
    struct Table;
    NonlinearityProfile(NonlinearityKind kind, double exponent, double mu, double R);

    NonlinearityKind kind_;
    double exponent_ = 1.0;
    double mu_ = 1.0;
    double R_ = 0.0;
    std::shared_ptr<const Table> table_;
};

double phi(const NonlinearityProfile& profile, double r);
double phi_prime(const NonlinearityProfile& profile, double r);
double b_inverse(const NonlinearityProfile& profile, double v);

/// T_K(r) = max(-K, min(K, r)).
double truncate_T(double K, double r);

enum class HVariant { Plus, Minus };

/// sqrt((y^+)^2 + eps^2) - eps, or the same with y^-.
double h_eps(HVariant variant, double eps, double y);

/// Mollified clamp S in the admissible test family: S(0) = 0, 0 <= S' <= 1,
/// S' = 1 on [-K_S, K_S], S' = 0 for |r| >= K_S + eps_S, S odd and C^1.
class EntropyTestFunction {
public:
    EntropyTestFunction(double level, double smoothing);

    double level() const noexcept { return level_; }
    double smoothing() const noexcept { return smoothing_; }
    double S(double r) const;
    double S_prime(double r) const;

private:
    double level_;
    double smoothing_;
};

EntropyTestFunction entropy_S(double level, double smoothing);
double eval_S(const EntropyTestFunction& s, double r);
double eval_S_prime(const EntropyTestFunction& s, double r);

struct HphiReport {
    double min_slope = 0.0;
    double argmin = 0.0;
    double mu = 0.0;
    double R = 0.0;
    double r_max = 0.0;
    std::size_t samples = 0;
    bool pass = false;
};

/// Samples phi' on |r| in (R, r_max] and compares its minimum with mu.
HphiReport validate_hphi(const NonlinearityProfile& profile, double r_max = 100.0,
                         std::size_t samples = 4000);

}  // namespace fracpme
