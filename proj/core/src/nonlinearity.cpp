#include "fracpme/nonlinearity.hpp"

#include "fracpme/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace fracpme {

std::string to_string(NonlinearityKind kind) {
    switch (kind) {
    case NonlinearityKind::Identity: return "identity";
    case NonlinearityKind::PorousMedium: return "pme";
    case NonlinearityKind::Custom: return "custom";
    }
    return "unknown";
}

NonlinearityKind parse_nonlinearity_kind(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "identity" || lower == "id" || lower == "linear") return NonlinearityKind::Identity;
    if (lower == "pme" || lower == "porous_medium" || lower == "porous-medium") {
        return NonlinearityKind::PorousMedium;
    }
    if (lower == "custom") return NonlinearityKind::Custom;
    throw ConfigError("unknown nonlinearity kind '" + name + "'");
}

// Fritsch-Carlson monotone cubic Hermite interpolant.
struct NonlinearityProfile::Table {
    std::vector<double> r;
    std::vector<double> p;
    std::vector<double> slope;  // derivative at each knot

    std::size_t segment(double x) const {
        auto it = std::upper_bound(r.begin(), r.end(), x);
        std::size_t i = static_cast<std::size_t>(it - r.begin());
        i = std::clamp<std::size_t>(i, 1, r.size() - 1);
        return i - 1;
    }

    double value(double x) const {
        const std::size_t i = segment(x);
        const double h = r[i + 1] - r[i];
        const double s = (x - r[i]) / h;
        const double s2 = s * s;
        const double s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * p[i] + (s3 - 2 * s2 + s) * h * slope[i] +
               (-2 * s3 + 3 * s2) * p[i + 1] + (s3 - s2) * h * slope[i + 1];
    }

    double derivative(double x) const {
        const std::size_t i = segment(x);
        const double h = r[i + 1] - r[i];
        const double s = (x - r[i]) / h;
        const double s2 = s * s;
        return ((6 * s2 - 6 * s) * p[i] + (6 * s - 6 * s2) * p[i + 1]) / h +
               (3 * s2 - 4 * s + 1) * slope[i] + (3 * s2 - 2 * s) * slope[i + 1];
    }
};

NonlinearityProfile::NonlinearityProfile(NonlinearityKind kind, double exponent, double mu,
                                         double R)
    : kind_(kind), exponent_(exponent), mu_(mu), R_(R) {
    if (!(mu > 0.0)) throw ConfigError("nonlinearity mu must be positive");
    if (!(R >= 0.0)) throw ConfigError("nonlinearity R must be non-negative");
}

NonlinearityProfile NonlinearityProfile::identity(double mu, double R) {
    return NonlinearityProfile(NonlinearityKind::Identity, 1.0, mu, R);
}

NonlinearityProfile NonlinearityProfile::porous_medium(double exponent, double mu, double R) {
    if (!(exponent > 1.0) || !std::isfinite(exponent)) {
        throw ConfigError("porous-medium exponent must be > 1");
    }
    return NonlinearityProfile(NonlinearityKind::PorousMedium, exponent, mu, R);
}

NonlinearityProfile NonlinearityProfile::custom(std::vector<double> r, std::vector<double> p,
                                                double mu, double R) {
    if (r.size() != p.size() || r.size() < 2) {
        throw InputError("custom nonlinearity table needs at least two (r, phi) rows");
    }
    for (std::size_t i = 1; i < r.size(); ++i) {
        if (!(r[i] > r[i - 1]) || !(p[i] > p[i - 1])) {
            throw InputError("custom nonlinearity table is not strictly increasing at row " +
                             std::to_string(i));
        }
    }
    if (!(r.front() <= 0.0 && r.back() >= 0.0)) {
        throw InputError("custom nonlinearity table must bracket r = 0");
    }
    auto table = std::make_shared<Table>();
    const std::size_t n = r.size();
    std::vector<double> secant(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (p[i + 1] - p[i]) / (r[i + 1] - r[i]);
    table->slope.resize(n);
    table->slope.front() = secant.front();
    table->slope.back() = secant.back();
    for (std::size_t i = 1; i + 1 < n; ++i) table->slope[i] = 0.5 * (secant[i - 1] + secant[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double a = table->slope[i] / secant[i];
        const double b = table->slope[i + 1] / secant[i];
        const double norm = a * a + b * b;
        if (norm > 9.0) {
            const double tau = 3.0 / std::sqrt(norm);
            table->slope[i] = tau * a * secant[i];
            table->slope[i + 1] = tau * b * secant[i];
        }
    }
    table->r = std::move(r);
    table->p = std::move(p);
    const double at_zero = table->value(0.0);
    const double scale = std::max(std::abs(table->p.front()), std::abs(table->p.back()));
    if (std::abs(at_zero) > 1e-12 * std::max(1.0, scale)) {
        throw InputError("custom nonlinearity must satisfy phi(0) = 0");
    }
    NonlinearityProfile out(NonlinearityKind::Custom, 1.0, mu, R);
    out.table_ = std::move(table);
    return out;
}

NonlinearityProfile NonlinearityProfile::custom_from_csv(const std::string& path, double mu,
                                                         double R) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open nonlinearity table '" + path + "'");
    std::vector<double> r;
    std::vector<double> p;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double a = 0.0;
        double b = 0.0;
        if (!(fields >> a >> b)) {
            if (r.empty()) continue;  // header
            throw InputError(path + ":" + std::to_string(line_no) + ": expected 'r,phi'");
        }
        r.push_back(a);
        p.push_back(b);
    }
    return custom(std::move(r), std::move(p), mu, R);
}

std::string NonlinearityProfile::describe() const {
    std::ostringstream out;
    out << to_string(kind_);
    if (kind_ == NonlinearityKind::PorousMedium) out << "(m=" << exponent_ << ")";
    out << " mu=" << mu_ << " R=" << R_;
    return out.str();
}

double NonlinearityProfile::r_min() const noexcept {
    return table_ ? table_->r.front() : -std::numeric_limits<double>::infinity();
}

double NonlinearityProfile::r_max() const noexcept {
    return table_ ? table_->r.back() : std::numeric_limits<double>::infinity();
}

double NonlinearityProfile::phi(double r) const {
    switch (kind_) {
    case NonlinearityKind::Identity: return r;
    case NonlinearityKind::PorousMedium:
        return exponent_ == 2.0 ? std::abs(r) * r : std::pow(std::abs(r), exponent_ - 1.0) * r;
    case NonlinearityKind::Custom:
        if (r < table_->r.front() || r > table_->r.back()) {
            throw RangeError("phi argument outside the tabulated range");
        }
        return table_->value(r);
    }
    return r;
}

double NonlinearityProfile::phi_prime(double r) const {
    switch (kind_) {
    case NonlinearityKind::Identity: return 1.0;
    case NonlinearityKind::PorousMedium:
        return exponent_ == 2.0 ? 2.0 * std::abs(r)
                                : exponent_ * std::pow(std::abs(r), exponent_ - 1.0);
    case NonlinearityKind::Custom:
        if (r < table_->r.front() || r > table_->r.back()) {
            throw RangeError("phi' argument outside the tabulated range");
        }
        return table_->derivative(r);
    }
    return 1.0;
}

double NonlinearityProfile::b_inverse(double v) const {
    switch (kind_) {
    case NonlinearityKind::Identity: return v;
    case NonlinearityKind::PorousMedium:
        return std::copysign(std::pow(std::abs(v), 1.0 / exponent_), v);
    case NonlinearityKind::Custom: {
        const auto& t = *table_;
        if (v < t.p.front() || v > t.p.back()) {
            throw RangeError("b argument outside the range of the tabulated phi");
        }
        auto it = std::upper_bound(t.p.begin(), t.p.end(), v);
        std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - t.p.begin()), 1,
                                                t.p.size() - 1) - 1;
        if (v == t.p[i]) return t.r[i];
        if (v == t.p[i + 1]) return t.r[i + 1];
        std::uintmax_t iters = 200;
        auto f = [&](double x) { return t.value(x) - v; };
        auto root = boost::math::tools::toms748_solve(
            f, t.r[i], t.r[i + 1], t.p[i] - v, t.p[i + 1] - v,
            boost::math::tools::eps_tolerance<double>(52), iters);
        return 0.5 * (root.first + root.second);
    }
    }
    return v;
}

double phi(const NonlinearityProfile& profile, double r) { return profile.phi(r); }
double phi_prime(const NonlinearityProfile& profile, double r) { return profile.phi_prime(r); }
double b_inverse(const NonlinearityProfile& profile, double v) { return profile.b_inverse(v); }

double truncate_T(double K, double r) {
    if (!(K > 0.0)) throw DomainError("truncation level K must be positive");
    return std::max(-K, std::min(K, r));
}

double h_eps(HVariant variant, double eps, double y) {
    if (!(eps > 0.0)) throw DomainError("h_eps needs eps > 0");
    const double part = variant == HVariant::Plus ? std::max(y, 0.0) : std::max(-y, 0.0);
    // sqrt(p^2 + e^2) - e written without cancellation.
    return part * part / (std::hypot(part, eps) + eps);
}

EntropyTestFunction::EntropyTestFunction(double level, double smoothing)
    : level_(level), smoothing_(smoothing) {
    if (!(level > 0.0) || !(smoothing > 0.0)) {
        throw ConfigError("entropy test function needs K_S > 0 and eps_S > 0");
    }
}

double EntropyTestFunction::S(double r) const {
    const double a = std::abs(r);
    double value;
    if (a <= level_) {
        value = a;
    } else if (a < level_ + smoothing_) {
        const double s = (a - level_) / smoothing_;
        value = level_ + smoothing_ * (s - s * s * s + 0.5 * s * s * s * s);
    } else {
        value = level_ + 0.5 * smoothing_;
    }
    return std::copysign(value, r);
}

double EntropyTestFunction::S_prime(double r) const {
    const double a = std::abs(r);
    if (a <= level_) return 1.0;
    if (a >= level_ + smoothing_) return 0.0;
    const double s = (a - level_) / smoothing_;
    return 1.0 - s * s * (3.0 - 2.0 * s);
}

EntropyTestFunction entropy_S(double level, double smoothing) {
    return EntropyTestFunction(level, smoothing);
}

double eval_S(const EntropyTestFunction& s, double r) { return s.S(r); }
double eval_S_prime(const EntropyTestFunction& s, double r) { return s.S_prime(r); }

HphiReport validate_hphi(const NonlinearityProfile& profile, double r_max, std::size_t samples) {
    HphiReport report;
    report.mu = profile.mu();
    report.R = profile.R();
    const double top = std::min({r_max, profile.r_max(), -profile.r_min()});
    report.r_max = top;
    report.min_slope = std::numeric_limits<double>::infinity();
    if (!(top > profile.R()) || samples == 0) {
        // Nothing to sample beyond R inside the domain of phi.
        report.pass = true;
        return report;
    }
    for (std::size_t k = 1; k <= samples; ++k) {
        const double a = profile.R() + (top - profile.R()) * static_cast<double>(k) /
                                           static_cast<double>(samples);
        for (double r : {a, -a}) {
            const double slope = profile.phi_prime(r);
            ++report.samples;
            if (slope < report.min_slope) {
                report.min_slope = slope;
                report.argmin = r;
            }
        }
    }
    report.pass = report.min_slope >= report.mu;
    return report;
}

}  // namespace fracpme
