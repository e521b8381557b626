#include "fracpme/special.hpp"

#include "fracpme/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>

namespace fracpme {

double mittag_leffler_neg(double alpha, double x) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw DomainError("mittag_leffler_neg needs 0 < alpha <= 1");
    }
    if (!(x >= 0.0)) throw DomainError("mittag_leffler_neg needs x >= 0");
    if (alpha == 1.0) return std::exp(-x);
    if (x == 0.0) return 1.0;

    if (x <= 1.0) {
        double sum = 0.0;
        double power = 1.0;
        for (int k = 0; k < 2000; ++k) {
            const double term = power / boost::math::tgamma(alpha * k + 1.0);
            sum += term;
            if (std::abs(term) < 1e-18 && k > 4) break;
            power *= -x;
        }
        return sum;
    }

    constexpr double pi = boost::math::constants::pi<double>();
    const double t = std::pow(x, 1.0 / alpha);
    const double s = std::sin(alpha * pi) / pi;
    const double c = std::cos(alpha * pi);
    // r = e^y removes the r^{alpha-1} endpoint singularity.
    auto f = [&](double y) {
        const double ra = std::exp(alpha * y);
        const double decay = std::exp(-std::exp(y) * t);
        if (decay == 0.0) return 0.0;
        return decay * s * ra / (ra * ra + 2.0 * c * ra + 1.0);
    };
    double err = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    namespace bq = boost::math::quadrature;
    const double split = -std::log(t);
    return bq::gauss_kronrod<double, 31>::integrate(f, -inf, split, 25, 1e-14, &err) +
           bq::gauss_kronrod<double, 31>::integrate(f, split, inf, 25, 1e-14, &err);
}

double relaxation_oracle(double alpha, double lambda, double t) {
    if (t == 0.0 || lambda == 0.0) return 1.0;
    return mittag_leffler_neg(alpha, lambda * std::pow(t, alpha));
}

}  // namespace fracpme
