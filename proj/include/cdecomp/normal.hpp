#pragma once

#include <cmath>

#include "cdecomp/errors.hpp"

namespace cdecomp {

inline constexpr double sqrt2 = 1.4142135623730950488;
inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;
inline constexpr double log_sqrt_2pi = 0.91893853320467274178;

inline double norm_pdf(double x) { return inv_sqrt_2pi * std::exp(-0.5 * x * x); }

// Phi via erfc keeps full relative accuracy in the lower tail.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / sqrt2); }

namespace detail {

// Truncated expansion of -x Phi(x) / phi(x) for deep lower-tail x; relative
// error < 2e-15 for x <= -37, right where phi and Phi start to denormalize.
inline double mills_series(double x) {
    double inv = 1.0 / (x * x);
    return 1.0 +
           inv * (-1.0 + inv * (3.0 + inv * (-15.0 + inv * (105.0 + inv * -945.0))));
}

}  // namespace detail

// log Phi(x), stable into the deep lower tail where Phi underflows.
inline double log_norm_cdf(double x) {
    if (x > 6.0) return -norm_cdf(-x);  // log(1-e) ~ -e
    if (x > -37.0) return std::log(norm_cdf(x));
    return -0.5 * x * x - log_sqrt_2pi - std::log(-x) + std::log(detail::mills_series(x));
}

// phi(x)/Phi(x). The direct ratio keeps full precision until both parts
// denormalize; beyond that the series form never touches tiny numbers.
inline double inv_mills(double x) {
    if (x > -37.0) return norm_pdf(x) / norm_cdf(x);
    return -x / detail::mills_series(x);
}

inline double expit(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) throw domain_error("logit: p must be in (0, 1)");
    return std::log(p / (1.0 - p));
}

// Normal quantile, Wichura's algorithm AS 241 (PPND16), |error| ~ 1e-16.
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw domain_error("norm_quantile: p must be in (0, 1)");
    double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        double r = 0.180625 - q * q;
        double num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                           6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                         1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                       1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        double den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                           3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                         5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                       4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        double num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                           2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                         3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                       4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        double den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                           1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                         6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                       2.05319162663775882187e0) * r + 1.0);
        x = num / den;
    } else {
        r -= 5.0;
        double num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                           1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                         2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                       5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        double den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                           1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                         1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                       5.99832206555887937690e-1) * r + 1.0);
        x = num / den;
    }
    return (q < 0.0) ? -x : x;
}

}  // namespace cdecomp
