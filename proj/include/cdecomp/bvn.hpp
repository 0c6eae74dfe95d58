#pragma once

#include <algorithm>
#include <cmath>

#include "cdecomp/errors.hpp"
#include "cdecomp/normal.hpp"

namespace cdecomp {

namespace detail {

// 20-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
inline constexpr double gl20_x[10] = {
    0.076526521133497333755, 0.227785851141645078080, 0.373706088715419560673,
    0.510867001950827098004, 0.636053680726515025453, 0.746331906460150792614,
    0.839116971822218823395, 0.912234428251325905868, 0.963971927277913791268,
    0.993128599185094924786};
inline constexpr double gl20_w[10] = {
    0.152753387130725850698, 0.149172986472603746788, 0.142096109318382051329,
    0.131688638449176626898, 0.118194531961518417312, 0.101930119817240435037,
    0.083276741576704748725, 0.062672048334109063570, 0.040601429800386941331,
    0.017614007139152118312};

// Drezner-Wesolowsky angular integrand: 2*pi*d/d(asin t) of Phi2 at t = sin(theta).
inline double bvn_theta_integrand(double h, double k, double theta) {
    double s = std::sin(theta);
    double c2 = std::cos(theta);
    c2 *= c2;
    if (c2 < 1e-300) {
        return (std::fabs(h - k) > 1e-14) ? 0.0 : std::exp(-h * k / 2.0);
    }
    return std::exp(-(h * h + k * k - 2.0 * h * k * s) / (2.0 * c2));
}

template <class F>
double adaptive_simpson_step(const F& f, double a, double b, double fa, double fm, double fb,
                             double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

inline double bvn_pdf(double x, double y, double rho) {
    double om = 1.0 - rho * rho;
    if (om <= 0.0) throw domain_error("bvn_pdf: |rho| must be < 1");
    double q = (x * x - 2.0 * rho * x * y + y * y) / om;
    return std::exp(-0.5 * q) / (2.0 * M_PI * std::sqrt(om));
}

// P(Z1 <= h, Z2 <= k) for standard bivariate normal with correlation rho.
// Moderate |rho|: Phi(h)Phi(k) plus the Drezner-Wesolowsky angular integral over
// [0, asin rho] by 20-point Gauss-Legendre (absolute error well under 1e-10).
// |rho| > 0.925: the complementary integral over [asin rho, pi/2] against
// Phi(min(h,k)) by adaptive Simpson, with the rho < 0 case reduced through
// Phi2(h,k;rho) = Phi(h) - Phi2(h,-k;-rho).
inline double bvn_cdf(double h, double k, double rho) {
    if (!(std::fabs(rho) < 1.0)) throw domain_error("bvn_cdf: |rho| must be < 1");
    if (rho == 0.0) return norm_cdf(h) * norm_cdf(k);
    if (std::fabs(rho) <= 0.925) {
        double asr = std::asin(rho);
        double half = 0.5 * asr;
        double sum = 0.0;
        for (int i = 0; i < 10; ++i) {
            sum += detail::gl20_w[i] * (detail::bvn_theta_integrand(h, k, half * (1.0 + detail::gl20_x[i])) +
                                        detail::bvn_theta_integrand(h, k, half * (1.0 - detail::gl20_x[i])));
        }
        double p = norm_cdf(h) * norm_cdf(k) + sum * half / (2.0 * M_PI);
        return std::clamp(p, 0.0, 1.0);
    }
    if (rho < 0.0) return std::max(0.0, norm_cdf(h) - bvn_cdf(h, -k, -rho));
    double tail = detail::adaptive_simpson(
        [&](double theta) { return detail::bvn_theta_integrand(h, k, theta); }, std::asin(rho),
        M_PI / 2.0, 1e-11);
    double p = norm_cdf(std::min(h, k)) - tail / (2.0 * M_PI);
    return std::clamp(p, 0.0, 1.0);
}

// P(Z1 <= h1, Z2 <= h2, Z3 <= h3) for a standard trivariate normal. Conditions
// on Z1 and integrates phi(z) * Phi2(conditional) by composite 20-point
// Gauss-Legendre on panels of length <= 2 (absolute error well under 1e-9;
// truncation at +-8.5 costs < 1e-17). A fixed rule keeps the value smooth in
// the arguments, which the probit fitters' line searches rely on; an adaptive
// rule's refinement jumps stall them near the optimum.
inline double tvn_cdf(double h1, double h2, double h3, double r12, double r13, double r23) {
    if (!(std::fabs(r12) < 1.0 && std::fabs(r13) < 1.0 && std::fabs(r23) < 1.0))
        throw domain_error("tvn_cdf: correlations must be in (-1, 1)");
    if (r12 == 0.0 && r13 == 0.0) return norm_cdf(h1) * bvn_cdf(h2, h3, r23);
    double s2 = std::sqrt(1.0 - r12 * r12);
    double s3 = std::sqrt(1.0 - r13 * r13);
    double rc = (r23 - r12 * r13) / (s2 * s3);
    if (std::fabs(rc) > 1.0 + 1e-9)
        throw domain_error("tvn_cdf: correlation matrix is not positive definite");
    rc = std::clamp(rc, -1.0 + 1e-12, 1.0 - 1e-12);
    auto cond = [&](double z) {
        return norm_pdf(z) * bvn_cdf((h2 - r12 * z) / s2, (h3 - r13 * z) / s3, rc);
    };
    const double lo = -8.5;
    double hi = std::min(h1, 8.5);
    if (hi <= lo) return norm_cdf(h1) * bvn_cdf((h2 - r12 * h1) / s2, (h3 - r13 * h1) / s3, rc);
    int panels = static_cast<int>(std::ceil((hi - lo) / 2.0));
    double step = (hi - lo) / panels;
    double p = 0.0;
    for (int k = 0; k < panels; ++k) {
        double half = 0.5 * step;
        double mid = lo + k * step + half;
        for (int i = 0; i < 10; ++i) {
            p += half * detail::gl20_w[i] *
                 (cond(mid - half * detail::gl20_x[i]) + cond(mid + half * detail::gl20_x[i]));
        }
    }
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace cdecomp
