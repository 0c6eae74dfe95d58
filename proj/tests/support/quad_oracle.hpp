#pragma once

// Independent bivariate normal rectangle probability for checking bvn_cdf:
// nested adaptive Simpson over the density itself, no shared code beyond exp.
#include <cmath>
#include <functional>

namespace testsupport {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

// P(X <= h, Y <= k) for standard bivariate normal with correlation rho
inline double quad_bvn(double h, double k, double rho) {
    const double pi = 3.14159265358979323846;
    const double lo = -8.5;
    double q = 1.0 - rho * rho;
    double norm = 1.0 / (2.0 * pi * std::sqrt(q));
    auto outer = [&](double x) {
        auto inner = [&](double y) {
            return std::exp(-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * q));
        };
        return integrate(inner, lo, k, 1e-12);
    };
    return norm * integrate(outer, lo, h, 1e-11);
}

}  // namespace testsupport
