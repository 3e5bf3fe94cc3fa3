#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>

// Scalar Gaussian helpers: density, tails and truncated moments, plus the
// second-moment/granular-distortion functions of a unit-variance midrise
// quantizer. Everything here is closed form (erf/erfc based).

namespace zdjscc {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2*pi)

/// Standard normal pdf.
inline double normal_pdf(double x) noexcept {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

inline double normal_pdf(double x, double mu, double sigma) noexcept {
    const double t = (x - mu) / sigma;
    return kInvSqrt2Pi / sigma * std::exp(-0.5 * t * t);
}

/// Standard normal cdf.
inline double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

/// Upper tail Q(x) = 1 - cdf(x), accurate for large x.
inline double normal_tail(double x) noexcept {
    return 0.5 * std::erfc(x * std::numbers::sqrt2 / 2.0);
}

/// Mass of N(0,1) on [a, b].
inline double normal_mass(double a, double b) noexcept {
    // difference of tails keeps precision when both endpoints are far out
    return normal_tail(a) - normal_tail(b);
}

/// First moment of N(0,1) on [a, b]: integral of x phi(x).
inline double normal_first_moment(double a, double b) noexcept {
    return normal_pdf(a) - normal_pdf(b);
}

/// Second moment of N(0,1) on [a, b]: integral of x^2 phi(x).
inline double normal_second_moment(double a, double b) noexcept {
    return normal_mass(a, b) + a * normal_pdf(a) - b * normal_pdf(b);
}

/// E{(x - kappa)^2 ; x >= kappa} for x ~ N(0,1).
inline double normal_tail_sq_dev(double kappa) noexcept {
    return (1.0 + kappa * kappa) * normal_tail(kappa) - kappa * normal_pdf(kappa);
}

/// Second moment and granular distortion of a unit-variance Gaussian put
/// through a midrise quantizer with step u: power() = E{q(x)^2} and
/// grain() = E{(x - q(x))^2}, with q(x) = u*(floor(x/u) + 1/2).
struct MidriseMoments {
    double power = 0.0;
    double grain = 0.0;
};

inline MidriseMoments midrise_moments_uncached(double u) noexcept {
    MidriseMoments m;
    const int imax = static_cast<int>(std::ceil(10.0 / u)) + 1;
    for (int i = 1; i <= imax; ++i) {
        const double a = (i - 1) * u, b = i * u;
        const double q = (i - 0.5) * u;
        const double p = normal_mass(a, b);
        const double m1 = normal_first_moment(a, b);
        const double m2 = normal_second_moment(a, b);
        m.power += q * q * p;
        m.grain += m2 - 2.0 * q * m1 + q * q * p;
    }
    // tail beyond imax*u collapses onto the outermost centroid
    const double a = imax * u;
    const double q = (imax + 0.5) * u;
    const double p = normal_tail(a);
    m.power += q * q * p;
    m.grain += normal_tail_sq_dev(a) + (a - q) * (2.0 * (normal_pdf(a) - a * p) + (a - q) * p);
    m.power *= 2.0;
    m.grain *= 2.0;
    return m;
}

/// Round half away from zero.
inline double round_half_away(double x) noexcept {
    return x < 0.0 ? std::ceil(x - 0.5) : std::floor(x + 0.5);
}

inline long lround_half_away(double x) noexcept {
    return static_cast<long>(round_half_away(x));
}

}  // namespace zdjscc
