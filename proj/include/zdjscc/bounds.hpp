#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "zdjscc/core.hpp"

// Closed-form performance limits for the symmetric bivariate-Gaussian /
// adder-channel problem: the two-branch SDR upper bound, its crossover SNR,
// the high-SNR approximation, and the linear (uncoded) reference curve.

namespace zdjscc {

enum class BoundBranch { low_snr, high_snr };

struct BoundPoint {
    double snr = 0.0;         // linear P/sigma_n^2
    double rho_x = 0.0;
    double sdr_linear = 1.0;  // sigma_x^2 / D
    BoundBranch branch = BoundBranch::low_snr;

    double sdr_db() const noexcept { return 10.0 * std::log10(sdr_linear); }
};

/// SNR below which the linear scheme meets the bound: rho/(1 - rho^2).
/// Returns +infinity at rho_x = 1 (the low-SNR branch applies everywhere).
inline double crossover_snr(double rho_x) {
    if (!(rho_x >= 0.0 && rho_x <= 1.0))
        throw std::invalid_argument("crossover_snr: rho_x must be in [0, 1]");
    if (rho_x == 1.0) return std::numeric_limits<double>::infinity();
    return rho_x / (1.0 - rho_x * rho_x);
}

namespace detail {

inline double opta_low_branch(double p, double sigma_n2, double rho) noexcept {
    return (2.0 * p * (1.0 + rho) + sigma_n2) / (p * (1.0 - rho * rho) + sigma_n2);
}

inline double opta_high_branch(double p, double sigma_n2, double rho) noexcept {
    return std::sqrt((2.0 * p * (1.0 + rho) + sigma_n2) / (sigma_n2 * (1.0 - rho * rho)));
}

}  // namespace detail

/// SDR upper bound for the symmetric case. The branch is selected by
/// comparing P/sigma_n^2 against the crossover SNR; the two expressions
/// coincide at the crossover.
inline BoundPoint opta_sdr(double p, double sigma_n2, double rho_x) {
    if (!(p > 0.0) || !(sigma_n2 > 0.0))
        throw std::invalid_argument("opta_sdr: p and sigma_n2 must be positive");
    if (!(rho_x >= 0.0 && rho_x <= 1.0))
        throw std::invalid_argument("opta_sdr: rho_x must be in [0, 1]");
    BoundPoint out;
    out.snr = p / sigma_n2;
    out.rho_x = rho_x;
    if (out.snr <= crossover_snr(rho_x)) {
        out.branch = BoundBranch::low_snr;
        out.sdr_linear = detail::opta_low_branch(p, sigma_n2, rho_x);
    } else {
        out.branch = BoundBranch::high_snr;
        out.sdr_linear = detail::opta_high_branch(p, sigma_n2, rho_x);
    }
    return out;
}

/// High-SNR approximation of the bound: sqrt(2 snr / (1 - rho_x)).
inline double high_snr_bound_sdr(double snr, double rho_x) {
    if (!(rho_x >= 0.0 && rho_x < 1.0))
        throw std::invalid_argument("high_snr_bound_sdr: requires rho_x in [0, 1)");
    if (!(snr > 0.0)) throw std::invalid_argument("high_snr_bound_sdr: snr must be positive");
    return std::sqrt(2.0 * snr / (1.0 - rho_x));
}

/// SDR of uncoded transmission: both encoders scale by sqrt(P)/sigma_x and
/// each source is recovered by its scalar MMSE estimate from z. Equals the
/// low-SNR branch of the bound at every SNR, hence meets the bound up to
/// the crossover and falls below it beyond.
inline double uncoded_sdr(double p, double sigma_n2, double rho_x) {
    if (!(p > 0.0) || !(sigma_n2 > 0.0))
        throw std::invalid_argument("uncoded_sdr: p and sigma_n2 must be positive");
    if (!(rho_x >= 0.0 && rho_x <= 1.0))
        throw std::invalid_argument("uncoded_sdr: rho_x must be in [0, 1]");
    return detail::opta_low_branch(p, sigma_n2, rho_x);
}

}  // namespace zdjscc
