#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "zdjscc/gaussian.hpp"
#include "zdjscc/random.hpp"

namespace zdjscc {

/// Bivariate Gaussian source pair x_m = v + w_m, m = 1,2, with common part
/// v ~ N(0, rho*sigma_x^2) and private parts w_m ~ N(0, (1-rho)*sigma_x^2).
/// Marginals are N(0, sigma_x^2) with correlation rho_x in [0, 1].
class SourceModel {
  public:
    SourceModel(double sigma_x, double rho_x) : sigma_x_(sigma_x), rho_x_(rho_x) {
        if (!(sigma_x > 0.0) || !std::isfinite(sigma_x))
            throw std::invalid_argument("SourceModel: sigma_x must be positive");
        if (!(rho_x >= 0.0 && rho_x <= 1.0))
            throw std::invalid_argument("SourceModel: rho_x must be in [0, 1]");
    }

    double sigma_x() const noexcept { return sigma_x_; }
    double rho_x() const noexcept { return rho_x_; }
    double variance() const noexcept { return sigma_x_ * sigma_x_; }

    /// Variance of the common component v.
    double sigma_v2() const noexcept { return rho_x_ * variance(); }
    /// Variance of each private component w_m.
    double sigma_w2() const noexcept { return (1.0 - rho_x_) * variance(); }

    /// Covariance matrix eigenvalues sigma_x^2 (1 +/- rho_x).
    double lambda1() const noexcept { return variance() * (1.0 + rho_x_); }
    double lambda2() const noexcept { return variance() * (1.0 - rho_x_); }

  private:
    double sigma_x_;
    double rho_x_;
};

/// Memoryless adder channel with AWGN: z = y1 + y2 + n, n ~ N(0, sigma_n^2),
/// plus the per-encoder average power budget P (sum constraint 2P).
class ChannelModel {
  public:
    ChannelModel(double sigma_n, double power_budget)
        : sigma_n_(sigma_n), power_budget_(power_budget) {
        if (!(sigma_n > 0.0) || !std::isfinite(sigma_n))
            throw std::invalid_argument("ChannelModel: sigma_n must be positive");
        if (!(power_budget > 0.0) || !std::isfinite(power_budget))
            throw std::invalid_argument("ChannelModel: power budget must be positive");
    }

    /// Channel with the given SNR in dB at unit average power.
    static ChannelModel from_snr_db(double snr_db, double power_budget = 1.0) {
        const double snr = std::pow(10.0, snr_db / 10.0);
        return ChannelModel(std::sqrt(power_budget / snr), power_budget);
    }

    double sigma_n() const noexcept { return sigma_n_; }
    double noise_variance() const noexcept { return sigma_n_ * sigma_n_; }
    double power_budget() const noexcept { return power_budget_; }
    double snr() const noexcept { return power_budget_ / noise_variance(); }
    double snr_db() const noexcept { return 10.0 * std::log10(snr()); }

  private:
    double sigma_n_;
    double power_budget_;
};

/// Per-source mean squared errors and their average, with an optional
/// breakdown into named contributions.
struct DistortionReport {
    double d1 = 0.0;
    double d2 = 0.0;
    std::map<std::string, double> terms;

    double d() const noexcept { return 0.5 * (d1 + d2); }
};

/// One correlated source pair drawn from the model.
inline std::pair<double, double> sample_source_pair(const SourceModel& model,
                                                    RandomStream& stream) noexcept {
    const double sv = std::sqrt(model.sigma_v2());
    const double sw = std::sqrt(model.sigma_w2());
    const double v = sv * stream.next_gaussian();
    const double w1 = sw * stream.next_gaussian();
    const double w2 = sw * stream.next_gaussian();
    return {v + w1, v + w2};
}

/// Joint density of (x1, x2). Undefined at rho_x = 1 (singular covariance).
inline double joint_density(double x1, double x2, const SourceModel& model) {
    const double rho = model.rho_x();
    if (rho >= 1.0)
        throw std::domain_error("joint_density: degenerate correlation rho_x = 1");
    const double s2 = model.variance();
    const double om = 1.0 - rho * rho;
    const double q = (x1 * x1 - 2.0 * rho * x1 * x2 + x2 * x2) / (2.0 * s2 * om);
    return std::exp(-q) / (2.0 * std::numbers::pi * s2 * std::sqrt(om));
}

/// Channel use: z = y1 + y2 + n.
inline double gmac_transmit(double y1, double y2, const ChannelModel& channel,
                            RandomStream& stream) noexcept {
    return y1 + y2 + channel.sigma_n() * stream.next_gaussian();
}

/// Signal-to-distortion ratio in dB.
inline double sdr_db(double sigma_x2, double d) {
    if (!(d > 0.0)) throw std::domain_error("sdr_db: distortion must be positive");
    return 10.0 * std::log10(sigma_x2 / d);
}

inline double db_from_linear(double x) noexcept { return 10.0 * std::log10(x); }
inline double linear_from_db(double x) noexcept { return std::pow(10.0, x / 10.0); }

}  // namespace zdjscc
