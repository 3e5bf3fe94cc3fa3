#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "zdjscc/core.hpp"
#include "zdjscc/quadrature.hpp"

// Scalar-quantizer linear coder. Encoder 1 scales the source so that its
// midrise quantizer spends exactly the power left over by encoder 2, and
// transmits the representation value; encoder 2 clips and scales its source.
// The decoder picks the nearest channel-segment mean, then recovers the
// continuous part from the residual.

namespace zdjscc {

/// Configuration whose channel segments would overlap (or whose power
/// budget cannot be met); such configurations cannot be decoded uniquely.
struct GeometryError : std::runtime_error {
    explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// Conditional-spread geometry of the source pair used by the analytical
/// distortion model: ellipse width parameter b, noise width b_n, the
/// eccentricity factor theta in [1, 2] and the significant-mass segment
/// length l1 = 2 b sigma_x sqrt(theta (1 - rho)).
struct GeometryContext {
    double b = 4.0;
    double b_n = 4.0;
    double theta = 1.0;
    double l1 = 0.0;
    double kappa = 0.0;
    bool clip_dominated = true;  // l1 > 2 kappa

    GeometryContext(const SourceModel& model, double kappa_, double b_ = 4.0, double bn_ = 4.0)
        : b(b_), b_n(bn_), theta(theta_schedule(model.rho_x())), kappa(kappa_) {
        l1 = 2.0 * b * model.sigma_x() * std::sqrt(theta * (1.0 - model.rho_x()));
        clip_dominated = l1 > 2.0 * kappa;
    }

    /// Linear ramp from 1 at rho = 0 to 2 at rho = 0.7, constant above.
    static double theta_schedule(double rho_x) noexcept {
        return std::min(2.0, 1.0 + rho_x / 0.7);
    }
};

/// Design tuple (alpha, beta, delta, kappa) plus the derived encoder-1
/// scaling xi and the step of the scaled unit-variance source u.
struct SqlcParams {
    double alpha = 0.1;
    double beta = 1.0;
    double delta = 1.0;
    double kappa = 1.0;
    double xi = 1.0;
    double u = 1.0;  // delta / (sigma_x * xi)
};

/// Gaussian upper-tail clip probability Pr{x2 >= kappa}.
inline double clip_tail_probability(double kappa, double sigma_x) {
    if (kappa < 0.0) throw std::invalid_argument("clip_tail_probability: kappa must be >= 0");
    return normal_tail(kappa / sigma_x);
}

/// Average transmit power of the clip-and-scale encoder: truncated second
/// moment plus the probability mass accumulated at the clip level.
inline double sqlc_encoder2_power(double alpha, double kappa, const SourceModel& model) {
    const double sx = model.sigma_x();
    const double t = kappa / sx;
    const double trunc = sx * sx * normal_second_moment(-t, t);
    const double po = normal_tail(t);
    return alpha * alpha * (trunc + 2.0 * po * kappa * kappa);
}

namespace detail {

/// Checks the non-overlap condition delta (1 + alpha rho / xi) >
/// alpha min(2 kappa, l1) and throws when violated.
inline void check_separability(const SqlcParams& p, const SourceModel& model,
                               const GeometryContext& geom) {
    const double spacing = p.delta * (1.0 + p.alpha * model.rho_x() / p.xi);
    const double extent = p.alpha * std::min(2.0 * p.kappa, geom.l1);
    if (!(spacing > extent))
        throw GeometryError("sqlc: channel segments overlap (spacing " +
                            std::to_string(spacing) + " <= segment extent " +
                            std::to_string(extent) + ")");
}

}  // namespace detail

/// Builds params from the step of the scaled source. xi is chosen so the
/// quantizer output power is exactly the remaining budget 2P - P2; the
/// familiar sqrt(2P - P2)/sigma_x is its fine-step limit.
inline SqlcParams make_sqlc_params_scaled(double alpha, double beta, double u, double kappa,
                                          const SourceModel& model, const ChannelModel& channel) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(u > 0.0) || !(kappa > 0.0))
        throw std::invalid_argument("sqlc params must be positive");
    SqlcParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.kappa = kappa;
    p.u = u;
    const double p2 = sqlc_encoder2_power(alpha, kappa, model);
    const double v = 2.0 * channel.power_budget() - p2;
    if (!(v > 0.0)) throw GeometryError("sqlc: encoder 2 exhausts the power budget");
    p.xi = std::sqrt(v / midrise_moments(u).power) / model.sigma_x();
    p.delta = u * model.sigma_x() * p.xi;
    detail::check_separability(p, model, GeometryContext(model, kappa));
    return p;
}

/// Builds params from the channel-domain step delta (fixed point in xi).
inline SqlcParams make_sqlc_params(double alpha, double beta, double delta, double kappa,
                                   const SourceModel& model, const ChannelModel& channel) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(delta > 0.0) || !(kappa > 0.0))
        throw std::invalid_argument("sqlc params must be positive");
    const double p2 = sqlc_encoder2_power(alpha, kappa, model);
    const double v = 2.0 * channel.power_budget() - p2;
    if (!(v > 0.0)) throw GeometryError("sqlc: encoder 2 exhausts the power budget");
    double xi = std::sqrt(v) / model.sigma_x();
    for (int it = 0; it < 60; ++it) {
        const double u = delta / (model.sigma_x() * xi);
        if (u > 2.5) throw GeometryError("sqlc: step too coarse for the power budget");
        const double next = std::sqrt(v / midrise_moments(u).power) / model.sigma_x();
        if (std::abs(next - xi) <= 1e-14 * xi) {
            xi = next;
            break;
        }
        xi = next;
    }
    SqlcParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.delta = delta;
    p.kappa = kappa;
    p.xi = xi;
    p.u = delta / (model.sigma_x() * xi);
    detail::check_separability(p, model, GeometryContext(model, kappa));
    return p;
}

/// Encoder pair: midrise representation value of the scaled source, and the
/// clipped linear coder.
inline std::pair<double, double> sqlc_encode(double x1, double x2, const SqlcParams& p) noexcept {
    const double y1 = p.delta * (round_half_away(p.xi * x1 / p.delta - 0.5) + 0.5);
    const double y2 = p.alpha * std::clamp(x2, -p.kappa, p.kappa);
    return {y1, y2};
}

/// Mean of the channel segment attached to centroid q_i.
inline double segment_mean(double q_i, const SqlcParams& p, double rho_x) noexcept {
    return q_i * (1.0 + p.alpha * rho_x / p.xi);
}

/// Sequential decoder. The nearest segment mean fixes the centroid (ties
/// break toward the lower index, centroids limited to +/- 8 sigma_x xi);
/// the residual is amplified by beta around the conditional mean of x2
/// given the decoded centroid.
inline std::pair<double, double> sqlc_decode(double z, const SqlcParams& p,
                                             const SourceModel& model) noexcept {
    const double rho = model.rho_x();
    const double mu_factor = 1.0 + p.alpha * rho / p.xi;
    const double t = z / (mu_factor * p.delta) - 0.5;
    long i = static_cast<long>(std::ceil(t - 0.5));  // round half down: lower index on ties
    const long imax = std::max<long>(
        0, static_cast<long>(std::floor(8.0 * model.sigma_x() * p.xi / p.delta - 0.5)));
    i = std::clamp(i, -imax - 1, imax);
    const double q = p.delta * (static_cast<double>(i) + 0.5);
    const double xhat1 = q / p.xi;
    const double xhat2 = rho * xhat1 + p.beta * (z - q * mu_factor);
    return {xhat1, xhat2};
}

/// Channel-output density around a segment mean mu when clipping dominates:
/// convolution of the clipped-Gaussian density with the noise, plus the two
/// clip-mass atoms smeared by the noise.
inline double channel_output_pdf_clip_dominated(double z2, double mu, const SqlcParams& p,
                                                const SourceModel& model,
                                                const ChannelModel& channel) {
    const double sx = model.sigma_x();
    const double sn = channel.sigma_n();
    const double ak = p.alpha * p.kappa;
    const double po = normal_tail(p.kappa / sx);
    // the noise kernel is a spike of width sigma_n at z2 - mu
    const double d = z2 - mu;
    const double lo = std::max(-ak, d - 12.0 * sn);
    const double hi = std::min(ak, d + 12.0 * sn);
    const double body =
        lo >= hi ? 0.0
                 : integrate_adaptive(
                       [&](double y) {
                           return normal_pdf(y, 0.0, p.alpha * sx) *
                                  normal_pdf(z2 - mu - y, 0.0, sn);
                       },
                       lo, hi, 1e-12);
    return body + po * (normal_pdf(z2 - mu - ak, 0.0, sn) + normal_pdf(z2 - mu + ak, 0.0, sn));
}

/// Channel-output density when the correlation, not the clip, bounds the
/// segment: Gaussian with variance alpha^2 sigma_x^2 (1 - rho^2) + sigma_n^2.
inline double channel_output_pdf_correlation_dominated(double z2, double mu, const SqlcParams& p,
                                                       const SourceModel& model,
                                                       const ChannelModel& channel) {
    const double var = p.alpha * p.alpha * model.variance() *
                           (1.0 - model.rho_x() * model.rho_x()) +
                       channel.noise_variance();
    return normal_pdf(z2 - mu, 0.0, std::sqrt(var));
}

/// Probability that noise carries the received point past the midpoint
/// between neighbouring segments (both sides), evaluated for the segment at
/// the origin.
inline double threshold_probability(const SqlcParams& p, const SourceModel& model,
                                    const ChannelModel& channel, const GeometryContext& geom) {
    const double sx = model.sigma_x();
    const double sn = channel.sigma_n();
    const double T = 0.5 * p.delta * (1.0 + p.alpha * model.rho_x() / p.xi);
    if (geom.clip_dominated) {
        // tail of the clip-dominated pdf beyond T; integrating the noise tail
        // against the clipped density avoids the double integral. Only the
        // boundary layer within 12 sigma_n of T contributes above 1e-30.
        const double ak = p.alpha * p.kappa;
        const double po = normal_tail(p.kappa / sx);
        const double lo = std::max(-ak, T - 12.0 * sn);
        const double body =
            lo >= ak ? 0.0
                     : integrate_adaptive(
                           [&](double y) {
                               return normal_pdf(y, 0.0, p.alpha * sx) *
                                      normal_tail((T - y) / sn);
                           },
                           lo, ak, 1e-12);
        return 2.0 * (body + po * (normal_tail((T - ak) / sn) + normal_tail((T + ak) / sn)));
    }
    const double var = p.alpha * p.alpha * model.variance() *
                           (1.0 - model.rho_x() * model.rho_x()) +
                       channel.noise_variance();
    return 2.0 * normal_tail(T / std::sqrt(var));
}

/// Clipping distortion 2 E{(x2 - kappa)^2 ; x2 >= kappa}.
inline double sqlc_clip_distortion(double kappa, const SourceModel& model) {
    const double sx = model.sigma_x();
    return 2.0 * sx * sx * normal_tail_sq_dev(kappa / sx);
}

/// Average transmit powers (p1, p2). Encoder 1 meets the leftover budget
/// exactly by construction of xi.
inline std::pair<double, double> sqlc_power(const SqlcParams& p, const SourceModel& model) {
    const double p2 = sqlc_encoder2_power(p.alpha, p.kappa, model);
    const double sxi = model.sigma_x() * p.xi;
    const double p1 = sxi * sxi * midrise_moments(p.u).power;
    return {p1, p2};
}

/// Analytical distortion: quantization and centroid-jump terms for source 1
/// (mapped back through xi), clipping, residual-noise and anomaly terms for
/// source 2.
inline DistortionReport sqlc_distortion(const SqlcParams& p, const SourceModel& model,
                                        const ChannelModel& channel,
                                        const GeometryContext& geom) {
    detail::check_separability(p, model, geom);
    const double sx = model.sigma_x();
    const double sn2 = channel.noise_variance();
    const double sxi = model.sigma_x() * p.xi;

    const MidriseMoments mm = midrise_moments(p.u);
    const double eps_q = sxi * sxi * mm.grain;  // channel-domain granular distortion
    const double pth = threshold_probability(p, model, channel, geom);
    const double eps_ch1 = p.delta * p.delta * pth;

    const double eps_kappa = sqlc_clip_distortion(p.kappa, model);
    const double ab = p.alpha * p.beta;
    const double eps_ch2 = sx * sx * (1.0 - ab) * (1.0 - ab) + p.beta * p.beta * sn2;
    double eps_an;
    if (geom.clip_dominated) {
        eps_an = 4.0 * pth * p.kappa * p.kappa;
    } else {
        const double gamma = geom.l1 - p.delta;
        eps_an = pth * gamma * gamma;
    }

    DistortionReport rep;
    rep.d1 = (eps_q + eps_ch1) / (p.xi * p.xi);
    rep.d2 = eps_kappa + eps_ch2 + eps_an;
    rep.terms["quantization_1"] = eps_q / (p.xi * p.xi);
    rep.terms["centroid_jump_1"] = eps_ch1 / (p.xi * p.xi);
    rep.terms["clipping_2"] = eps_kappa;
    rep.terms["channel_noise_2"] = eps_ch2;
    rep.terms["anomalous_2"] = eps_an;
    rep.terms["threshold_probability"] = pth;
    return rep;
}

inline DistortionReport sqlc_distortion(const SqlcParams& p, const SourceModel& model,
                                        const ChannelModel& channel) {
    return sqlc_distortion(p, model, channel, GeometryContext(model, p.kappa));
}

}  // namespace zdjscc
