#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "zdjscc/core.hpp"
#include "zdjscc/quadrature.hpp"

// Nested-quantization codec. Encoder 1 is a midthread quantizer whose index
// is scaled by c; encoder 2 folds its index modulo c into a bounded set, so
// the channel sum lands on an integer lattice that the receiver can split.
// The decoder recovers the fine index sequentially and resolves the fold
// ambiguity from the correlation between the sources.

namespace zdjscc {

/// Design triple of the nested-quantization scheme: quantizer step, odd
/// nesting modulus, and channel scaling.
struct NqParams {
    double delta = 1.0;
    int c = 1;
    double a = 1.0;

    NqParams() = default;
    NqParams(double delta_, int c_, double a_) : delta(delta_), c(c_), a(a_) {
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw std::invalid_argument("NqParams: delta must be positive");
        if (c < 1 || c % 2 == 0)
            throw std::invalid_argument("NqParams: c must be an odd positive integer");
        if (!(a > 0.0) || !std::isfinite(a))
            throw std::invalid_argument("NqParams: a must be positive");
    }
};

/// Midthread index: nearest integer to x/delta, half away from zero.
inline long quantize_index(double x, double delta) noexcept {
    return lround_half_away(x / delta);
}

/// Fold an index into {-(c-1)/2, ..., (c-1)/2}.
inline long nest_index(long i2, int c) noexcept {
    return i2 - static_cast<long>(c) * lround_half_away(static_cast<double>(i2) / c);
}

/// Encoder pair: y1 = a c i1(x1), y2 = a fold(i2(x2)).
inline std::pair<double, double> nq_encode(double x1, double x2, const NqParams& p) noexcept {
    const long i1 = quantize_index(x1, p.delta);
    const long it2 = nest_index(quantize_index(x2, p.delta), p.c);
    return {p.a * p.c * static_cast<double>(i1), p.a * static_cast<double>(it2)};
}

/// Joint cell statistics of the quantizer pair on a truncated index range:
/// cell probabilities and cell-conditional means of both sources, plus the
/// accumulated quantization distortions. Depends on (delta, model) only.
class QuantizerGrid {
  public:
    static std::shared_ptr<const QuantizerGrid> build(double delta, const SourceModel& model);

    int n() const noexcept { return n_; }  // indices run over [-n, n]
    double delta() const noexcept { return delta_; }
    const SourceModel& model() const noexcept { return model_; }

    double pr(long i1, long i2) const noexcept { return pr_[at(i1, i2)]; }
    double xbar1(long i1, long i2) const noexcept { return xbar1_[at(i1, i2)]; }
    double xbar2(long i1, long i2) const noexcept { return xbar2_[at(i1, i2)]; }

    /// Clamped lookup used for decoded cells that may fall outside the range.
    double xbar1_clamped(long i1, long i2) const noexcept {
        return xbar1_[at(clamp_index(i1), clamp_index(i2))];
    }
    double xbar2_clamped(long i1, long i2) const noexcept {
        return xbar2_[at(clamp_index(i1), clamp_index(i2))];
    }

    long clamp_index(long i) const noexcept {
        return std::clamp(i, static_cast<long>(-n_), static_cast<long>(n_));
    }

    double total_mass() const noexcept { return total_mass_; }
    /// E{(x_m - xbar_m)^2} accumulated over all cells (per source).
    double eps_q1() const noexcept { return eps_q1_; }
    double eps_q2() const noexcept { return eps_q2_; }

  private:
    QuantizerGrid(double delta, const SourceModel& model)
        : delta_(delta), model_(model) {}

    std::size_t at(long i1, long i2) const noexcept {
        const std::size_t w = 2 * static_cast<std::size_t>(n_) + 1;
        return static_cast<std::size_t>(i1 + n_) * w + static_cast<std::size_t>(i2 + n_);
    }

    void build_joint();
    void build_degenerate();  // rho_x = 1: all mass on the diagonal

    double delta_;
    SourceModel model_;
    int n_ = 0;
    double total_mass_ = 0.0;
    double eps_q1_ = 0.0;
    double eps_q2_ = 0.0;
    std::vector<double> pr_, xbar1_, xbar2_;
};

inline std::shared_ptr<const QuantizerGrid> QuantizerGrid::build(double delta,
                                                                 const SourceModel& model) {
    if (!(delta > 0.0)) throw std::invalid_argument("QuantizerGrid: delta must be positive");
    auto grid = std::shared_ptr<QuantizerGrid>(new QuantizerGrid(delta, model));
    grid->n_ = static_cast<int>(std::ceil(6.0 * model.sigma_x() / delta));
    const std::size_t w = 2 * static_cast<std::size_t>(grid->n_) + 1;
    grid->pr_.assign(w * w, 0.0);
    grid->xbar1_.resize(w * w);
    grid->xbar2_.resize(w * w);
    // centers as fallback for cells that carry no probability mass
    for (long i1 = -grid->n_; i1 <= grid->n_; ++i1)
        for (long i2 = -grid->n_; i2 <= grid->n_; ++i2) {
            grid->xbar1_[grid->at(i1, i2)] = i1 * delta;
            grid->xbar2_[grid->at(i1, i2)] = i2 * delta;
        }
    if (model.rho_x() >= 1.0)
        grid->build_degenerate();
    else
        grid->build_joint();
    return grid;
}

inline void QuantizerGrid::build_joint() {
    const int n = n_;
    const double sx = model_.sigma_x();
    const double rho = model_.rho_x();
    const double sc = sx * std::sqrt(1.0 - rho * rho);  // conditional std of x2 | x1
    const double inv_sc = 1.0 / sc;
    // cells with |x2 - rho x1| beyond 8 conditional sigmas carry no mass
    const long band = static_cast<long>(std::ceil(8.0 * sc / delta_)) + 1;

    double xn[GaussLegendre16::kNodes], wn[GaussLegendre16::kNodes];
    double x2n[GaussLegendre16::kNodes], w2n[GaussLegendre16::kNodes];
    GaussLegendre16::nodes(-0.5 * delta_, 0.5 * delta_, xn, wn);

    for (long i1 = -n; i1 <= n; ++i1) {
        const double c1 = i1 * delta_;
        double phi1[GaussLegendre16::kNodes];
        for (unsigned u = 0; u < GaussLegendre16::kNodes; ++u)
            phi1[u] = wn[u] * normal_pdf(c1 + xn[u], 0.0, sx);
        const long center2 = lround_half_away(rho * c1 / delta_);
        const long lo = std::max<long>(-n, center2 - band);
        const long hi = std::min<long>(n, center2 + band);
        for (long i2 = lo; i2 <= hi; ++i2) {
            const double c2 = i2 * delta_;
            GaussLegendre16::nodes(c2 - 0.5 * delta_, c2 + 0.5 * delta_, x2n, w2n);
            double mass = 0.0, s1 = 0.0, s2 = 0.0, q1 = 0.0, q2 = 0.0;
            for (unsigned u = 0; u < GaussLegendre16::kNodes; ++u) {
                const double x1 = c1 + xn[u];
                const double mu2 = rho * x1;
                double row_mass = 0.0, row_s2 = 0.0, row_q2 = 0.0;
                for (unsigned v = 0; v < GaussLegendre16::kNodes; ++v) {
                    const double t = (x2n[v] - mu2) * inv_sc;
                    const double pv = w2n[v] * kInvSqrt2Pi * inv_sc * std::exp(-0.5 * t * t);
                    row_mass += pv;
                    row_s2 += pv * x2n[v];
                    row_q2 += pv * x2n[v] * x2n[v];
                }
                mass += phi1[u] * row_mass;
                s1 += phi1[u] * x1 * row_mass;
                q1 += phi1[u] * x1 * x1 * row_mass;
                s2 += phi1[u] * row_s2;
                q2 += phi1[u] * row_q2;
            }
            const std::size_t k = at(i1, i2);
            pr_[k] = mass;
            total_mass_ += mass;
            if (mass > 1e-300) {
                xbar1_[k] = s1 / mass;
                xbar2_[k] = s2 / mass;
                eps_q1_ += q1 - xbar1_[k] * xbar1_[k] * mass;
                eps_q2_ += q2 - xbar2_[k] * xbar2_[k] * mass;
            }
        }
    }
}

inline void QuantizerGrid::build_degenerate() {
    const int n = n_;
    const double sx = model_.sigma_x();
    for (long i = -n; i <= n; ++i) {
        const double a = (i * delta_ - 0.5 * delta_) / sx;
        const double b = (i * delta_ + 0.5 * delta_) / sx;
        const double mass = normal_mass(a, b);
        const std::size_t k = at(i, i);
        pr_[k] = mass;
        total_mass_ += mass;
        if (mass > 1e-300) {
            const double mean = sx * normal_first_moment(a, b) / mass;
            const double m2 = sx * sx * normal_second_moment(a, b);
            xbar1_[k] = mean;
            xbar2_[k] = mean;
            eps_q1_ += m2 - mean * mean * mass;
            eps_q2_ += m2 - mean * mean * mass;
        }
    }
}

/// Fold-collapsed tables: probabilities and conditional means keyed by
/// (i1, folded index). Each collapsed mean is the probability-weighted
/// average of the cell means it merges.
class NqTables {
  public:
    NqTables(std::shared_ptr<const QuantizerGrid> grid, int c) : grid_(std::move(grid)), c_(c) {
        if (c < 1 || c % 2 == 0)
            throw std::invalid_argument("NqTables: c must be an odd positive integer");
        collapse();
    }

    static NqTables build(const NqParams& params, const SourceModel& model) {
        return NqTables(QuantizerGrid::build(params.delta, model), params.c);
    }

    const QuantizerGrid& grid() const noexcept { return *grid_; }
    int c() const noexcept { return c_; }
    int half() const noexcept { return (c_ - 1) / 2; }
    int n() const noexcept { return grid_->n(); }
    double delta() const noexcept { return grid_->delta(); }

    double pr_fold(long i1, long it2) const noexcept { return prf_[at(i1, it2)]; }
    double xtilde1(long i1, long it2) const noexcept { return xt1_[at(i1, it2)]; }
    double xtilde2(long i1, long it2) const noexcept { return xt2_[at(i1, it2)]; }

  private:
    std::size_t at(long i1, long it2) const noexcept {
        return static_cast<std::size_t>(i1 + grid_->n()) * c_ +
               static_cast<std::size_t>(it2 + half());
    }

    void collapse() {
        const int n = grid_->n();
        const std::size_t w = 2 * static_cast<std::size_t>(n) + 1;
        prf_.assign(w * c_, 0.0);
        xt1_.assign(w * c_, 0.0);
        xt2_.assign(w * c_, 0.0);
        for (long i1 = -n; i1 <= n; ++i1) {
            for (long i2 = -n; i2 <= n; ++i2) {
                const double p = grid_->pr(i1, i2);
                if (p <= 0.0) continue;
                const std::size_t k = at(i1, nest_index(i2, c_));
                prf_[k] += p;
                xt1_[k] += p * grid_->xbar1(i1, i2);
                xt2_[k] += p * grid_->xbar2(i1, i2);
            }
            for (long f = -half(); f <= half(); ++f) {
                const std::size_t k = at(i1, f);
                if (prf_[k] > 1e-300) {
                    xt1_[k] /= prf_[k];
                    xt2_[k] /= prf_[k];
                } else {
                    xt1_[k] = i1 * grid_->delta();
                    xt2_[k] = f * grid_->delta();
                }
            }
        }
    }

    std::shared_ptr<const QuantizerGrid> grid_;
    int c_;
    std::vector<double> prf_, xt1_, xt2_;
};

/// Second moments of the marginal index and of the folded index, from the
/// 1D cell masses: S1 = sum Pr(i) i^2 and S2 = sum Pr(i) fold(i)^2.
/// Transmit powers are P1 = c^2 a^2 S1 and P2 = a^2 S2.
inline std::pair<double, double> nq_index_moments(double delta, int c, const SourceModel& model) {
    const double sx = model.sigma_x();
    const long m = static_cast<long>(std::ceil(9.0 * sx / delta)) + 1;
    double s1 = 0.0, s2 = 0.0;
    for (long i = -m; i <= m; ++i) {
        const double p = normal_mass((i * delta - 0.5 * delta) / sx, (i * delta + 0.5 * delta) / sx);
        const double f = static_cast<double>(nest_index(i, c));
        s1 += p * static_cast<double>(i) * static_cast<double>(i);
        s2 += p * f * f;
    }
    return {s1, s2};
}

/// Average per-encoder transmit powers (p1 >= p2).
inline std::pair<double, double> nq_power(const NqParams& p, const SourceModel& model) {
    const auto [s1, s2] = nq_index_moments(p.delta, p.c, model);
    return {static_cast<double>(p.c) * p.c * p.a * p.a * s1, p.a * p.a * s2};
}

/// Channel scaling that meets the sum power constraint p1 + p2 = 2P.
inline double nq_power_matched_a(double delta, int c, const SourceModel& model,
                                 double power_budget) {
    const auto [s1, s2] = nq_index_moments(delta, c, model);
    const double denom = static_cast<double>(c) * c * s1 + s2;
    if (!(denom > 0.0)) return std::sqrt(2.0 * power_budget);
    return std::sqrt(2.0 * power_budget / denom);
}

struct NqDecodeOptions {
    /// Clamp the fold-shift at zero. This is how the printed resolution rule
    /// reads, but it forbids negative intervals and destroys reconstruction
    /// of the negative half of source 2 whenever folding is active; kept
    /// selectable to measure that effect.
    bool clamp_fold_shift_at_zero = false;
};

struct NqDecodedCell {
    long j1 = 0;        // coarse index
    long j2_fold = 0;   // fine index inside the fold set
    long shift = 0;     // resolved fold shift k
    long j2 = 0;        // j2_fold + shift*c, clamped to the table range
};

/// Sequential index decisions: nearest coarse lattice point, nearest fold
/// offset, then the interval shift that maximizes the joint density of
/// (j1, j2) under the source correlation.
inline NqDecodedCell nq_decode_indices(double z, const NqParams& p, const SourceModel& model,
                                       int n, const NqDecodeOptions& opt = {}) noexcept {
    NqDecodedCell d;
    const double ac = p.a * p.c;
    d.j1 = std::clamp(lround_half_away(z / ac), static_cast<long>(-n), static_cast<long>(n));
    const double r = z - ac * static_cast<double>(d.j1);
    const long hc = (p.c - 1) / 2;
    d.j2_fold = std::clamp(lround_half_away(r / p.a), -hc, hc);
    d.shift = lround_half_away((model.rho_x() * static_cast<double>(d.j1) -
                                static_cast<double>(d.j2_fold)) / p.c);
    if (opt.clamp_fold_shift_at_zero) d.shift = std::max<long>(d.shift, 0);
    d.j2 = std::clamp(d.j2_fold + d.shift * p.c, static_cast<long>(-n), static_cast<long>(n));
    return d;
}

/// Full decode: index decisions followed by the conditional-mean lookup of
/// the decoded cell.
inline std::pair<double, double> nq_decode(double z, const NqParams& p, const SourceModel& model,
                                           const NqTables& tables,
                                           const NqDecodeOptions& opt = {}) noexcept {
    const NqDecodedCell d = nq_decode_indices(z, p, model, tables.n(), opt);
    return {tables.grid().xbar1(d.j1, d.j2), tables.grid().xbar2(d.j1, d.j2)};
}

/// Analytical per-source distortion, split into quantization, fold-inversion
/// and channel-noise terms.
inline DistortionReport nq_distortion(const NqParams& p, const SourceModel& model,
                                      const ChannelModel& channel, const NqTables& tables,
                                      const NqDecodeOptions& opt = {}) {
    const QuantizerGrid& g = tables.grid();
    const int n = g.n();
    const int c = p.c;
    const long hc = (c - 1) / 2;
    const double rho = model.rho_x();

    DistortionReport rep;

    // quantization term; the high-rate value is used only for very fine steps
    double eq1, eq2;
    if (p.delta / model.sigma_x() < 0.05) {
        eq1 = eq2 = p.delta * p.delta / 12.0;
    } else {
        eq1 = g.eps_q1();
        eq2 = g.eps_q2();
    }

    // fold-inversion term: mismatch between cell means and collapsed means
    double ec1 = 0.0, ec2 = 0.0;
    for (long i1 = -n; i1 <= n; ++i1)
        for (long i2 = -n; i2 <= n; ++i2) {
            const double pr = g.pr(i1, i2);
            if (pr <= 0.0) continue;
            const long f = nest_index(i2, c);
            const double d1 = g.xbar1(i1, i2) - tables.xtilde1(i1, f);
            const double d2 = g.xbar2(i1, i2) - tables.xtilde2(i1, f);
            ec1 += pr * d1 * d1;
            ec2 += pr * d2 * d2;
        }

    // channel-noise term. The received lattice has spacing a, so the decoded
    // sub-cell displacement m has probability mass(a(m -/+ 1/2))/sigma_n and
    // transitions depend on the displacement only; edge bins absorb tails.
    const double sn = channel.sigma_n();
    const long span = static_cast<long>(2 * n + 1) * c;
    const long M = std::min<long>(static_cast<long>(std::ceil(10.0 * sn / p.a)) + 1, span);
    std::vector<double> trans(2 * M + 1);
    for (long m = -M; m <= M; ++m) {
        const double lo = (p.a * (static_cast<double>(m) - 0.5)) / sn;
        const double hi = (p.a * (static_cast<double>(m) + 0.5)) / sn;
        double t = normal_mass(lo, hi);
        if (m == -M) t = normal_cdf(hi);
        if (m == M) t = normal_tail(lo);
        trans[static_cast<std::size_t>(m + M)] = t;
    }

    double en1 = 0.0, en2 = 0.0;
    for (long i1 = -n; i1 <= n; ++i1) {
        for (long f = -hc; f <= hc; ++f) {
            const double pif = tables.pr_fold(i1, f);
            if (pif < 1e-14) continue;
            const double xt1 = tables.xtilde1(i1, f);
            const double xt2 = tables.xtilde2(i1, f);
            const long base = c * i1 + f;
            double acc1 = 0.0, acc2 = 0.0;
            for (long m = -M; m <= M; ++m) {
                const double t = trans[static_cast<std::size_t>(m + M)];
                if (t < 1e-18) continue;
                const long u = base + m;
                long j1 = lround_half_away(static_cast<double>(u) / c);
                long j2f = u - c * j1;
                j1 = std::clamp(j1, static_cast<long>(-n), static_cast<long>(n));
                j2f = std::clamp(j2f, -hc, hc);
                long k = lround_half_away((rho * static_cast<double>(j1) -
                                           static_cast<double>(j2f)) / c);
                if (opt.clamp_fold_shift_at_zero) k = std::max<long>(k, 0);
                const long j2 = j2f + k * c;
                const double e1 = xt1 - g.xbar1_clamped(j1, j2);
                const double e2 = xt2 - g.xbar2_clamped(j1, j2);
                acc1 += t * e1 * e1;
                acc2 += t * e2 * e2;
            }
            en1 += pif * acc1;
            en2 += pif * acc2;
        }
    }

    rep.d1 = eq1 + ec1 + en1;
    rep.d2 = eq2 + ec2 + en2;
    rep.terms["quantization_1"] = eq1;
    rep.terms["quantization_2"] = eq2;
    rep.terms["fold_inversion_1"] = ec1;
    rep.terms["fold_inversion_2"] = ec2;
    rep.terms["channel_noise_1"] = en1;
    rep.terms["channel_noise_2"] = en2;
    return rep;
}

/// Convenience overload that builds the tables internally.
inline DistortionReport nq_distortion(const NqParams& p, const SourceModel& model,
                                      const ChannelModel& channel) {
    const NqTables tables = NqTables::build(p, model);
    return nq_distortion(p, model, channel, tables);
}

}  // namespace zdjscc
