#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "zdjscc/core.hpp"
#include "zdjscc/nq.hpp"
#include "zdjscc/optimize.hpp"
#include "zdjscc/sqlc.hpp"

// End-to-end simulation harness. Samples are generated in fixed-size chunks,
// each chunk from its own substream, and chunk sums are reduced in chunk
// order, so results are bit-identical no matter how many workers run.

namespace zdjscc {

enum class Scheme { nq, sqlc, uncoded };

inline const char* scheme_name(Scheme s) noexcept {
    switch (s) {
        case Scheme::nq: return "nq";
        case Scheme::sqlc: return "sqlc";
        default: return "uncoded";
    }
}

enum class PowerMode { average, equal_time_sharing };

struct SimulationConfig {
    Scheme scheme = Scheme::uncoded;
    std::variant<std::monostate, NqParams, SqlcParams> params{};
    SourceModel model{1.0, 0.0};
    ChannelModel channel{1.0, 1.0};
    std::int64_t n_samples = 1'000'000;
    std::uint64_t master_seed = 1;
    PowerMode power_mode = PowerMode::average;
    int n_threads = 0;  // 0 = hardware concurrency
};

/// One evaluated operating point.
struct SweepRecord {
    double snr_db = 0.0;
    double rho_x = 0.0;
    std::string scheme;
    double sdr_db = 0.0;
    double sdr_se_db = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double p1 = 0.0;  // measured per-encoder powers
    double p2 = 0.0;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
};

namespace detail {

struct ChunkSums {
    long double e1 = 0, e2 = 0, y1 = 0, y2 = 0, dsq = 0;
};

constexpr std::int64_t kChunk = 1 << 16;

/// Runs `body(chunk_index, first_sample, count, sums)` over all chunks on
/// the requested number of threads and reduces the sums in chunk order.
template <class Body>
ChunkSums run_chunked(std::int64_t n_samples, int n_threads, const Body& body) {
    const std::int64_t n_chunks = (n_samples + kChunk - 1) / kChunk;
    std::vector<ChunkSums> sums(static_cast<std::size_t>(n_chunks));
    int workers = n_threads > 0 ? n_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(n_chunks)));
    std::atomic<std::int64_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            const std::int64_t first = c * kChunk;
            const std::int64_t count = std::min<std::int64_t>(kChunk, n_samples - first);
            body(c, first, count, sums[static_cast<std::size_t>(c)]);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    ChunkSums total;
    for (const ChunkSums& s : sums) {
        total.e1 += s.e1;
        total.e2 += s.e2;
        total.y1 += s.y1;
        total.y2 += s.y2;
        total.dsq += s.dsq;
    }
    return total;
}

/// Per-slot transcoder interface: encodes both sources, adds the caller's
/// noise, and decodes. `swap_roles` exchanges which source drives which
/// encoder (decoders compensate); `gain1`/`gain2` rescale the encoder
/// outputs (role-1 and role-2 respectively).
struct SlotResult {
    double y_terminal1 = 0, y_terminal2 = 0;  // transmitted values
    double xhat1 = 0, xhat2 = 0;
};

class Transcoder {
  public:
    virtual ~Transcoder() = default;
    virtual SlotResult run(double x1, double x2, double noise, bool swap_roles) const = 0;
};

class NqTranscoder final : public Transcoder {
  public:
    NqTranscoder(const NqParams& p, const SourceModel& model, double gain1, double gain2)
        : p_(p), model_(model),
          tables_(GridCache::instance().get(p.delta, model), p.c),
          g1_(gain1), g2_(gain2) {}

    SlotResult run(double xa, double xb, double noise, bool swap) const override {
        // xa feeds terminal 1, xb terminal 2; roles swap on odd slots
        const double ac = p_.a * p_.c;
        const double xr1 = swap ? xb : xa;  // source in role 1
        const double xr2 = swap ? xa : xb;
        const long i1 = quantize_index(xr1, p_.delta);
        const long it2 = nest_index(quantize_index(xr2, p_.delta), p_.c);
        const double yr1 = g1_ * ac * static_cast<double>(i1);
        const double yr2 = g2_ * p_.a * static_cast<double>(it2);
        const double z = yr1 + yr2 + noise;

        const int n = tables_.n();
        const long hc = (p_.c - 1) / 2;
        const long j1 = std::clamp(lround_half_away(z / (g1_ * ac)), static_cast<long>(-n),
                                   static_cast<long>(n));
        const double r = z - g1_ * ac * static_cast<double>(j1);
        const long j2f = std::clamp(lround_half_away(r / (g2_ * p_.a)), -hc, hc);
        const long k = lround_half_away(
            (model_.rho_x() * static_cast<double>(j1) - static_cast<double>(j2f)) / p_.c);
        const long j2 = j2f + k * p_.c;
        const double hr1 = tables_.grid().xbar1_clamped(j1, j2);
        const double hr2 = tables_.grid().xbar2_clamped(j1, j2);

        SlotResult out;
        out.y_terminal1 = swap ? yr2 : yr1;
        out.y_terminal2 = swap ? yr1 : yr2;
        out.xhat1 = swap ? hr2 : hr1;
        out.xhat2 = swap ? hr1 : hr2;
        return out;
    }

  private:
    NqParams p_;
    SourceModel model_;
    NqTables tables_;
    double g1_, g2_;
};

class SqlcTranscoder final : public Transcoder {
  public:
    SqlcTranscoder(const SqlcParams& p, const SourceModel& model, const ChannelModel& channel,
                   double gain1, double gain2)
        : p_(p), model_(model), g1_(gain1), g2_(gain2) {
        alpha_eff_ = g2_ * p_.alpha;
        mu_factor_ = g1_ + alpha_eff_ * model.rho_x() / p_.xi;
        beta_eff_ = (g1_ == 1.0 && g2_ == 1.0)
                        ? p_.beta
                        : alpha_eff_ * model.variance() /
                              (alpha_eff_ * alpha_eff_ * model.variance() +
                               channel.noise_variance());
        imax_ = std::max<long>(0, static_cast<long>(std::floor(
                                      8.0 * model.sigma_x() * p_.xi / p_.delta - 0.5)));
    }

    SlotResult run(double xa, double xb, double noise, bool swap) const override {
        const double xr1 = swap ? xb : xa;
        const double xr2 = swap ? xa : xb;
        const double q0 = p_.delta * (round_half_away(p_.xi * xr1 / p_.delta - 0.5) + 0.5);
        const double yr1 = g1_ * q0;
        const double yr2 = alpha_eff_ * std::clamp(xr2, -p_.kappa, p_.kappa);
        const double z = yr1 + yr2 + noise;

        const double t = z / (mu_factor_ * p_.delta) - 0.5;
        long i = static_cast<long>(std::ceil(t - 0.5));
        i = std::clamp(i, -imax_ - 1, imax_);
        const double q = p_.delta * (static_cast<double>(i) + 0.5);
        const double hr1 = q / p_.xi;
        const double hr2 = model_.rho_x() * hr1 + beta_eff_ * (z - q * mu_factor_);

        SlotResult out;
        out.y_terminal1 = swap ? yr2 : yr1;
        out.y_terminal2 = swap ? yr1 : yr2;
        out.xhat1 = swap ? hr2 : hr1;
        out.xhat2 = swap ? hr1 : hr2;
        return out;
    }

  private:
    SqlcParams p_;
    SourceModel model_;
    double g1_, g2_;
    double alpha_eff_, mu_factor_, beta_eff_;
    long imax_;
};

class UncodedTranscoder final : public Transcoder {
  public:
    UncodedTranscoder(const SourceModel& model, const ChannelModel& channel) {
        gain_ = std::sqrt(channel.power_budget()) / model.sigma_x();
        const double rho = model.rho_x();
        const double cov = gain_ * model.variance() * (1.0 + rho);
        const double var =
            gain_ * gain_ * 2.0 * model.variance() * (1.0 + rho) + channel.noise_variance();
        mmse_ = cov / var;
    }

    SlotResult run(double xa, double xb, double noise, bool) const override {
        SlotResult out;
        out.y_terminal1 = gain_ * xa;
        out.y_terminal2 = gain_ * xb;
        const double z = out.y_terminal1 + out.y_terminal2 + noise;
        out.xhat1 = mmse_ * z;
        out.xhat2 = mmse_ * z;
        return out;
    }

  private:
    double gain_, mmse_;
};

inline std::unique_ptr<Transcoder> make_transcoder(const SimulationConfig& cfg, double gain1,
                                                   double gain2) {
    switch (cfg.scheme) {
        case Scheme::nq:
            return std::make_unique<NqTranscoder>(std::get<NqParams>(cfg.params), cfg.model,
                                                  gain1, gain2);
        case Scheme::sqlc:
            return std::make_unique<SqlcTranscoder>(std::get<SqlcParams>(cfg.params), cfg.model,
                                                    cfg.channel, gain1, gain2);
        default:
            return std::make_unique<UncodedTranscoder>(cfg.model, cfg.channel);
    }
}

/// Analytic per-role powers used to normalize the time-sharing mode.
inline std::pair<double, double> analytic_role_powers(const SimulationConfig& cfg) {
    switch (cfg.scheme) {
        case Scheme::nq: return nq_power(std::get<NqParams>(cfg.params), cfg.model);
        case Scheme::sqlc: return sqlc_power(std::get<SqlcParams>(cfg.params), cfg.model);
        default: {
            const double p = cfg.channel.power_budget();
            return {p, p};
        }
    }
}

}  // namespace detail

/// Runs the configured scheme over n_samples channel uses and accumulates
/// distortions, measured powers and the SDR standard error.
inline SweepRecord simulate(const SimulationConfig& cfg) {
    if (cfg.n_samples < 10'000)
        throw std::invalid_argument("simulate: n_samples must be at least 10^4");

    double gain1 = 1.0, gain2 = 1.0;
    const bool ts = cfg.power_mode == PowerMode::equal_time_sharing;
    if (ts) {
        // strict per-encoder budget: each role is normalized to power P
        const auto [p1, p2] = detail::analytic_role_powers(cfg);
        const double p = cfg.channel.power_budget();
        gain1 = p1 > 1e-300 ? std::sqrt(p / p1) : 1.0;
        gain2 = p2 > 1e-300 ? std::sqrt(p / p2) : 1.0;
    }
    const auto codec = detail::make_transcoder(cfg, gain1, gain2);

    const double sv = std::sqrt(cfg.model.sigma_v2());
    const double sw = std::sqrt(cfg.model.sigma_w2());
    const double sn = cfg.channel.sigma_n();

    const detail::ChunkSums total = detail::run_chunked(
        cfg.n_samples, cfg.n_threads,
        [&](std::int64_t chunk, std::int64_t first, std::int64_t count, detail::ChunkSums& s) {
            RandomStream stream(cfg.master_seed, 0, static_cast<std::uint64_t>(chunk));
            for (std::int64_t i = 0; i < count; ++i) {
                const double v = sv * stream.next_gaussian();
                const double x1 = v + sw * stream.next_gaussian();
                const double x2 = v + sw * stream.next_gaussian();
                const double noise = sn * stream.next_gaussian();
                const bool swap = ts && (((first + i) & 1) != 0);
                const detail::SlotResult r = codec->run(x1, x2, noise, swap);
                const double e1 = x1 - r.xhat1;
                const double e2 = x2 - r.xhat2;
                const double d = 0.5 * (e1 * e1 + e2 * e2);
                s.e1 += e1 * e1;
                s.e2 += e2 * e2;
                s.dsq += d * d;
                s.y1 += r.y_terminal1 * r.y_terminal1;
                s.y2 += r.y_terminal2 * r.y_terminal2;
            }
        });

    const double n = static_cast<double>(cfg.n_samples);
    SweepRecord rec;
    rec.snr_db = cfg.channel.snr_db();
    rec.rho_x = cfg.model.rho_x();
    rec.scheme = std::string(scheme_name(cfg.scheme)) + (ts ? "_ts" : "");
    rec.d1 = static_cast<double>(total.e1 / n);
    rec.d2 = static_cast<double>(total.e2 / n);
    rec.p1 = static_cast<double>(total.y1 / n);
    rec.p2 = static_cast<double>(total.y2 / n);
    rec.n_samples = cfg.n_samples;
    rec.seed = cfg.master_seed;
    const double d = 0.5 * (rec.d1 + rec.d2);
    rec.sdr_db = sdr_db(cfg.model.variance(), d);
    const double var_d =
        std::max(0.0, static_cast<double>(total.dsq / n) - d * d) / std::max(1.0, n - 1.0);
    rec.sdr_se_db = 10.0 / std::log(10.0) * std::sqrt(var_d) / d;
    return rec;
}

/// Optimizes once at the design SNR, then evaluates the frozen parameters
/// across the grid of actual SNRs.
inline std::vector<SweepRecord> robustness_sweep(double design_snr_db,
                                                 const std::vector<double>& eval_snr_db,
                                                 Scheme scheme, const SourceModel& model,
                                                 std::int64_t n_samples = 1'000'000,
                                                 std::uint64_t master_seed = 1,
                                                 int n_threads = 0) {
    const ChannelModel design = ChannelModel::from_snr_db(design_snr_db);
    SimulationConfig cfg;
    cfg.scheme = scheme;
    cfg.model = model;
    cfg.n_samples = n_samples;
    cfg.master_seed = master_seed;
    cfg.n_threads = n_threads;
    if (scheme == Scheme::nq)
        cfg.params = optimize_nq(model, design).params;
    else if (scheme == Scheme::sqlc)
        cfg.params = optimize_sqlc(model, design).params;
    std::vector<SweepRecord> out;
    out.reserve(eval_snr_db.size());
    for (double snr : eval_snr_db) {
        cfg.channel = ChannelModel::from_snr_db(snr);
        out.push_back(simulate(cfg));
    }
    return out;
}

/// Equal-power simulation via role alternation with per-role normalization.
inline SweepRecord time_share_simulate(const SimulationConfig& cfg) {
    if (cfg.power_mode != PowerMode::equal_time_sharing)
        throw std::invalid_argument("time_share_simulate: power_mode must be equal-time-sharing");
    return simulate(cfg);
}

/// Monte Carlo estimates (mean and standard error) of the three cross terms
/// of the distortion decomposition, per source, plus the component sums.
struct OrthogonalityReport {
    struct Estimate {
        double mean = 0.0;
        double se = 0.0;
    };
    // cross terms: (x - xbar)(xbar - xtilde), (x - xbar)(xtilde - xhat),
    // (xbar - xtilde)(xtilde - xhat)
    std::array<Estimate, 3> cross_1{};
    std::array<Estimate, 3> cross_2{};
    std::array<double, 3> components_1{};  // mean squares of the three legs
    std::array<double, 3> components_2{};
    double total_mse_1 = 0.0;
    double total_mse_2 = 0.0;
    std::int64_t n_samples = 0;
};

inline OrthogonalityReport orthogonality_check(const NqParams& p, const SourceModel& model,
                                               const ChannelModel& channel,
                                               std::int64_t n_samples,
                                               std::uint64_t master_seed = 1) {
    const NqTables tables(detail::GridCache::instance().get(p.delta, model), p.c);
    const QuantizerGrid& g = tables.grid();
    const double sv = std::sqrt(model.sigma_v2());
    const double sw = std::sqrt(model.sigma_w2());
    const double ac = p.a * p.c;

    std::array<long double, 3> s1{}, s2{};
    std::array<long double, 3> c1{}, c2{}, c1sq{}, c2sq{};
    long double m1 = 0, m2 = 0;

    const std::int64_t n_chunks = (n_samples + detail::kChunk - 1) / detail::kChunk;
    std::int64_t done = 0;
    for (std::int64_t chunk = 0; chunk < n_chunks; ++chunk) {
        RandomStream stream(master_seed, 0, static_cast<std::uint64_t>(chunk));
        const std::int64_t count = std::min<std::int64_t>(detail::kChunk, n_samples - done);
        done += count;
        for (std::int64_t i = 0; i < count; ++i) {
            const double v = sv * stream.next_gaussian();
            const double x1 = v + sw * stream.next_gaussian();
            const double x2 = v + sw * stream.next_gaussian();
            const long i1 = g.clamp_index(quantize_index(x1, p.delta));
            const long i2 = g.clamp_index(quantize_index(x2, p.delta));
            const long f = nest_index(i2, p.c);
            const double z = ac * static_cast<double>(quantize_index(x1, p.delta)) +
                             p.a * static_cast<double>(nest_index(quantize_index(x2, p.delta), p.c)) +
                             channel.sigma_n() * stream.next_gaussian();
            const NqDecodedCell dec = nq_decode_indices(z, p, model, g.n());
            const double a1 = x1 - g.xbar1(i1, i2);
            const double b1 = g.xbar1(i1, i2) - tables.xtilde1(i1, f);
            const double e1 = tables.xtilde1(i1, f) - g.xbar1_clamped(dec.j1, dec.j2);
            const double a2 = x2 - g.xbar2(i1, i2);
            const double b2 = g.xbar2(i1, i2) - tables.xtilde2(i1, f);
            const double e2 = tables.xtilde2(i1, f) - g.xbar2_clamped(dec.j1, dec.j2);
            const double cr1[3] = {a1 * b1, a1 * e1, b1 * e1};
            const double cr2[3] = {a2 * b2, a2 * e2, b2 * e2};
            for (int k = 0; k < 3; ++k) {
                c1[k] += cr1[k];
                c1sq[k] += cr1[k] * cr1[k];
                c2[k] += cr2[k];
                c2sq[k] += cr2[k] * cr2[k];
            }
            s1[0] += a1 * a1;
            s1[1] += b1 * b1;
            s1[2] += e1 * e1;
            s2[0] += a2 * a2;
            s2[1] += b2 * b2;
            s2[2] += e2 * e2;
            const double t1 = a1 + b1 + e1;
            const double t2 = a2 + b2 + e2;
            m1 += t1 * t1;
            m2 += t2 * t2;
        }
    }

    OrthogonalityReport rep;
    rep.n_samples = n_samples;
    const double n = static_cast<double>(n_samples);
    for (int k = 0; k < 3; ++k) {
        const double mean1 = static_cast<double>(c1[k] / n);
        const double mean2 = static_cast<double>(c2[k] / n);
        rep.cross_1[k] = {mean1, std::sqrt(std::max(0.0, static_cast<double>(c1sq[k] / n) -
                                                             mean1 * mean1) / n)};
        rep.cross_2[k] = {mean2, std::sqrt(std::max(0.0, static_cast<double>(c2sq[k] / n) -
                                                             mean2 * mean2) / n)};
        rep.components_1[k] = static_cast<double>(s1[k] / n);
        rep.components_2[k] = static_cast<double>(s2[k] / n);
    }
    rep.total_mse_1 = static_cast<double>(m1 / n);
    rep.total_mse_2 = static_cast<double>(m2 / n);
    return rep;
}

}  // namespace zdjscc
