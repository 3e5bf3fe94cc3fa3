#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "zdjscc/bounds.hpp"
#include "zdjscc/core.hpp"
#include "zdjscc/nq.hpp"
#include "zdjscc/sqlc.hpp"

// Parameter optimization for both codecs under the sum power constraint.
// The analytical distortion models are the objectives; Monte Carlo is used
// for validation elsewhere, never inside the search.

namespace zdjscc {

template <class Params>
struct OptimizationResult {
    Params params{};
    double achieved_d = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    long objective_evals = 0;
    bool converged = false;
};

namespace detail {

/// FIFO-bounded cache of quantizer grids keyed by (delta, sigma_x, rho_x).
class GridCache {
  public:
    std::shared_ptr<const QuantizerGrid> get(double delta, const SourceModel& model) {
        const Key key{delta, model.sigma_x(), model.rho_x()};
        std::lock_guard<std::mutex> lock(mu_);
        if (auto it = map_.find(key); it != map_.end()) return it->second;
        auto grid = QuantizerGrid::build(delta, model);
        map_.emplace(key, grid);
        order_.push_back(key);
        if (order_.size() > 128) {
            map_.erase(order_.front());
            order_.pop_front();
        }
        return grid;
    }

    static GridCache& instance() {
        static GridCache cache;
        return cache;
    }

  private:
    using Key = std::array<double, 3>;
    std::mutex mu_;
    std::map<Key, std::shared_ptr<const QuantizerGrid>> map_;
    std::list<Key> order_;
};

/// Golden-section minimization of f over [lo, hi] (unimodal assumption).
template <class F>
double golden_minimize(const F& f, double lo, double hi, int iters) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 < f2 ? x1 : x2;
}

/// Deterministic Nelder-Mead simplex descent with a relative-spread stop.
inline std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
    double step, int max_iters, double rel_tol, long* evals) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 1; i <= n; ++i) pts[i][i - 1] += step;
    for (std::size_t i = 0; i <= n; ++i) {
        fv[i] = f(pts[i]);
        if (evals) ++*evals;
    }
    for (int it = 0; it < max_iters; ++it) {
        std::vector<std::size_t> ord(n + 1);
        for (std::size_t i = 0; i <= n; ++i) ord[i] = i;
        std::sort(ord.begin(), ord.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        const std::size_t best = ord[0], worst = ord[n], second = ord[n - 1];
        if (std::abs(fv[worst] - fv[best]) <=
            rel_tol * (std::abs(fv[best]) + 1e-300))
            break;
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst)
                for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / n;
        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; ++k)
                p[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
            return p;
        };
        auto refl = blend(-1.0);
        double fr = f(refl);
        if (evals) ++*evals;
        if (fr < fv[ord[0]]) {
            auto expd = blend(-2.0);
            double fe = f(expd);
            if (evals) ++*evals;
            if (fe < fr) {
                pts[worst] = expd;
                fv[worst] = fe;
            } else {
                pts[worst] = refl;
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            pts[worst] = refl;
            fv[worst] = fr;
        } else {
            auto cont = blend(fr < fv[worst] ? -0.5 : 0.5);
            double fc = f(cont);
            if (evals) ++*evals;
            if (fc < std::min(fr, fv[worst])) {
                pts[worst] = cont;
                fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t k = 0; k < n; ++k)
                        pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
                    fv[i] = f(pts[i]);
                    if (evals) ++*evals;
                }
            }
        }
    }
    std::size_t bi = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fv[i] < fv[bi]) bi = i;
    return {pts[bi], fv[bi]};
}

}  // namespace detail

struct NqOptimizerOptions {
    double delta_min = 0.1;   // in units of sigma_x
    double delta_max = 1.8;
    int delta_points = 26;
    int c_max = 31;
    int refine_iters = 12;
    /// Multiplies every grid delta; lets self-consistency tests perturb the
    /// initial grid without touching the search logic.
    double grid_scale = 1.0;
};

/// Exhaustive search over the odd nesting moduli with a power-matched
/// channel scaling and a 1-D refinement of the step for each modulus.
inline OptimizationResult<NqParams> optimize_nq(const SourceModel& model,
                                                const ChannelModel& channel,
                                                const NqOptimizerOptions& opt = {}) {
    OptimizationResult<NqParams> best;
    best.achieved_d = std::numeric_limits<double>::infinity();
    long evals = 0;

    const double sx = model.sigma_x();
    std::vector<double> deltas(opt.delta_points);
    const double lo = std::log(opt.delta_min * sx * opt.grid_scale);
    const double hi = std::log(opt.delta_max * sx * opt.grid_scale);
    for (int i = 0; i < opt.delta_points; ++i)
        deltas[i] = std::exp(lo + (hi - lo) * i / (opt.delta_points - 1));

    auto objective = [&](double delta, int c) {
        const double a = nq_power_matched_a(delta, c, model, channel.power_budget());
        const NqParams p(delta, c, a);
        const NqTables tables(detail::GridCache::instance().get(delta, model), c);
        ++evals;
        return std::pair<double, NqParams>{nq_distortion(p, model, channel, tables).d(), p};
    };

    for (int c = 1; c <= opt.c_max; c += 2) {
        double best_d = std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (int i = 0; i < opt.delta_points; ++i) {
            const double d = objective(deltas[i], c).first;
            if (d < best_d) {
                best_d = d;
                best_i = i;
            }
        }
        // refine between the neighbours of the best grid point
        const double dlo = deltas[std::max(0, best_i - 1)];
        const double dhi = deltas[std::min(opt.delta_points - 1, best_i + 1)];
        const double dref = detail::golden_minimize(
            [&](double ld) { return objective(std::exp(ld), c).first; }, std::log(dlo),
            std::log(dhi), opt.refine_iters);
        auto [d, p] = objective(std::exp(dref), c);
        if (best_d < d) std::tie(d, p) = objective(deltas[best_i], c);
        if (d < best.achieved_d) {
            best.achieved_d = d;
            best.params = p;
        }
    }
    std::tie(best.p1, best.p2) = nq_power(best.params, model);
    best.objective_evals = evals;
    best.converged = true;
    return best;
}

struct SqlcOptimizerOptions {
    int alpha_points = 64;   // log-spaced on [1e-3, 1]
    int kappa_points = 32;   // linear on [1, 6] sigma_x
    int step_points = 64;    // log-spaced scaled step on [0.01, 2]
    int simplex_iters = 400;
    double simplex_tol = 1e-6;
    double grid_scale = 1.0;
};

/// Closed-form inner minimizer of the residual-noise term over beta.
inline double sqlc_best_beta(double alpha, const SourceModel& model,
                             const ChannelModel& channel) noexcept {
    const double s2 = model.variance();
    return alpha * s2 / (alpha * alpha * s2 + channel.noise_variance());
}

/// Grid search over (alpha, kappa, scaled step) with beta inner-minimized,
/// then simplex refinement from the three best grid points.
inline OptimizationResult<SqlcParams> optimize_sqlc(const SourceModel& model,
                                                    const ChannelModel& channel,
                                                    const SqlcOptimizerOptions& opt = {}) {
    const double sx = model.sigma_x();
    long evals = 0;

    auto eval = [&](double alpha, double kappa, double u) -> std::optional<std::pair<double, SqlcParams>> {
        if (!(alpha > 0.0) || !(kappa > 0.0) || !(u > 0.0)) return std::nullopt;
        try {
            SqlcParams p = make_sqlc_params_scaled(alpha, sqlc_best_beta(alpha, model, channel),
                                                   u, kappa, model, channel);
            const GeometryContext geom(model, kappa);
            ++evals;
            return std::pair<double, SqlcParams>{sqlc_distortion(p, model, channel, geom).d(), p};
        } catch (const GeometryError&) {
            return std::nullopt;
        }
    };

    struct Candidate {
        double d;
        double alpha, kappa, u;
    };
    std::vector<Candidate> top;

    for (int ia = 0; ia < opt.alpha_points; ++ia) {
        const double alpha = opt.grid_scale *
                             std::pow(10.0, -3.0 + 3.0 * ia / (opt.alpha_points - 1));
        for (int ik = 0; ik < opt.kappa_points; ++ik) {
            const double kappa = sx * (1.0 + 5.0 * ik / (opt.kappa_points - 1));
            for (int iu = 0; iu < opt.step_points; ++iu) {
                const double u = std::pow(10.0, std::log10(0.01) +
                                                    (std::log10(2.0) - std::log10(0.01)) * iu /
                                                        (opt.step_points - 1));
                if (auto r = eval(alpha, kappa, u)) {
                    top.push_back({r->first, alpha, kappa, u});
                    std::push_heap(top.begin(), top.end(),
                                   [](const Candidate& a, const Candidate& b) { return a.d < b.d; });
                    if (top.size() > 3) {
                        std::pop_heap(top.begin(), top.end(),
                                      [](const Candidate& a, const Candidate& b) { return a.d < b.d; });
                        top.pop_back();
                    }
                }
            }
        }
    }

    OptimizationResult<SqlcParams> best;
    best.achieved_d = std::numeric_limits<double>::infinity();
    if (top.empty()) {
        best.converged = false;
        best.objective_evals = evals;
        return best;
    }

    auto penalized = [&](const std::vector<double>& x) {
        const auto r = eval(std::exp(x[0]), std::exp(x[1]), std::exp(x[2]));
        return r ? r->first : 1e9;
    };
    for (const Candidate& cand : top) {
        auto [x, d] = detail::nelder_mead(
            penalized, {std::log(cand.alpha), std::log(cand.kappa), std::log(cand.u)}, 0.15,
            opt.simplex_iters, opt.simplex_tol, &evals);
        const auto refined = eval(std::exp(x[0]), std::exp(x[1]), std::exp(x[2]));
        const auto fallback = eval(cand.alpha, cand.kappa, cand.u);
        const auto& pick = (refined && (!fallback || refined->first <= fallback->first))
                               ? refined
                               : fallback;
        if (pick && pick->first < best.achieved_d) {
            best.achieved_d = pick->first;
            best.params = pick->second;
        }
    }
    std::tie(best.p1, best.p2) = sqlc_power(best.params, model);
    best.objective_evals = evals;
    best.converged = std::isfinite(best.achieved_d);
    return best;
}

/// High-SNR approximation of the optimal linear gain (unit sigma_x).
inline double high_snr_alpha(double snr, double rho_x, double p, double b = 4.0) {
    if (!(rho_x >= 0.0 && rho_x < 1.0))
        throw std::invalid_argument("high_snr_alpha: requires rho_x in [0, 1)");
    const double theta = GeometryContext::theta_schedule(rho_x);
    const double t = theta * snr * (1.0 - rho_x);
    const double alpha2 = p * std::sqrt(6.0 * t) / (b * t);
    return std::sqrt(alpha2);
}

/// Constant high-SNR SDR loss from the bound, as a positive dB figure:
/// the achievable SDR scales the bound by sqrt(3)/(b sqrt(theta)).
inline double high_snr_gap_db(double rho_x, double b = 4.0) {
    const double theta = GeometryContext::theta_schedule(rho_x);
    return 10.0 * std::log10(b * std::sqrt(theta) / std::sqrt(3.0));
}

}  // namespace zdjscc
