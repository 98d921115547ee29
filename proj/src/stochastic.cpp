#include "nlw/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlw {

SdeSimulator::SdeSimulator(const ModelConfig& cfg, double eps, double dt,
                           std::uint64_t seed, std::uint64_t stream)
    : stepper_(cfg, dt), eps_(eps), rng_(seed, stream),
      state_(cfg.basis.n_modes()) {
    if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
    int n = cfg.basis.n_modes();
    chol_.resize(n);
    for (int j = 0; j < n; ++j) {
        double lambda = cfg.basis.eigenvalue(j);
        double q = eps * cfg.noise.b[j] * cfg.noise.b[j];
        // stationary covariance of the linear mode, diag(q/(2 gamma lambda),
        // q/(2 gamma)); one-step covariance S = S_inf - Phi S_inf Phi^T
        double s_a = q / (2.0 * cfg.gamma * lambda);
        double s_v = q / (2.0 * cfg.gamma);
        auto phi = damped_rotation(lambda, cfg.gamma, dt);
        double p00 = s_a - (phi[0] * phi[0] * s_a + phi[1] * phi[1] * s_v);
        double p01 = -(phi[0] * phi[2] * s_a + phi[1] * phi[3] * s_v);
        double p11 = s_v - (phi[2] * phi[2] * s_a + phi[3] * phi[3] * s_v);
        p00 = std::max(p00, 0.0);
        double l11 = std::sqrt(p00);
        double l21 = l11 > 0.0 ? p01 / l11 : 0.0;
        double l22 = std::sqrt(std::max(p11 - l21 * l21, 0.0));
        chol_[j] = {l11, l21, l22};
    }
}

void SdeSimulator::step(std::span<const double> phi) {
    stepper_.step(state_, phi);
    if (eps_ > 0.0) {
        int n = state_.size();
        for (int j = 0; j < n; ++j) {
            double z1 = rng_.normal();
            double z2 = rng_.normal();
            state_.position[j] += chol_[j][0] * z1;
            state_.velocity[j] += chol_[j][1] * z1 + chol_[j][2] * z2;
        }
    }
    t_ += stepper_.dt();
}

Trajectory simulate(const ModelConfig& cfg, const State& s0, double eps,
                    double t_end, double dt, std::uint64_t seed) {
    int n_steps = std::max(1, static_cast<int>(std::llround(t_end / dt)));
    SdeSimulator sim(cfg, eps, t_end / n_steps, seed);
    sim.set_state(s0);
    Trajectory traj;
    traj.dt = sim.dt();
    traj.states.reserve(n_steps + 1);
    traj.states.push_back(s0);
    for (int k = 0; k < n_steps; ++k) {
        sim.step();
        traj.states.push_back(sim.state());
    }
    return traj;
}

void NeighborhoodSystem::validate(double alpha, const SpectralBasis& basis) const {
    if (!(0.0 < rho1p && rho1p < rho0p && rho0p < rho1 && rho1 < rho0 &&
          rho0 < rho_star))
        throw std::invalid_argument("radius ordering 0 < rho1' < rho0' < rho1 "
                                    "< rho0 < rho_* violated");
    for (int i = 0; i < count(); ++i)
        for (int j = i + 1; j < count(); ++j) {
            double d = dist_h(centers[i], centers[j], alpha, basis);
            if (d <= outer_radius(i) + outer_radius(j))
                throw std::invalid_argument("neighborhood balls overlap");
        }
}

std::vector<OccupationEstimate> estimate_stationary(
    const ModelConfig& cfg, double eps, const std::vector<BallEvent>& events,
    double burn_in, double t_total, double dt, std::uint64_t seed,
    const State* start, double requested_ci) {
    if (t_total <= burn_in)
        throw std::invalid_argument("t_total must exceed burn_in");
    double alpha = cfg.effective_alpha();
    SdeSimulator sim(cfg, eps, dt, seed);
    if (start) sim.set_state(*start);

    auto burn_steps = static_cast<std::int64_t>(burn_in / dt);
    auto run_steps = static_cast<std::int64_t>((t_total - burn_in) / dt);
    for (std::int64_t k = 0; k < burn_steps; ++k) sim.step();

    constexpr int kBatches = 32;
    std::int64_t per_batch = std::max<std::int64_t>(1, run_steps / kBatches);
    std::vector<std::vector<double>> batch_fraction(
        events.size(), std::vector<double>(kBatches, 0.0));
    for (int b = 0; b < kBatches; ++b) {
        std::vector<std::int64_t> inside(events.size(), 0);
        for (std::int64_t k = 0; k < per_batch; ++k) {
            sim.step();
            for (std::size_t e = 0; e < events.size(); ++e) {
                if (std::isinf(events[e].radius) ||
                    dist_h(sim.state(), events[e].center, alpha, cfg.basis) <
                        events[e].radius)
                    ++inside[e];
            }
        }
        for (std::size_t e = 0; e < events.size(); ++e)
            batch_fraction[e][b] =
                static_cast<double>(inside[e]) / static_cast<double>(per_batch);
    }

    std::vector<OccupationEstimate> out(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
        double mean = 0.0;
        for (double v : batch_fraction[e]) mean += v;
        mean /= kBatches;
        double var = 0.0;
        for (double v : batch_fraction[e]) var += (v - mean) * (v - mean);
        var /= (kBatches - 1);
        out[e].fraction = mean;
        out[e].ci_halfwidth = 2.04 * std::sqrt(var / kBatches); // t(31), 95%
        out[e].insufficient =
            requested_ci > 0.0 && out[e].ci_halfwidth > requested_ci;
    }
    return out;
}

namespace {

// index of the ball whose (inner or outer) neighborhood contains s, or -1
int inside_ball(const State& s, const NeighborhoodSystem& ns, double alpha,
                const SpectralBasis& basis, bool outer) {
    for (int i = 0; i < ns.count(); ++i) {
        double r = outer ? ns.outer_radius(i) : ns.inner_radius(i);
        if (dist_h(s, ns.centers[i], alpha, basis) < r) return i;
    }
    return -1;
}

State lerp(const State& a, const State& b, double t) {
    State r(a.size());
    for (int j = 0; j < a.size(); ++j) {
        r.position[j] = a.position[j] + t * (b.position[j] - a.position[j]);
        r.velocity[j] = a.velocity[j] + t * (b.velocity[j] - a.velocity[j]);
    }
    return r;
}

// refine the first crossing of the sphere |s - center| = r on the segment
State refine_crossing(const State& before, const State& after,
                      const State& center, double r, double alpha,
                      const SpectralBasis& basis, double tol) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        State s = lerp(before, after, mid);
        double d = dist_h(s, center, alpha, basis);
        if (std::abs(d - r) < tol) return s;
        if (d > r)
            lo = mid;
        else
            hi = mid;
    }
    return lerp(before, after, 0.5 * (lo + hi));
}

State sample_on_sphere(const State& center, double radius, int n, double alpha,
                       const SpectralBasis& basis, Philox& rng) {
    State dir(n);
    for (int j = 0; j < n; ++j) {
        dir.position[j] = rng.normal();
        dir.velocity[j] = rng.normal();
    }
    double nrm = norm_h(dir, alpha, basis);
    return center + scaled(dir, radius / nrm);
}

} // namespace

ChainSample boundary_chain_run(const ModelConfig& cfg,
                               const NeighborhoodSystem& ns, double eps,
                               int n_steps, std::uint64_t seed, double dt,
                               std::int64_t max_sim_steps) {
    double alpha = cfg.effective_alpha();
    ns.validate(alpha, cfg.basis);
    SdeSimulator sim(cfg, eps, dt, seed);
    sim.set_state(ns.centers[0]);

    ChainSample out;
    double tol = 1e-3 * ns.rho1;
    std::int64_t budget = max_sim_steps;
    double sigma = 0.0;
    while (static_cast<int>(out.records.size()) < n_steps) {
        // exit from the union of the outer neighborhoods
        bool exited = false;
        while (budget-- > 0) {
            sim.step();
            if (inside_ball(sim.state(), ns, alpha, cfg.basis, true) < 0) {
                sigma = sim.time();
                exited = true;
                break;
            }
        }
        if (!exited) {
            out.partial = true;
            if (out.records.empty()) out.no_exit = true;
            return out;
        }
        // first hit of the boundary of g after the exit
        bool hit = false;
        State prev = sim.state();
        while (budget-- > 0) {
            sim.step();
            int b = inside_ball(sim.state(), ns, alpha, cfg.basis, false);
            if (b >= 0) {
                ChainRecord rec;
                rec.sigma_prev = sigma;
                rec.tau = sim.time();
                rec.ball = b;
                rec.point = refine_crossing(prev, sim.state(), ns.centers[b],
                                            ns.inner_radius(b), alpha,
                                            cfg.basis, tol);
                out.records.push_back(std::move(rec));
                hit = true;
                break;
            }
            prev = sim.state();
        }
        if (!hit) {
            out.partial = true;
            return out;
        }
    }
    return out;
}

std::vector<TransitionEstimate> estimate_transition(
    const ModelConfig& cfg, const NeighborhoodSystem& ns,
    const std::vector<double>& eps_list, int i, int j, int n_samples,
    std::uint64_t seed, double dt) {
    if (i == j) throw std::invalid_argument("need i != j");
    double alpha = cfg.effective_alpha();
    ns.validate(alpha, cfg.basis);
    int n = cfg.basis.n_modes();

    std::vector<TransitionEstimate> out;
    for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
        double eps = eps_list[ei];
        Philox start_rng(seed, 1000 + ei);
        int hits = 0;
        for (int s = 0; s < n_samples; ++s) {
            State v0 = sample_on_sphere(ns.centers[i], ns.inner_radius(i), n,
                                        alpha, cfg.basis, start_rng);
            SdeSimulator sim(cfg, eps, dt, seed,
                             (ei + 1) * 1'000'000 + static_cast<std::uint64_t>(s));
            sim.set_state(v0);
            // one chain step: exit g~, then hit the boundary of g
            std::int64_t budget = 40'000'000 / n_samples + 200'000;
            bool exited = false;
            while (budget-- > 0) {
                sim.step();
                if (inside_ball(sim.state(), ns, alpha, cfg.basis, true) < 0) {
                    exited = true;
                    break;
                }
            }
            if (!exited) continue;
            while (budget-- > 0) {
                sim.step();
                int b = inside_ball(sim.state(), ns, alpha, cfg.basis, false);
                if (b >= 0) {
                    if (b == j) ++hits;
                    break;
                }
            }
        }
        TransitionEstimate t;
        t.i = i;
        t.j = j;
        t.eps = eps;
        t.n_samples = n_samples;
        t.hits = hits;
        if (hits == 0) {
            // one-sided 95% Clopper-Pearson bound
            t.p_hat = 1.0 - std::pow(0.05, 1.0 / n_samples);
            t.upper_bound_only = true;
        } else {
            t.p_hat = static_cast<double>(hits) / n_samples;
        }
        t.minus_eps_log_p = -eps * std::log(t.p_hat);
        out.push_back(t);
    }
    return out;
}

MomentSeries exponential_moment_check(const ModelConfig& cfg, const State& s0,
                                      double eps, double kappa, double t_end,
                                      int n_seeds, double dt,
                                      std::uint64_t seed) {
    double alpha = cfg.effective_alpha();
    double cap = eps > 0.0
                     ? alpha / (2.0 * eps * cfg.noise.b_total_sq())
                     : std::numeric_limits<double>::infinity();
    MomentSeries out;
    out.kappa_used = std::min(kappa, cap);

    const int n_samples_t = 200;
    auto total_steps = static_cast<std::int64_t>(t_end / dt);
    std::int64_t stride = std::max<std::int64_t>(1, total_steps / n_samples_t);

    for (;;) {
        out.times.clear();
        out.values.clear();
        // log-sum-exp accumulation over the ensemble, one series per run
        std::vector<std::vector<double>> log_terms;
        bool overflow = false;
        for (int r = 0; r < n_seeds && !overflow; ++r) {
            SdeSimulator sim(cfg, eps, dt, seed, 7'000'000 + r);
            sim.set_state(s0);
            std::vector<double> series;
            for (std::int64_t k = 0; k < total_steps; ++k) {
                sim.step();
                if (k % stride == 0) {
                    double e = energy(sim.state(), cfg);
                    double le = out.kappa_used * e;
                    if (le > 600.0) { // exp would overflow downstream sums
                        overflow = true;
                        break;
                    }
                    series.push_back(le);
                    if (r == 0) out.times.push_back(sim.time());
                }
            }
            log_terms.push_back(std::move(series));
        }
        if (overflow) {
            out.kappa_used *= 0.5;
            out.kappa_reduced = true;
            continue;
        }
        std::size_t len = log_terms[0].size();
        for (auto& s : log_terms) len = std::min(len, s.size());
        out.times.resize(len);
        for (std::size_t k = 0; k < len; ++k) {
            double m = log_terms[0][k];
            for (const auto& s : log_terms) m = std::max(m, s[k]);
            double acc = 0.0;
            for (const auto& s : log_terms) acc += std::exp(s[k] - m);
            out.values.push_back(std::exp(m) * acc / n_seeds);
        }
        break;
    }

    // trend test on log values over the second half of the series
    std::size_t n0 = out.values.size() / 2;
    std::size_t m = out.values.size() - n0;
    if (m >= 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t k = n0; k < out.values.size(); ++k) {
            double x = out.times[k], y = std::log(out.values[k]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double denom = m * sxx - sx * sx;
        double slope = (m * sxy - sx * sy) / denom;
        double intercept = (sy - slope * sx) / m;
        double sse = 0.0;
        for (std::size_t k = n0; k < out.values.size(); ++k) {
            double r = std::log(out.values[k]) - slope * out.times[k] - intercept;
            sse += r * r;
        }
        double se = std::sqrt(sse / (m - 2) / (denom / m));
        out.trend_tstat = se > 0.0 ? slope / se : 0.0;
        // a statistically significant but numerically negligible slope (the
        // deterministic splitting drift at eps = 0) does not count as growth
        out.bounded = slope < 1e-3 || out.trend_tstat < 1.645;
    } else {
        out.bounded = true;
    }
    return out;
}

std::vector<ExitMomentRow> exit_time_moments(const ModelConfig& cfg,
                                             const NeighborhoodSystem& ns,
                                             double eps,
                                             const std::vector<double>& delta_list,
                                             int n_samples, std::uint64_t seed,
                                             double dt, int start_ball) {
    for (std::size_t k = 1; k < delta_list.size(); ++k)
        if (delta_list[k] <= delta_list[k - 1])
            throw std::invalid_argument("delta_list must be positive ascending");
    double alpha = cfg.effective_alpha();
    ns.validate(alpha, cfg.basis);
    int n = cfg.basis.n_modes();

    std::vector<double> tau1;
    Philox start_rng(seed, 42);
    for (int s = 0; s < n_samples; ++s) {
        State v0 = sample_on_sphere(ns.centers[start_ball],
                                    ns.inner_radius(start_ball), n, alpha,
                                    cfg.basis, start_rng);
        SdeSimulator sim(cfg, eps, dt, seed, 9'000'000 + s);
        sim.set_state(v0);
        std::int64_t budget = 20'000'000 / n_samples + 100'000;
        bool exited = false;
        while (budget-- > 0) {
            sim.step();
            if (inside_ball(sim.state(), ns, alpha, cfg.basis, true) < 0) {
                exited = true;
                break;
            }
        }
        if (!exited) continue;
        while (budget-- > 0) {
            sim.step();
            if (inside_ball(sim.state(), ns, alpha, cfg.basis, false) >= 0) {
                tau1.push_back(sim.time());
                break;
            }
        }
    }

    std::vector<ExitMomentRow> out;
    for (double delta : delta_list) {
        ExitMomentRow row;
        row.delta = delta;
        if (tau1.empty()) {
            row.stable = false;
            out.push_back(row);
            continue;
        }
        double sum = 0.0, max_term = 0.0;
        std::vector<double> terms;
        for (double t : tau1) {
            double v = std::exp(delta * t);
            terms.push_back(v);
            sum += v;
            max_term = std::max(max_term, v);
        }
        double mean = sum / terms.size();
        double var = 0.0;
        for (double v : terms) var += (v - mean) * (v - mean);
        var /= std::max<std::size_t>(1, terms.size() - 1);
        row.mgf = mean;
        row.ci_halfwidth = 1.96 * std::sqrt(var / terms.size());
        row.stable = max_term <= 0.5 * sum || delta == 0.0;
        out.push_back(row);
    }
    return out;
}

} // namespace nlw
