#include "nlw/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlw {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// gradient of 1/2 |e|_H^2 with respect to the state entries
void h_gram(const State& e, double alpha, const SpectralBasis& basis,
            State& out) {
    int n = e.size();
    for (int j = 0; j < n; ++j) {
        double shift = e.velocity[j] + alpha * e.position[j];
        out.position[j] = basis.eigenvalue(j) * e.position[j] + alpha * shift;
        out.velocity[j] = shift;
    }
}

void rotate_transpose(State& s, const Stepper& st) {
    int n = s.size();
    for (int j = 0; j < n; ++j) {
        const auto& m = st.half_rotation(j);
        double a = s.position[j], v = s.velocity[j];
        s.position[j] = m[0] * a + m[2] * v;
        s.velocity[j] = m[1] * a + m[3] * v;
    }
}
} // namespace

double action_j(const ControlPath& phi, const NoiseSpec& noise) {
    if (!phi.finite()) throw std::invalid_argument("control has non-finite entries");
    double acc = 0.0;
    for (const auto& c : phi.coeffs) {
        double v = norm_htheta(c, noise);
        acc += v * v;
    }
    return 0.5 * phi.dt * acc;
}

ShootingObjective::Eval ShootingObjective::evaluate(const ControlPath& phi) const {
    Eval ev;
    double alpha = cfg->effective_alpha();
    int n_steps = phi.n_steps();
    Stepper st(*cfg, dt);
    State s = u1;
    double barrier_acc = 0.0;
    try {
        for (int k = 0; k < n_steps; ++k) {
            st.step(s, phi.coeffs[k]);
            if (!forbidden.empty()) {
                for (const auto& c : forbidden) {
                    double d = dist_h(s, c, alpha, cfg->basis);
                    double pen = std::max(0.0, rho_avoid - d);
                    barrier_acc += pen * pen;
                }
            }
        }
    } catch (const DivergenceError&) {
        ev.diverged = true;
        ev.objective = kInf;
        return ev;
    }
    ev.action = action_j(phi, cfg->noise);
    ev.barrier = barrier_weight * dt * barrier_acc;
    ev.endpoint_gap = dist_h(s, target, alpha, cfg->basis);
    double excess = std::max(0.0, ev.endpoint_gap - eta);
    ev.objective = ev.action + ev.barrier + excess * excess / (2.0 * sigma);
    return ev;
}

ShootingObjective::Eval ShootingObjective::gradient(const ControlPath& phi,
                                                    ControlPath& grad) const {
    double alpha = cfg->effective_alpha();
    int n_steps = phi.n_steps();
    int n = cfg->basis.n_modes();
    int n_c = phi.n_modes();
    Stepper st(*cfg, dt);

    grad = ControlPath(phi.dt, n_steps, n_c);

    std::vector<State> states;
    states.reserve(n_steps + 1);
    std::vector<std::vector<double>> mid_grids(n_steps); // f'(u) support points
    states.push_back(u1);
    Eval ev;
    double barrier_acc = 0.0;
    {
        State s = u1;
        std::vector<double> fm(n);
        try {
            for (int k = 0; k < n_steps; ++k) {
                // replicate the Strang step, keeping the midpoint grid values
                int nm = s.size();
                for (int j = 0; j < nm; ++j) {
                    const auto& m = st.half_rotation(j);
                    double a = s.position[j], v = s.velocity[j];
                    s.position[j] = m[0] * a + m[1] * v;
                    s.velocity[j] = m[2] * a + m[3] * v;
                }
                mid_grids[k] = cfg->basis.to_physical(s.position);
                st.f_modal(s.position, fm);
                for (int j = 0; j < nm; ++j) {
                    double force = cfg->h_modes[j] - fm[j];
                    if (j < n_c) force += phi.coeffs[k][j];
                    s.velocity[j] += dt * force;
                }
                for (int j = 0; j < nm; ++j) {
                    const auto& m = st.half_rotation(j);
                    double a = s.position[j], v = s.velocity[j];
                    s.position[j] = m[0] * a + m[1] * v;
                    s.velocity[j] = m[2] * a + m[3] * v;
                }
                if (!s.finite() ||
                    norm_h_sq(s, alpha, cfg->basis) > 1e12)
                    throw DivergenceError((k + 1) * dt);
                states.push_back(s);
                for (const auto& c : forbidden) {
                    double d = dist_h(s, c, alpha, cfg->basis);
                    double pen = std::max(0.0, rho_avoid - d);
                    barrier_acc += pen * pen;
                }
            }
        } catch (const DivergenceError&) {
            ev.diverged = true;
            ev.objective = kInf;
            return ev;
        }
    }

    ev.action = action_j(phi, cfg->noise);
    ev.barrier = barrier_weight * dt * barrier_acc;
    ev.endpoint_gap = dist_h(states.back(), target, alpha, cfg->basis);
    double excess = std::max(0.0, ev.endpoint_gap - eta);
    ev.objective = ev.action + ev.barrier + excess * excess / (2.0 * sigma);

    auto barrier_grad = [&](const State& s, State& p) {
        for (const auto& c : forbidden) {
            State e = s - c;
            double d = norm_h(e, alpha, cfg->basis);
            double pen = rho_avoid - d;
            if (pen <= 0.0 || d == 0.0) continue;
            State g(n);
            h_gram(e, alpha, cfg->basis, g);
            double w = barrier_weight * dt * 2.0 * pen * (-1.0) / d;
            for (int j = 0; j < n; ++j) {
                p.position[j] += w * g.position[j];
                p.velocity[j] += w * g.velocity[j];
            }
        }
    };

    // terminal adjoint from the penalty
    State p(n);
    if (excess > 0.0) {
        State e = states.back() - target;
        State g(n);
        h_gram(e, alpha, cfg->basis, g);
        double w = excess / (sigma * ev.endpoint_gap);
        for (int j = 0; j < n; ++j) {
            p.position[j] = w * g.position[j];
            p.velocity[j] = w * g.velocity[j];
        }
    }
    barrier_grad(states.back(), p);

    std::vector<double> da(n);
    for (int k = n_steps - 1; k >= 0; --k) {
        rotate_transpose(p, st);
        for (int j = 0; j < n_c; ++j)
            grad.coeffs[k][j] = dt * p.velocity[j];
        // kick transpose: position adjoint -= dt * D(u_mid) velocity adjoint
        st.jacobian_apply(mid_grids[k], p.velocity, da);
        for (int j = 0; j < n; ++j) p.position[j] -= dt * da[j];
        rotate_transpose(p, st);
        if (k >= 1) barrier_grad(states[k], p);
    }

    // contribution of J itself
    for (int k = 0; k < n_steps; ++k)
        for (int j = 0; j < n_c; ++j)
            grad.coeffs[k][j] +=
                phi.dt * phi.coeffs[k][j] / (cfg->noise.b[j] * cfg->noise.b[j]);
    return ev;
}

namespace {

double flat_norm_sq(const ControlPath& g) {
    double acc = 0.0;
    for (const auto& c : g.coeffs)
        for (double x : c) acc += x * x;
    return acc;
}

void flat_axpy(ControlPath& y, double a, const ControlPath& x) {
    for (std::size_t k = 0; k < y.coeffs.size(); ++k)
        for (std::size_t j = 0; j < y.coeffs[k].size(); ++j)
            y.coeffs[k][j] += a * x.coeffs[k][j];
}

double flat_dot(const ControlPath& a, const ControlPath& b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.coeffs.size(); ++k)
        for (std::size_t j = 0; j < a.coeffs[k].size(); ++j)
            acc += a.coeffs[k][j] * b.coeffs[k][j];
    return acc;
}

// L-BFGS (two-loop recursion) with Armijo backtracking
ShootingObjective::Eval minimize(const ShootingObjective& obj, ControlPath& phi,
                                 int max_iter, double grad_tol, int& iter_count) {
    ControlPath grad;
    auto ev = obj.gradient(phi, grad);
    if (ev.diverged) {
        // try to recover from a divergent start by shrinking the control
        for (auto& c : phi.coeffs)
            for (auto& x : c) x *= 0.1;
        ev = obj.gradient(phi, grad);
        if (ev.diverged) return ev;
    }
    constexpr int kMem = 10;
    std::vector<ControlPath> s_hist, y_hist;
    std::vector<double> rho_hist;
    double gamma_h = 1.0;
    for (int it = 0; it < max_iter; ++it) {
        ++iter_count;
        double g2 = flat_norm_sq(grad);
        if (g2 < grad_tol) break;

        // two-loop recursion for the search direction
        ControlPath q = grad;
        int m = static_cast<int>(s_hist.size());
        std::vector<double> a_coef(m);
        for (int k = m - 1; k >= 0; --k) {
            a_coef[k] = rho_hist[k] * flat_dot(s_hist[k], q);
            flat_axpy(q, -a_coef[k], y_hist[k]);
        }
        for (auto& row : q.coeffs)
            for (auto& x : row) x *= gamma_h;
        for (int k = 0; k < m; ++k) {
            double b = rho_hist[k] * flat_dot(y_hist[k], q);
            flat_axpy(q, a_coef[k] - b, s_hist[k]);
        }
        double descent = flat_dot(grad, q);
        if (!(descent > 0.0)) { // not a descent direction: reset to steepest
            q = grad;
            descent = g2;
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            gamma_h = 1.0;
        }

        bool accepted = false;
        double step = 1.0;
        for (int back = 0; back < 40; ++back) {
            ControlPath trial = phi;
            flat_axpy(trial, -step, q);
            auto trial_ev = obj.evaluate(trial);
            if (trial_ev.objective <= ev.objective - 1e-4 * step * descent) {
                ControlPath new_grad;
                auto new_ev = obj.gradient(trial, new_grad);
                // curvature pair from the accepted move
                ControlPath s = trial;
                flat_axpy(s, -1.0, phi);
                ControlPath y = new_grad;
                flat_axpy(y, -1.0, grad);
                double sy = flat_dot(s, y);
                if (sy > 1e-12) {
                    s_hist.push_back(std::move(s));
                    y_hist.push_back(std::move(y));
                    rho_hist.push_back(1.0 / sy);
                    gamma_h = sy / flat_dot(y_hist.back(), y_hist.back());
                    if (static_cast<int>(s_hist.size()) > kMem) {
                        s_hist.erase(s_hist.begin());
                        y_hist.erase(y_hist.begin());
                        rho_hist.erase(rho_hist.begin());
                    }
                }
                double prev = ev.objective;
                phi = std::move(trial);
                grad = std::move(new_grad);
                ev = new_ev;
                accepted = true;
                if (prev - ev.objective < 1e-12 * (1.0 + std::abs(prev)))
                    it = max_iter; // converged
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    return ev;
}

ControlPath interpolation_seed(const ModelConfig& cfg, const State& u1,
                               const State& u2, double t_end, double dt,
                               int n_steps, int n_c) {
    // control that would push the system along a smoothstep path between
    // the two endpoints; a rough but finite-action initial guess
    Stepper st(cfg, dt);
    int n = cfg.basis.n_modes();
    ControlPath phi(dt, n_steps, n_c);
    std::vector<double> fm(n);
    for (int k = 0; k < n_steps; ++k) {
        double t = (k + 0.5) * dt;
        double x = t / t_end;
        double s = x * x * (3.0 - 2.0 * x);
        double sd = 6.0 * x * (1.0 - x) / t_end;
        double sdd = (6.0 - 12.0 * x) / (t_end * t_end);
        std::vector<double> z(n);
        for (int j = 0; j < n; ++j)
            z[j] = u1.position[j] + s * (u2.position[j] - u1.position[j]);
        st.f_modal(z, fm);
        for (int j = 0; j < n_c; ++j) {
            double dz = u2.position[j] - u1.position[j];
            phi.coeffs[k][j] = sdd * dz + cfg.gamma * sd * dz +
                               cfg.basis.eigenvalue(j) * z[j] + fm[j] -
                               cfg.h_modes[j];
        }
    }
    return phi;
}

// control following a two-segment smoothstep path u1 -> w -> u2; used to
// seed detours around forbidden neighborhoods
ControlPath detour_seed(const ModelConfig& cfg, const State& u1,
                        const State& w, const State& u2, double t_end,
                        double dt, int n_steps, int n_c) {
    int first = n_steps / 2;
    auto a = interpolation_seed(cfg, u1, w, first * dt, dt, first, n_c);
    auto b = interpolation_seed(cfg, w, u2, (n_steps - first) * dt, dt,
                                n_steps - first, n_c);
    ControlPath phi(dt, n_steps, n_c);
    for (int k = 0; k < first; ++k) phi.coeffs[k] = a.coeffs[k];
    for (int k = first; k < n_steps; ++k) phi.coeffs[k] = b.coeffs[k - first];
    return phi;
}

MamResult run_mam(const ModelConfig& cfg, const State& u1, const State& u2,
                  const std::vector<State>& forbidden, double rho_avoid,
                  const MamOptions& opts) {
    double alpha = cfg.effective_alpha();
    std::vector<double> t_schedule = opts.t_schedule;
    if (t_schedule.empty())
        t_schedule = {2.0 / alpha, 5.0 / alpha, 10.0 / alpha, 20.0 / alpha};
    std::vector<double> sigma_schedule = opts.sigma_schedule;
    if (sigma_schedule.empty()) sigma_schedule = {1.0, 0.1, 0.01, 0.001};
    int n_c = opts.n_control_modes > 0
                  ? std::min(opts.n_control_modes, cfg.basis.n_modes())
                  : cfg.basis.n_modes();

    std::vector<double> eta_schedule;
    for (double eta = opts.eta_start; eta >= opts.eta_min * (1.0 - 1e-12);
         eta *= opts.eta_factor)
        eta_schedule.push_back(eta);
    if (eta_schedule.empty() || eta_schedule.back() > opts.eta_min)
        eta_schedule.push_back(opts.eta_min);

    struct Candidate {
        double action;
        double gap;
        double barrier;
        ControlPath path;
        double t_end;
    };
    std::vector<Candidate> candidates;
    MamResult res;

    for (double t_end : t_schedule) {
        int n_steps = std::min(
            opts.max_steps_per_horizon,
            std::max(10, static_cast<int>(std::llround(t_end / opts.dt))));
        double dt = t_end / n_steps;

        ShootingObjective obj;
        obj.cfg = &cfg;
        obj.u1 = u1;
        obj.target = u2;
        obj.t_end = t_end;
        obj.dt = dt;
        obj.forbidden = forbidden;
        obj.rho_avoid = rho_avoid;
        obj.barrier_weight = opts.barrier_weight;

        std::vector<ControlPath> inits;
        inits.emplace_back(dt, n_steps, n_c);
        if (dist_h(u1, u2, alpha, cfg.basis) > 1e-9) {
            inits.push_back(
                interpolation_seed(cfg, u1, u2, t_end, dt, n_steps, n_c));
            // impulse seed: a tiny first-step kick toward the target, then
            // free flight; finds the near-free path off unstable equilibria
            double dn = 0.0;
            for (int j = 0; j < n_c; ++j) {
                double d = u2.position[j] - u1.position[j];
                dn += d * d;
            }
            if (dn > 0.0) {
                ControlPath kick(dt, n_steps, n_c);
                double scale = 1e-3 / (std::sqrt(dn) * dt);
                for (int j = 0; j < n_c; ++j)
                    kick.coeffs[0][j] =
                        scale * (u2.position[j] - u1.position[j]);
                inits.push_back(std::move(kick));
            }
        }
        // sideways detours around each forbidden ball: waypoints displaced
        // so the seed path clears the neighborhood in the H-metric
        int n_modes = cfg.basis.n_modes();
        for (const auto& c : forbidden)
            for (int dir : {1, -1}) {
                State w = c;
                int j_off = n_modes > 1 ? 1 : 0;
                double lam = cfg.basis.eigenvalue(j_off);
                w.position[j_off] +=
                    dir * 2.0 * rho_avoid / std::sqrt(lam);
                inits.push_back(
                    detour_seed(cfg, u1, w, u2, t_end, dt, n_steps, n_c));
            }
        for (const auto& w : opts.warm_starts)
            if (w.n_steps() == n_steps && w.n_modes() == n_c) inits.push_back(w);

        for (auto& phi : inits) {
            for (double sigma : sigma_schedule) {
                obj.sigma = sigma;
                for (double eta : eta_schedule) {
                    obj.eta = eta;
                    auto ev = minimize(obj, phi, opts.max_iter, opts.grad_tol,
                                       res.iterations);
                    if (ev.diverged) break;
                    bool clears_barrier =
                        forbidden.empty() ||
                        ev.barrier <= 1e-6 * std::max(1.0, ev.action);
                    if (clears_barrier)
                        candidates.push_back(
                            {ev.action, ev.endpoint_gap, ev.barrier, phi, t_end});
                }
            }
        }
    }

    // best feasible value at each eta; feasibility sets are nested in eta
    for (double eta : eta_schedule) {
        double best = kInf;
        for (const auto& c : candidates)
            if (c.gap <= eta) best = std::min(best, c.action);
        res.value_vs_eta.emplace_back(eta, best);
    }

    const Candidate* best = nullptr;
    double best_eta = kInf;
    for (const auto& c : candidates) {
        // smallest achievable eta first, then smallest action
        double c_eta = kInf;
        for (double eta : eta_schedule)
            if (c.gap <= eta) c_eta = std::min(c_eta, eta);
        if (c_eta == kInf) continue;
        if (!best || c_eta < best_eta ||
            (c_eta == best_eta && c.action < best->action)) {
            best = &c;
            best_eta = c_eta;
        }
    }
    if (best) {
        res.feasible = true;
        res.value = best->action;
        res.path = best->path;
        res.t_used = best->t_end;
        res.eta_used = best_eta;
        res.endpoint_gap = best->gap;
    } else {
        res.value = kInf;
        res.log.push_back("infeasible at every (T, eta) cell within budget");
    }
    return res;
}

} // namespace

MamResult quasipotential(const ModelConfig& cfg, const State& u1,
                         const State& u2, const MamOptions& opts) {
    return run_mam(cfg, u1, u2, {}, 0.0, opts);
}

MamResult quasipotential_avoiding(const ModelConfig& cfg, const State& u1,
                                  const State& u2,
                                  const std::vector<State>& forbidden,
                                  double rho_avoid, const MamOptions& opts) {
    // warm-start from the unconstrained optimum: the barrier then only has
    // to push the through-saddle path sideways around the forbidden balls
    MamOptions o = opts;
    auto direct = run_mam(cfg, u1, u2, {}, 0.0, o);
    if (direct.feasible) o.warm_starts.push_back(direct.path);
    return run_mam(cfg, u1, u2, forbidden, rho_avoid, o);
}

double quasipotential_from_attractor(const ModelConfig& cfg, const State& u_star,
                                     const EquilibriumSet& eq,
                                     const ConnectionGraph& graph,
                                     const MamOptions& opts) {
    std::vector<State> seeds;
    for (const auto& e : eq.items) seeds.push_back(e.state);
    for (const auto& edge : graph.edges) {
        if (edge.waypoints.empty()) continue;
        int stride = std::max<int>(
            1, static_cast<int>(edge.waypoints.size()) / opts.max_waypoint_seeds);
        for (std::size_t k = 0; k < edge.waypoints.size(); k += stride)
            seeds.push_back(edge.waypoints[k]);
    }
    double best = kInf;
    for (const auto& s : seeds) {
        auto r = quasipotential(cfg, s, u_star, opts);
        if (r.feasible) best = std::min(best, r.value);
    }
    return best;
}

} // namespace nlw
