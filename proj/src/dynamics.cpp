#include "nlw/dynamics.hpp"

#include "nlw/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace nlw {

std::array<double, 4> damped_rotation(double lambda, double gamma, double t) {
    // exp(At) = e^{-gamma t/2} [ c I + s (A + (gamma/2) I) ],
    // (A + gamma/2 I)^2 = disc * I with disc = gamma^2/4 - lambda
    double disc = gamma * gamma / 4.0 - lambda;
    double c, s;
    if (disc < -1e-12) {
        double w = std::sqrt(-disc);
        c = std::cos(w * t);
        s = std::sin(w * t) / w;
    } else if (disc > 1e-12) {
        double w = std::sqrt(disc);
        c = std::cosh(w * t);
        s = std::sinh(w * t) / w;
    } else {
        c = 1.0 + disc * t * t / 2.0;
        s = t * (1.0 + disc * t * t / 6.0);
    }
    double e = std::exp(-gamma * t / 2.0);
    double hg = gamma / 2.0;
    return {e * (c + s * hg), e * s, -e * s * lambda, e * (c - s * hg)};
}

Stepper::Stepper(const ModelConfig& cfg, double dt) : cfg_(&cfg), dt_(dt) {
    int n = cfg.basis.n_modes();
    rot_.resize(n);
    for (int j = 0; j < n; ++j)
        rot_[j] = damped_rotation(cfg.basis.eigenvalue(j), cfg.gamma, dt / 2.0);
    grid_.resize(cfg.basis.n_nodes());
    fgrid_.resize(cfg.basis.n_nodes());
    fmodal_.resize(n);
}

void Stepper::f_modal(std::span<const double> position,
                      std::span<double> out) const {
    cfg_->basis.to_physical(position, grid_);
    const auto& c = cfg_->f.coeffs;
    kernels::active().poly_eval(c.data(), c.size() - 1, grid_.data(),
                                fgrid_.data(), grid_.size());
    cfg_->basis.from_physical(fgrid_, out);
}

void Stepper::jacobian_apply(std::span<const double> u_grid,
                             std::span<const double> v_modal,
                             std::span<double> out) const {
    cfg_->basis.to_physical(v_modal, fgrid_);
    auto dc = cfg_->f.fprime_coeffs();
    kernels::active().poly_eval(dc.data(), dc.size() - 1, u_grid.data(),
                                grid_.data(), u_grid.size());
    for (std::size_t i = 0; i < fgrid_.size(); ++i) fgrid_[i] *= grid_[i];
    cfg_->basis.from_physical(fgrid_, out);
}

namespace {
inline void rotate(State& s, const std::vector<std::array<double, 4>>& rot) {
    int n = s.size();
    for (int j = 0; j < n; ++j) {
        const auto& m = rot[j];
        double a = s.position[j], v = s.velocity[j];
        s.position[j] = m[0] * a + m[1] * v;
        s.velocity[j] = m[2] * a + m[3] * v;
    }
}
} // namespace

void Stepper::step(State& s, std::span<const double> phi) const {
    rotate(s, rot_);
    f_modal(s.position, fmodal_);
    int n = s.size();
    for (int j = 0; j < n; ++j) {
        double force = cfg_->h_modes[j] - fmodal_[j];
        if (j < static_cast<int>(phi.size())) force += phi[j];
        s.velocity[j] += dt_ * force;
    }
    rotate(s, rot_);
    double a2 = 0.0;
    for (int j = 0; j < n; ++j)
        a2 += s.position[j] * s.position[j] + s.velocity[j] * s.velocity[j];
    if (!(a2 < divergence_ceiling * divergence_ceiling))
        throw DivergenceError(0.0);
}

Trajectory flow_controlled(const ModelConfig& cfg, const State& s0,
                           const ControlPath& phi, double t_end, double dt) {
    if (dt <= 0.0 || t_end <= 0.0)
        throw std::invalid_argument("dt and horizon must be positive");
    int n_steps = std::max(1, static_cast<int>(std::llround(t_end / dt)));
    Stepper st(cfg, t_end / n_steps);
    Trajectory traj;
    traj.dt = st.dt();
    traj.states.reserve(n_steps + 1);
    traj.states.push_back(s0);
    State s = s0;
    for (int k = 0; k < n_steps; ++k) {
        double t_mid = (k + 0.5) * st.dt();
        st.step(s, phi.empty() ? std::span<const double>{} : phi.at_time(t_mid));
        traj.states.push_back(s);
    }
    return traj;
}

Trajectory flow_deterministic(const ModelConfig& cfg, const State& s0,
                              double t_end, double dt) {
    return flow_controlled(cfg, s0, ControlPath{}, t_end, dt);
}

std::vector<int> EquilibriumSet::stable_indices() const {
    std::vector<int> out;
    for (int i = 0; i < count(); ++i)
        if (items[i].stability == Stability::stable) out.push_back(i);
    return out;
}

namespace {

// residual lambda_j a_j + <f(u), e_j> - h_j and its (symmetric) Jacobian
void equilibrium_residual(const ModelConfig& cfg, const Eigen::VectorXd& a,
                          Eigen::VectorXd& r) {
    int n = cfg.basis.n_modes();
    std::vector<double> modal(n);
    auto grid = cfg.basis.to_physical(std::span<const double>(a.data(), n));
    std::vector<double> fg(grid.size());
    const auto& c = cfg.f.coeffs;
    kernels::active().poly_eval(c.data(), c.size() - 1, grid.data(), fg.data(),
                                grid.size());
    cfg.basis.from_physical(fg, modal);
    for (int j = 0; j < n; ++j)
        r(j) = cfg.basis.eigenvalue(j) * a(j) + modal[j] - cfg.h_modes[j];
}

Eigen::MatrixXd stiffness_matrix(const ModelConfig& cfg,
                                 std::span<const double> position) {
    int n = cfg.basis.n_modes();
    int m = cfg.basis.n_nodes();
    auto grid = cfg.basis.to_physical(position);
    std::vector<double> fp(m);
    auto dc = cfg.f.fprime_coeffs();
    kernels::active().poly_eval(dc.data(), dc.size() - 1, grid.data(), fp.data(),
                                m);
    const auto& table = cfg.basis.mode_table();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    double w = cfg.basis.weight();
    for (int j = 0; j < n; ++j)
        for (int l = j; l < n; ++l) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i)
                acc += table[j * m + i] * fp[i] * table[l * m + i];
            k(j, l) = k(l, j) = acc * w;
        }
    for (int j = 0; j < n; ++j) k(j, j) += cfg.basis.eigenvalue(j);
    return k;
}

} // namespace

Equilibrium classify_stability(const ModelConfig& cfg, const State& u_hat,
                               double tol) {
    Equilibrium e;
    e.state = u_hat;
    Eigen::MatrixXd k = stiffness_matrix(cfg, u_hat.position);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    e.stiffness_spectrum.assign(es.eigenvalues().data(),
                                es.eigenvalues().data() + k.rows());
    // modal characteristic roots mu^2 + gamma mu + kappa = 0: both roots
    // have negative real part iff kappa > 0
    double kappa_min = e.stiffness_spectrum.front();
    double worst_re = -cfg.gamma / 2.0;
    for (double kappa : e.stiffness_spectrum) {
        double disc = cfg.gamma * cfg.gamma / 4.0 - kappa;
        double re = disc > 0.0 ? -cfg.gamma / 2.0 + std::sqrt(disc)
                               : -cfg.gamma / 2.0;
        worst_re = std::max(worst_re, re);
    }
    e.margin = -worst_re;
    if (std::abs(kappa_min) < tol)
        e.stability = Stability::marginal;
    else
        e.stability = kappa_min > 0.0 ? Stability::stable : Stability::unstable;
    return e;
}

EquilibriumSet find_equilibria(const ModelConfig& cfg,
                               const std::vector<State>& user_seeds) {
    int n = cfg.basis.n_modes();
    std::vector<Eigen::VectorXd> seeds;
    seeds.push_back(Eigen::VectorXd::Zero(n));
    for (int j = 0; j < std::min(3, n); ++j)
        for (double c : {0.5, 1.0, 2.0}) {
            Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
            s(j) = c / std::sqrt(cfg.basis.eigenvalue(j));
            seeds.push_back(s);
            seeds.push_back(-s);
        }
    for (const auto& u : user_seeds) {
        Eigen::VectorXd s(n);
        for (int j = 0; j < n; ++j) s(j) = u.position[j];
        seeds.push_back(s);
    }

    EquilibriumSet out;
    double alpha = cfg.effective_alpha();
    for (const auto& seed : seeds) {
        Eigen::VectorXd a = seed, r(n);
        bool degenerate = false;
        // iterate until the step stalls, not until the residual dips: near a
        // degenerate root many distinct points satisfy |r| < tol and would
        // otherwise survive as spurious "equilibria"
        for (int it = 0; it < 120; ++it) {
            equilibrium_residual(cfg, a, r);
            Eigen::MatrixXd jac = stiffness_matrix(
                cfg, std::span<const double>(a.data(), n));
            Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
            if (!lu.isInvertible()) {
                degenerate = true;
                break;
            }
            Eigen::VectorXd da = lu.solve(r);
            // damped Newton when far away
            double scale = da.norm() > 2.0 ? 2.0 / da.norm() : 1.0;
            a -= scale * da;
            if (!a.allFinite()) break;
            if (scale * da.norm() < 1e-11) break;
        }
        if (!a.allFinite()) continue;
        equilibrium_residual(cfg, a, r);
        if (r.norm() >= 1e-10) continue;
        State root(n);
        for (int j = 0; j < n; ++j) root.position[j] = a(j);

        bool duplicate = false;
        for (const auto& known : out.items)
            if (dist_h(known.state, root, alpha, cfg.basis) < 1e-6) {
                duplicate = true;
                break;
            }
        if (duplicate) continue;

        Equilibrium e = classify_stability(cfg, root);
        equilibrium_residual(cfg, a, r);
        e.residual = r.norm();
        e.degenerate = degenerate ||
                       std::abs(e.stiffness_spectrum.front()) < 1e-10;
        out.items.push_back(std::move(e));
    }
    // deterministic order: by first position coefficient, then second
    std::sort(out.items.begin(), out.items.end(),
              [](const Equilibrium& x, const Equilibrium& y) {
                  return x.state.position < y.state.position;
              });
    return out;
}

FeedbackResult feedback_control(const ModelConfig& cfg, const State& v0,
                                const State& u_hat, double rho1, double rho2,
                                double dt) {
    if (!(rho2 < rho1))
        throw std::invalid_argument("need rho2 < rho1");
    double alpha = cfg.effective_alpha();
    double t_end = 2.0 * (std::log(rho1) - std::log(rho2)) / alpha;
    int n = cfg.basis.n_modes();
    int n_steps = std::max(1, static_cast<int>(std::llround(t_end / dt)));

    FeedbackResult best;
    for (int n_proj = std::min(4, n); n_proj <= n;
         n_proj = std::min(2 * n_proj, n)) {
        Stepper st(cfg, t_end / n_steps);
        std::vector<double> f_hat(n);
        st.f_modal(u_hat.position, f_hat);

        FeedbackResult res;
        res.horizon = t_end;
        res.control = ControlPath(st.dt(), n_steps, n);
        res.trajectory.dt = st.dt();
        res.trajectory.states.push_back(v0);

        double d0_sq = norm_h_sq(v0 - u_hat, alpha, cfg.basis);
        State s = v0;
        std::vector<double> phi(n), fv(n);
        bool ok = true;
        for (int k = 0; k < n_steps; ++k) {
            // closed-loop control from the pre-step state, frozen over the step
            st.f_modal(s.position, fv);
            for (int j = 0; j < n; ++j)
                phi[j] = j < n_proj ? fv[j] - f_hat[j] : 0.0;
            res.control.coeffs[k] = phi;
            st.step(s, phi);
            res.trajectory.states.push_back(s);
            double t = (k + 1) * st.dt();
            // splitting floor keeps the check meaningful when d0 ~ 0
            double bound = std::exp(-alpha * t) * d0_sq + 1e-4 * rho2 * rho2;
            if (norm_h_sq(s - u_hat, alpha, cfg.basis) > 1.05 * bound) {
                ok = false;
                break;
            }
        }
        res.decay_ok = ok;
        res.n_used = n_proj;
        if (ok) {
            res.endpoint_ok =
                dist_h(s, u_hat, alpha, cfg.basis) <= 0.5 * rho2 * 1.05;
            double j_acc = 0.0;
            for (const auto& c : res.control.coeffs) {
                double v = norm_htheta(c, cfg.noise);
                j_acc += v * v;
            }
            res.action = 0.5 * st.dt() * j_acc;
            return res;
        }
        best = std::move(res);
        if (n_proj == n) break;
    }
    return best; // decay_ok == false: no admissible N up to N_G
}

ConnectionGraph heteroclinic_scan(const ModelConfig& cfg, const EquilibriumSet& eq,
                                  double delta, double capture_radius,
                                  double horizon, double dt) {
    ConnectionGraph graph;
    double alpha = cfg.effective_alpha();
    int n = cfg.basis.n_modes();
    for (int i = 0; i < eq.count(); ++i) {
        const auto& e = eq.items[i];
        if (e.stability != Stability::unstable) continue;
        Eigen::MatrixXd k = stiffness_matrix(cfg, e.state.position);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
        for (int d = 0; d < n; ++d) {
            double kappa = es.eigenvalues()(d);
            if (kappa >= 0.0) continue;
            double mu = -cfg.gamma / 2.0 +
                        std::sqrt(cfg.gamma * cfg.gamma / 4.0 - kappa);
            for (double sign : {1.0, -1.0}) {
                State dir(n);
                for (int j = 0; j < n; ++j) {
                    dir.position[j] = es.eigenvectors()(j, d);
                    dir.velocity[j] = mu * es.eigenvectors()(j, d);
                }
                double nrm = norm_h(dir, alpha, cfg.basis);
                State start = e.state + scaled(dir, sign * delta / nrm);

                Connection conn;
                conn.from = i;
                Stepper st(cfg, dt);
                State s = start;
                int n_steps = static_cast<int>(horizon / dt);
                int sample_every = std::max(1, n_steps / 64);
                bool arrived = false;
                for (int step = 0; step < n_steps && !arrived; ++step) {
                    st.step(s);
                    if (step % sample_every == 0) conn.waypoints.push_back(s);
                    for (int t = 0; t < eq.count(); ++t) {
                        if (t == i && step * dt < 1.0) continue;
                        if (dist_h(s, eq.items[t].state, alpha, cfg.basis) <
                            capture_radius) {
                            conn.to = t;
                            conn.determined = true;
                            arrived = true;
                            break;
                        }
                    }
                }
                conn.waypoints.push_back(s);
                graph.edges.push_back(std::move(conn));
            }
        }
    }
    return graph;
}

bool ControlPath::finite() const {
    for (const auto& c : coeffs)
        for (double x : c)
            if (!std::isfinite(x)) return false;
    return true;
}

} // namespace nlw
