#ifndef NLW_ACTION_HPP
#define NLW_ACTION_HPP

#include "nlw/dynamics.hpp"

#include <utility>
#include <vector>

namespace nlw {

// J_T(phi) = 1/2 int_0^T |phi|_{H_theta}^2 dt, piecewise-constant quadrature
double action_j(const ControlPath& phi, const NoiseSpec& noise);

// Penalized objective for the shooting formulation: the trajectory is
// S^phi(.; u1) by construction, the endpoint constraint |S^phi(T) - target|
// <= eta enters through a quadratic penalty, and optional forbidden balls
// enter through a smooth barrier on the trajectory.
struct ShootingObjective {
    const ModelConfig* cfg = nullptr;
    State u1;
    State target;
    double t_end = 0.0;
    double dt = 0.0;
    double eta = 0.1;
    double sigma = 1.0;
    std::vector<State> forbidden;
    double rho_avoid = 0.0;
    double barrier_weight = 50.0;

    struct Eval {
        double objective = 0.0;
        double action = 0.0;
        double endpoint_gap = 0.0;
        double barrier = 0.0;
        bool diverged = false;
    };

    Eval evaluate(const ControlPath& phi) const;
    // exact discrete adjoint of the Strang stepper; grad has the shape of phi
    Eval gradient(const ControlPath& phi, ControlPath& grad) const;
};

struct MamOptions {
    std::vector<double> t_schedule;     // empty: {2,5,10,20}/alpha
    std::vector<double> sigma_schedule; // empty: {1, 0.1, 0.01, 0.001}
    double eta_start = 0.2;
    double eta_min = 0.01;
    double eta_factor = 0.5;
    int n_control_modes = 0; // 0: all modes
    double dt = 0.02;
    int max_steps_per_horizon = 20000;
    int max_iter = 400;
    double grad_tol = 1e-10;
    double barrier_weight = 50.0;
    double rho_avoid = 0.2;
    int max_waypoint_seeds = 4;
    std::vector<ControlPath> warm_starts;
};

struct MamResult {
    double value = 0.0; // +inf when infeasible at every (T, eta) cell
    bool feasible = false;
    ControlPath path;
    double t_used = 0.0;
    double eta_used = 0.0;
    double endpoint_gap = 0.0;
    std::vector<std::pair<double, double>> value_vs_eta; // (eta, value)
    int iterations = 0;
    std::vector<std::string> log;
};

MamResult quasipotential(const ModelConfig& cfg, const State& u1,
                         const State& u2, const MamOptions& opts = {});

MamResult quasipotential_avoiding(const ModelConfig& cfg, const State& u1,
                                  const State& u2,
                                  const std::vector<State>& forbidden,
                                  double rho_avoid,
                                  const MamOptions& opts = {});

// V over the attractor: minimum over equilibria and heteroclinic waypoints
double quasipotential_from_attractor(const ModelConfig& cfg, const State& u_star,
                                     const EquilibriumSet& eq,
                                     const ConnectionGraph& graph,
                                     const MamOptions& opts = {});

} // namespace nlw

#endif
