#ifndef NLW_DYNAMICS_HPP
#define NLW_DYNAMICS_HPP

#include "nlw/control.hpp"
#include "nlw/model.hpp"
#include "nlw/spectral.hpp"

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlw {

struct DivergenceError : std::runtime_error {
    explicit DivergenceError(double t)
        : std::runtime_error("trajectory norm exceeded the divergence ceiling at t="
                             + std::to_string(t)) {}
};

// Strang splitting: half exact damped-oscillator rotation per mode, full
// pseudospectral kick with f, h and the control at the midpoint, half
// rotation.  Exact on the free linear equation.
class Stepper {
  public:
    Stepper(const ModelConfig& cfg, double dt);

    double dt() const { return dt_; }

    // advances s by one step; phi is a modal control held constant over
    // the step (empty means no control)
    void step(State& s, std::span<const double> phi = {}) const;

    // modal projection of f(u) via the dealiased grid
    void f_modal(std::span<const double> position, std::span<double> out) const;

    // action of the symmetric Jacobian D(u)v = P[f'(u) v] in modal form,
    // with u given by its grid values
    void jacobian_apply(std::span<const double> u_grid,
                        std::span<const double> v_modal,
                        std::span<double> out) const;

    const ModelConfig& config() const { return *cfg_; }
    // half-step rotation matrix of mode j, row-major 2x2
    const std::array<double, 4>& half_rotation(int j) const { return rot_[j]; }

    double divergence_ceiling = 1e6;

  private:
    const ModelConfig* cfg_;
    double dt_;
    std::vector<std::array<double, 4>> rot_;
    mutable std::vector<double> grid_, fgrid_, fmodal_;
};

// exp(t * [[0,1],[-lambda,-gamma]]), row-major
std::array<double, 4> damped_rotation(double lambda, double gamma, double t);

struct Trajectory {
    double dt = 0.0;
    std::vector<State> states; // includes both endpoints

    double horizon() const { return dt * static_cast<double>(states.size() - 1); }
    const State& back() const { return states.back(); }
};

Trajectory flow_deterministic(const ModelConfig& cfg, const State& s0, double t_end,
                              double dt);
Trajectory flow_controlled(const ModelConfig& cfg, const State& s0,
                           const ControlPath& phi, double t_end, double dt);

enum class Stability { stable, unstable, marginal };

struct Equilibrium {
    State state;
    Stability stability = Stability::marginal;
    std::vector<double> stiffness_spectrum; // eigenvalues of -Delta + f'(u)
    double margin = 0.0;                    // min over modes of -Re(mu)
    double residual = 0.0;
    bool degenerate = false;
};

struct EquilibriumSet {
    std::vector<Equilibrium> items;

    int count() const { return static_cast<int>(items.size()); }
    std::vector<int> stable_indices() const;
};

EquilibriumSet find_equilibria(const ModelConfig& cfg,
                               const std::vector<State>& user_seeds = {});

Equilibrium classify_stability(const ModelConfig& cfg, const State& u_hat,
                               double tol = 1e-8);

struct FeedbackResult {
    ControlPath control;    // realized open-loop control on the step grid
    Trajectory trajectory;
    int n_used = 0;         // projection level that satisfied the decay bound
    bool decay_ok = false;
    bool endpoint_ok = false;
    double action = 0.0;    // J_T of the realized control
    double horizon = 0.0;
};

// Closed-loop stabilization toward u_hat with phi = P_N[f(v) - f(u_hat)],
// run over T = 2(ln rho1 - ln rho2)/alpha.  N escalates from 4 until the
// exponential decay bound holds (tolerance factor 1.05) or N_G is reached.
FeedbackResult feedback_control(const ModelConfig& cfg, const State& v0,
                                const State& u_hat, double rho1, double rho2,
                                double dt);

struct Connection {
    int from = -1;
    int to = -1; // -1 when undetermined
    bool determined = false;
    std::vector<State> waypoints; // samples along the connecting orbit
};

struct ConnectionGraph {
    std::vector<Connection> edges;
};

// Integrates from unstable equilibria perturbed along their unstable
// eigendirections and records which equilibrium each orbit reaches.
ConnectionGraph heteroclinic_scan(const ModelConfig& cfg, const EquilibriumSet& eq,
                                  double delta = 1e-3, double capture_radius = 1e-3,
                                  double horizon = 200.0, double dt = 1e-2);

} // namespace nlw

#endif
