#ifndef NLW_STOCHASTIC_HPP
#define NLW_STOCHASTIC_HPP

#include "nlw/dynamics.hpp"
#include "nlw/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nlw {

// SDE integrator: deterministic Strang step plus the exact Gaussian
// transition increment of the damped linear oscillator per mode, so the
// linear dynamics carries no dt bias and eps = 0 reduces to the
// deterministic flow exactly.
class SdeSimulator {
  public:
    SdeSimulator(const ModelConfig& cfg, double eps, double dt,
                 std::uint64_t seed, std::uint64_t stream = 0);

    void set_state(const State& s) { state_ = s; }
    const State& state() const { return state_; }
    double time() const { return t_; }
    double dt() const { return stepper_.dt(); }
    const Stepper& stepper() const { return stepper_; }

    void step(std::span<const double> phi = {});

  private:
    Stepper stepper_;
    double eps_;
    Philox rng_;
    State state_;
    double t_ = 0.0;
    // per-mode Cholesky factors of the one-step noise covariance
    std::vector<std::array<double, 3>> chol_; // l11, l21, l22
};

Trajectory simulate(const ModelConfig& cfg, const State& s0, double eps,
                    double t_end, double dt, std::uint64_t seed);

struct BallEvent {
    State center;
    double radius = 0.0; // infinity allowed
};

struct OccupationEstimate {
    double fraction = 0.0;
    double ci_halfwidth = 0.0; // 95%, batch means
    bool insufficient = false;
};

std::vector<OccupationEstimate> estimate_stationary(
    const ModelConfig& cfg, double eps, const std::vector<BallEvent>& events,
    double burn_in, double t_total, double dt, std::uint64_t seed,
    const State* start = nullptr, double requested_ci = 0.0);

// Radii of the boundary-chain construction with the derived neighborhood
// families: g_i / g~_i are the rho1 / rho0 balls around the first ell
// centers, and the optional extra center uses the primed radii.
struct NeighborhoodSystem {
    std::vector<State> centers;
    bool has_extra = false; // last center uses rho1p / rho0p
    double rho1p = 0.0, rho0p = 0.0, rho1 = 0.0, rho0 = 0.0, rho_star = 0.0;

    int count() const { return static_cast<int>(centers.size()); }
    double inner_radius(int i) const {
        return has_extra && i == count() - 1 ? rho1p : rho1;
    }
    double outer_radius(int i) const {
        return has_extra && i == count() - 1 ? rho0p : rho0;
    }
    void validate(double alpha, const SpectralBasis& basis) const;
};

struct ChainRecord {
    double sigma_prev = 0.0; // exit time preceding this hit
    double tau = 0.0;        // hit time
    int ball = -1;           // index of the ball whose boundary was hit
    State point;             // refined boundary point
};

struct ChainSample {
    std::vector<ChainRecord> records;
    bool partial = false; // step budget exhausted before n_steps hits
    bool no_exit = false; // never left g~ within the budget (eps ~ 0 case)
};

ChainSample boundary_chain_run(const ModelConfig& cfg,
                               const NeighborhoodSystem& ns, double eps,
                               int n_steps, std::uint64_t seed, double dt,
                               std::int64_t max_sim_steps = 200'000'000);

struct TransitionEstimate {
    int i = -1, j = -1;
    double eps = 0.0;
    int n_samples = 0;
    int hits = 0;
    double p_hat = 0.0;         // point estimate (or CP upper bound when hits=0)
    bool upper_bound_only = false;
    double minus_eps_log_p = 0.0;
};

// one-step chain transition probabilities from boundary starts on d(g_i)
std::vector<TransitionEstimate> estimate_transition(
    const ModelConfig& cfg, const NeighborhoodSystem& ns,
    const std::vector<double>& eps_list, int i, int j, int n_samples,
    std::uint64_t seed, double dt);

struct MomentSeries {
    std::vector<double> times;
    std::vector<double> values; // ensemble mean of exp(kappa * E)
    double kappa_used = 0.0;
    bool kappa_reduced = false;
    bool bounded = false; // no upward trend after burn-in, 95% confidence
    double trend_tstat = 0.0;
};

MomentSeries exponential_moment_check(const ModelConfig& cfg, const State& s0,
                                      double eps, double kappa, double t_end,
                                      int n_seeds, double dt,
                                      std::uint64_t seed);

struct ExitMomentRow {
    double delta = 0.0;
    double mgf = 0.0;
    double ci_halfwidth = 0.0;
    bool stable = true; // false when the estimate is dominated by few samples
};

std::vector<ExitMomentRow> exit_time_moments(const ModelConfig& cfg,
                                             const NeighborhoodSystem& ns,
                                             double eps,
                                             const std::vector<double>& delta_list,
                                             int n_samples, std::uint64_t seed,
                                             double dt, int start_ball = 0);

} // namespace nlw

#endif
