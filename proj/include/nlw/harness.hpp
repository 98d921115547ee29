#ifndef NLW_HARNESS_HPP
#define NLW_HARNESS_HPP

#include "nlw/action.hpp"
#include "nlw/fw_graph.hpp"
#include "nlw/stochastic.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nlw {

using json = nlohmann::ordered_json;

// Full experiment description, read from a versioned JSON config.
struct ExperimentConfig {
    int schema_version = 1;
    ModelConfig model;

    std::vector<double> eps_list{0.30, 0.20, 0.12, 0.08}; // strictly decreasing
    double ball_radius = 0.3;   // occupation balls g_j around the equilibria
    double eta = 0.3;           // stochastic-stability neighborhood of E
    double burn_in = 50.0;
    double t_total = 2000.0;
    double dt = 0.01;

    // boundary chain radii (rho1p < rho0p < rho1 < rho0 < rho_star)
    double rho1p = 0.10, rho0p = 0.15, rho1 = 0.20, rho0 = 0.30, rho_star = 0.9;
    int chain_samples = 200;
    int chain_pair_i = 0, chain_pair_j = 1;

    std::uint64_t seed = 1;
    MamOptions mam;

    static ExperimentConfig from_json(const json& j);
    json to_json() const;
    void validate() const;
};

ExperimentConfig load_experiment(const std::string& path);

struct BallRow {
    int ball = 0;
    double eps = 0.0;
    double fraction = 0.0;
    double ci_halfwidth = 0.0;
    double minus_eps_log_mu = 0.0;
    bool insufficient = false;
};

struct LdpReport {
    std::vector<BallRow> rows;              // |eps_list| x |balls|
    std::vector<double> v_values;           // rate function at each ball center
    std::vector<double> slopes;             // fitted slope of ln mu vs -1/eps
    std::vector<double> slope_stderr;
    std::vector<std::string> verdicts;      // consistent / inconsistent / inconclusive

    std::vector<double> stability_eps;      // eps * ln mu(E_eta) trend
    std::vector<double> stability_values;
    std::string stability_verdict;

    std::vector<TransitionEstimate> chain_rows;
    double vtilde = 0.0;
    double chain_beta = 0.0;                // implied beta at the smallest feasible eps
    std::string chain_verdict;

    json to_json() const;
    static LdpReport from_json(const json& j);
    std::string to_csv() const; // one row per (ball, eps)

    bool any_inconclusive() const;
};

// least-squares fit y = a + b x; returns (b, stderr of b)
std::pair<double, double> fit_slope(const std::vector<double>& x,
                                    const std::vector<double>& y);

// orchestrates equilibria -> stability -> quasipotential matrix -> W ->
// per-eps occupation estimates -> slope regression and verdicts
LdpReport ldp_verify(const ExperimentConfig& cfg);

// eps * ln mu(E_eta) on the schedule, with a 95% monotone-trend verdict
void stochastic_stability_check(const ExperimentConfig& cfg, LdpReport& rep);

// boundary-chain transition estimates against a precomputed Vtilde
void transition_vs_vtilde(const ExperimentConfig& cfg,
                          const EquilibriumSet& eq, double vtilde,
                          LdpReport& rep);

// writes report.csv and report.json under out_dir; deterministic contents
void emit(const LdpReport& rep, const std::string& out_dir);

} // namespace nlw

#endif
