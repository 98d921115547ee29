// Command-line front end: every subcommand reads one JSON experiment
// config and writes CSV/JSON artifacts into an output directory.
// Exit codes: 0 success, 2 inconclusive verdicts present, 1 error.
#include "nlw/harness.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

namespace {

using nlw::json;

struct Common {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;   // 0: keep the config's seed
    std::string eps_csv;      // comma-separated override
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("config", c.config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", c.out_dir, "output directory");
    sub->add_option("--seed", c.seed, "override the config seed");
    sub->add_option("--eps-list", c.eps_csv,
                    "override eps schedule, comma separated, decreasing");
}

nlw::ExperimentConfig load(const Common& c) {
    auto cfg = nlw::load_experiment(c.config_path);
    if (c.seed != 0) cfg.seed = c.seed;
    if (!c.eps_csv.empty()) {
        cfg.eps_list.clear();
        std::stringstream ss(c.eps_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.eps_list.push_back(std::stod(tok));
        cfg.validate();
    }
    return cfg;
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
    fs::path p = fs::path(dir) / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + p.string());
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

json equilibrium_json(const nlw::Equilibrium& e) {
    const char* s = e.stability == nlw::Stability::stable     ? "stable"
                    : e.stability == nlw::Stability::unstable ? "unstable"
                                                              : "marginal";
    return json{{"position", e.state.position},
                {"velocity", e.state.velocity},
                {"stability", s},
                {"stiffness_spectrum", e.stiffness_spectrum},
                {"margin", e.margin},
                {"residual", e.residual},
                {"degenerate", e.degenerate}};
}

int cmd_equilibria(const Common& c) {
    auto cfg = load(c);
    auto eq = nlw::find_equilibria(cfg.model);
    json j;
    j["count"] = eq.count();
    j["stable_indices"] = eq.stable_indices();
    json items = json::array();
    for (const auto& e : eq.items) items.push_back(equilibrium_json(e));
    j["equilibria"] = items;
    write_file(c.out_dir, "equilibria.json", j.dump(2) + "\n");
    std::string csv = "index,stability,margin,residual,a1\n";
    for (int k = 0; k < eq.count(); ++k) {
        const auto& e = eq.items[k];
        csv += std::to_string(k) + "," +
               (e.stability == nlw::Stability::stable ? "stable"
                : e.stability == nlw::Stability::unstable ? "unstable"
                                                          : "marginal") +
               "," + fmt(e.margin) + "," + fmt(e.residual) + "," +
               fmt(e.state.position.empty() ? 0.0 : e.state.position[0]) + "\n";
    }
    write_file(c.out_dir, "equilibria.csv", csv);
    return 0;
}

int cmd_simulate(const Common& c) {
    auto cfg = load(c);
    double eps = cfg.eps_list.front();
    nlw::State s0(cfg.model.basis.n_modes());
    auto traj = nlw::simulate(cfg.model, s0, eps, cfg.t_total, cfg.dt, cfg.seed);
    double alpha = cfg.model.effective_alpha();
    std::string csv = "t,a1,v1,norm_h,energy\n";
    std::size_t stride = std::max<std::size_t>(1, traj.states.size() / 20000);
    for (std::size_t k = 0; k < traj.states.size(); k += stride) {
        const auto& s = traj.states[k];
        csv += fmt(static_cast<double>(k) * traj.dt) + "," +
               fmt(s.position[0]) + "," + fmt(s.velocity[0]) + "," +
               fmt(nlw::norm_h(s, alpha, cfg.model.basis)) + "," +
               fmt(nlw::energy(s, cfg.model)) + "\n";
    }
    write_file(c.out_dir, "trajectory.csv", csv);
    return 0;
}

int cmd_map(const Common& c, int from_idx, int to_idx) {
    auto cfg = load(c);
    auto eq = nlw::find_equilibria(cfg.model);
    if (from_idx < 0 || from_idx >= eq.count() || to_idx < 0 ||
        to_idx >= eq.count())
        throw std::runtime_error("--from/--to out of range");
    auto r = nlw::quasipotential(cfg.model, eq.items[from_idx].state,
                                 eq.items[to_idx].state, cfg.mam);
    json j;
    j["from"] = from_idx;
    j["to"] = to_idx;
    j["feasible"] = r.feasible;
    j["value"] = r.feasible ? r.value : -1.0;
    j["t_used"] = r.t_used;
    j["eta_used"] = r.eta_used;
    j["endpoint_gap"] = r.endpoint_gap;
    j["iterations"] = r.iterations;
    json curve = json::array();
    for (auto [eta, v] : r.value_vs_eta)
        curve.push_back(json{{"eta", eta},
                             {"value", std::isfinite(v) ? v : -1.0}});
    j["value_vs_eta"] = curve;
    write_file(c.out_dir, "map.json", j.dump(2) + "\n");
    if (r.feasible) {
        std::string csv = "t,phi1\n";
        for (int k = 0; k < r.path.n_steps(); ++k)
            csv += fmt(k * r.path.dt) + "," + fmt(r.path.coeffs[k][0]) + "\n";
        write_file(c.out_dir, "control.csv", csv);
    }
    return r.feasible ? 0 : 2;
}

int cmd_quasipotential(const Common& c) {
    auto cfg = load(c);
    auto eq = nlw::find_equilibria(cfg.model);
    int l = eq.count();
    nlw::QuasipotentialMatrix V(l);
    for (int i = 0; i < l; ++i)
        for (int j2 = 0; j2 < l; ++j2) {
            if (i == j2) continue;
            auto r = nlw::quasipotential(cfg.model, eq.items[i].state,
                                         eq.items[j2].state, cfg.mam);
            V.at(i, j2) = r.feasible
                              ? r.value
                              : std::numeric_limits<double>::infinity();
        }
    nlw::triangle_closure(V);
    auto w = nlw::w_all(V);
    double wmin = *std::min_element(w.begin(), w.end());
    json j;
    json vm = json::array();
    for (int i = 0; i < l; ++i) {
        json row = json::array();
        for (int j2 = 0; j2 < l; ++j2)
            row.push_back(std::isfinite(V(i, j2)) ? V(i, j2) : -1.0);
        vm.push_back(row);
    }
    j["v_matrix"] = vm;
    j["w"] = w;
    json rates = json::array();
    for (double wi : w) rates.push_back(wi - wmin);
    j["rate_at_equilibria"] = rates;
    write_file(c.out_dir, "quasipotential.json", j.dump(2) + "\n");
    std::string csv = "i,j,v\n";
    for (int i = 0; i < l; ++i)
        for (int j2 = 0; j2 < l; ++j2)
            if (i != j2)
                csv += std::to_string(i) + "," + std::to_string(j2) + "," +
                       fmt(std::isfinite(V(i, j2)) ? V(i, j2) : -1.0) + "\n";
    write_file(c.out_dir, "quasipotential.csv", csv);
    return 0;
}

int cmd_wgraph(const Common& c, bool tree_mode) {
    std::ifstream in(c.config_path);
    json cfg_j = json::parse(in);
    auto m = cfg_j.at("v_matrix").get<std::vector<std::vector<double>>>();
    int l = static_cast<int>(m.size());
    nlw::QuasipotentialMatrix V(l);
    for (int i = 0; i < l; ++i)
        for (int j2 = 0; j2 < l; ++j2)
            V.at(i, j2) = m[i][j2] < 0.0
                              ? std::numeric_limits<double>::infinity()
                              : m[i][j2];
    json j;
    json chains = json::array();
    std::vector<double> w(l);
    for (int i = 0; i < l; ++i) {
        auto r = nlw::w_chain(V, i);
        w[i] = r.value;
        chains.push_back(json{{"target", i},
                              {"w", std::isfinite(r.value) ? r.value : -1.0},
                              {"chain", r.chain}});
    }
    j["w"] = chains;
    if (tree_mode) {
        json trees = json::array();
        for (int i = 0; i < l; ++i) {
            double t = nlw::w_tree(V, i);
            trees.push_back(std::isfinite(t) ? t : -1.0);
        }
        j["w_tree"] = trees;
    }
    write_file(c.out_dir, "wgraph.json", j.dump(2) + "\n");
    return 0;
}

int cmd_ldp_verify(const Common& c) {
    auto cfg = load(c);
    auto rep = nlw::ldp_verify(cfg);
    nlw::emit(rep, c.out_dir);
    return rep.any_inconclusive() ? 2 : 0;
}

int cmd_chain(const Common& c) {
    auto cfg = load(c);
    auto eq = nlw::find_equilibria(cfg.model);
    nlw::NeighborhoodSystem ns;
    for (const auto& e : eq.items) ns.centers.push_back(e.state);
    ns.rho1p = cfg.rho1p;
    ns.rho0p = cfg.rho0p;
    ns.rho1 = cfg.rho1;
    ns.rho0 = cfg.rho0;
    ns.rho_star = cfg.rho_star;
    ns.validate(cfg.model.effective_alpha(), cfg.model.basis);
    auto stable = eq.stable_indices();
    if (cfg.chain_pair_i >= static_cast<int>(stable.size()) ||
        cfg.chain_pair_j >= static_cast<int>(stable.size()))
        throw std::runtime_error("chain pair indices exceed the stable set");
    int si = stable[cfg.chain_pair_i];
    int sj = stable[cfg.chain_pair_j];
    auto rows = nlw::estimate_transition(cfg.model, ns, cfg.eps_list, si, sj,
                                         cfg.chain_samples, cfg.seed + 7919,
                                         cfg.dt);
    std::string csv = "i,j,eps,n_samples,hits,p_hat,upper_bound_only,"
                      "minus_eps_log_p\n";
    bool inconclusive = true;
    for (const auto& t : rows) {
        csv += std::to_string(t.i) + "," + std::to_string(t.j) + "," +
               fmt(t.eps) + "," + std::to_string(t.n_samples) + "," +
               std::to_string(t.hits) + "," + fmt(t.p_hat) + "," +
               (t.upper_bound_only ? "1" : "0") + "," +
               fmt(t.minus_eps_log_p) + "\n";
        if (!t.upper_bound_only && t.hits >= 5) inconclusive = false;
    }
    write_file(c.out_dir, "chain.csv", csv);
    return inconclusive ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Freidlin-Wentzell toolkit for the damped stochastic "
                 "nonlinear wave equation"};
    app.require_subcommand(1);

    Common c;
    int from_idx = 0, to_idx = 0;
    bool tree_mode = false;

    auto* s_eq = app.add_subcommand("equilibria", "find and classify equilibria");
    add_common(s_eq, c);
    auto* s_sim = app.add_subcommand("simulate", "one stochastic trajectory");
    add_common(s_sim, c);
    auto* s_map = app.add_subcommand("map", "quasipotential between two equilibria");
    add_common(s_map, c);
    s_map->add_option("--from", from_idx, "source equilibrium index");
    s_map->add_option("--to", to_idx, "target equilibrium index");
    auto* s_qp = app.add_subcommand("quasipotential", "full pairwise matrix");
    add_common(s_qp, c);
    auto* s_wg = app.add_subcommand("wgraph", "W values from a v_matrix config");
    add_common(s_wg, c);
    s_wg->add_flag("--tree", tree_mode, "also report the in-tree minimum");
    auto* s_ldp = app.add_subcommand("ldp-verify", "full LDP pipeline");
    add_common(s_ldp, c);
    auto* s_chain = app.add_subcommand("chain", "boundary-chain transitions");
    add_common(s_chain, c);

    CLI11_PARSE(app, argc, argv);

    try {
        if (s_eq->parsed()) return cmd_equilibria(c);
        if (s_sim->parsed()) return cmd_simulate(c);
        if (s_map->parsed()) return cmd_map(c, from_idx, to_idx);
        if (s_qp->parsed()) return cmd_quasipotential(c);
        if (s_wg->parsed()) return cmd_wgraph(c, tree_mode);
        if (s_ldp->parsed()) return cmd_ldp_verify(c);
        if (s_chain->parsed()) return cmd_chain(c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
