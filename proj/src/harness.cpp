#include "nlw/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace nlw {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}
} // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.schema_version = j.value("schema_version", 0);
    if (cfg.schema_version != 1)
        throw std::runtime_error("unsupported schema_version (expected 1)");

    const auto& jm = j.at("model");
    int n_modes = jm.at("n_modes").get<int>();
    double gamma = jm.at("gamma").get<double>();
    double alpha = jm.value("alpha", 0.0);
    Nonlinearity f = Nonlinearity::polynomial(
        jm.value("f", std::vector<double>{}));
    std::vector<double> h = jm.value("h", std::vector<double>{});

    NoiseSpec noise;
    const auto& jn = jm.at("noise");
    if (jn.contains("b")) {
        noise.b = jn.at("b").get<std::vector<double>>();
        noise.law = "explicit";
    } else {
        noise = NoiseSpec::power_law(n_modes, jn.value("p", 2.0),
                                     jn.value("scale", 1.0));
    }
    cfg.model = ModelConfig::make(n_modes, gamma, std::move(f), std::move(h),
                                  std::move(noise), alpha);

    cfg.eps_list = j.value("eps_list", cfg.eps_list);
    cfg.ball_radius = j.value("ball_radius", cfg.ball_radius);
    cfg.eta = j.value("eta", cfg.eta);
    cfg.burn_in = j.value("burn_in", cfg.burn_in);
    cfg.t_total = j.value("t_total", cfg.t_total);
    cfg.dt = j.value("dt", cfg.dt);
    cfg.rho1p = j.value("rho1p", cfg.rho1p);
    cfg.rho0p = j.value("rho0p", cfg.rho0p);
    cfg.rho1 = j.value("rho1", cfg.rho1);
    cfg.rho0 = j.value("rho0", cfg.rho0);
    cfg.rho_star = j.value("rho_star", cfg.rho_star);
    cfg.chain_samples = j.value("chain_samples", cfg.chain_samples);
    cfg.chain_pair_i = j.value("chain_pair_i", cfg.chain_pair_i);
    cfg.chain_pair_j = j.value("chain_pair_j", cfg.chain_pair_j);
    cfg.seed = j.value("seed", cfg.seed);

    if (j.contains("mam")) {
        const auto& m = j.at("mam");
        cfg.mam.t_schedule = m.value("t_schedule", cfg.mam.t_schedule);
        cfg.mam.sigma_schedule =
            m.value("sigma_schedule", cfg.mam.sigma_schedule);
        cfg.mam.eta_start = m.value("eta_start", cfg.mam.eta_start);
        cfg.mam.eta_min = m.value("eta_min", cfg.mam.eta_min);
        cfg.mam.eta_factor = m.value("eta_factor", cfg.mam.eta_factor);
        cfg.mam.n_control_modes =
            m.value("n_control_modes", cfg.mam.n_control_modes);
        cfg.mam.dt = m.value("dt", cfg.mam.dt);
        cfg.mam.max_iter = m.value("max_iter", cfg.mam.max_iter);
        cfg.mam.rho_avoid = m.value("rho_avoid", cfg.mam.rho_avoid);
        cfg.mam.barrier_weight =
            m.value("barrier_weight", cfg.mam.barrier_weight);
    }
    cfg.validate();
    return cfg;
}

json ExperimentConfig::to_json() const {
    json j;
    j["schema_version"] = schema_version;
    json jm;
    jm["n_modes"] = model.basis.n_modes();
    jm["gamma"] = model.gamma;
    jm["alpha"] = model.alpha;
    jm["f"] = model.f.coeffs;
    jm["h"] = model.h_modes;
    jm["noise"] = json{{"b", model.noise.b}};
    j["model"] = jm;
    j["eps_list"] = eps_list;
    j["ball_radius"] = ball_radius;
    j["eta"] = eta;
    j["burn_in"] = burn_in;
    j["t_total"] = t_total;
    j["dt"] = dt;
    j["rho1p"] = rho1p;
    j["rho0p"] = rho0p;
    j["rho1"] = rho1;
    j["rho0"] = rho0;
    j["rho_star"] = rho_star;
    j["chain_samples"] = chain_samples;
    j["chain_pair_i"] = chain_pair_i;
    j["chain_pair_j"] = chain_pair_j;
    j["seed"] = seed;
    return j;
}

void ExperimentConfig::validate() const {
    if (eps_list.empty()) throw std::runtime_error("eps_list is empty");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (eps_list[k] <= 0.0)
            throw std::runtime_error("eps_list entries must be positive");
        if (k > 0 && eps_list[k] >= eps_list[k - 1])
            throw std::runtime_error("eps_list must be strictly decreasing");
    }
    if (!(0.0 < rho1p && rho1p < rho0p && rho0p < rho1 && rho1 < rho0 &&
          rho0 < rho_star))
        throw std::runtime_error(
            "radii must satisfy 0 < rho1' < rho0' < rho1 < rho0 < rho_*");
    if (t_total <= burn_in || dt <= 0.0 || chain_samples <= 0 ||
        ball_radius <= 0.0 || eta <= 0.0)
        throw std::runtime_error("budgets and radii must be positive");
}

ExperimentConfig load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json j = json::parse(in);
    return ExperimentConfig::from_json(j);
}

std::pair<double, double> fit_slope(const std::vector<double>& x,
                                    const std::vector<double>& y) {
    std::size_t n = x.size();
    if (n != y.size() || n < 2)
        throw std::invalid_argument("fit_slope needs matched x/y, n >= 2");
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("degenerate abscissae");
    double b = sxy / sxx;
    double a = my - b * mx;
    double rss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double r = y[k] - a - b * x[k];
        rss += r * r;
    }
    double se = n > 2 ? std::sqrt(rss / (static_cast<double>(n) - 2.0) / sxx)
                      : 0.0;
    return {b, se};
}

json LdpReport::to_json() const {
    json j;
    json rows_j = json::array();
    for (const auto& r : rows)
        rows_j.push_back(json{{"ball", r.ball},
                              {"eps", r.eps},
                              {"fraction", r.fraction},
                              {"ci_halfwidth", r.ci_halfwidth},
                              {"minus_eps_log_mu", r.minus_eps_log_mu},
                              {"insufficient", r.insufficient}});
    j["rows"] = rows_j;
    j["v_values"] = v_values;
    j["slopes"] = slopes;
    j["slope_stderr"] = slope_stderr;
    j["verdicts"] = verdicts;
    j["stability_eps"] = stability_eps;
    j["stability_values"] = stability_values;
    j["stability_verdict"] = stability_verdict;
    json chain_j = json::array();
    for (const auto& t : chain_rows)
        chain_j.push_back(json{{"i", t.i},
                               {"j", t.j},
                               {"eps", t.eps},
                               {"n_samples", t.n_samples},
                               {"hits", t.hits},
                               {"p_hat", t.p_hat},
                               {"upper_bound_only", t.upper_bound_only},
                               {"minus_eps_log_p", t.minus_eps_log_p}});
    j["chain_rows"] = chain_j;
    j["vtilde"] = vtilde;
    j["chain_beta"] = chain_beta;
    j["chain_verdict"] = chain_verdict;
    return j;
}

LdpReport LdpReport::from_json(const json& j) {
    LdpReport r;
    for (const auto& e : j.at("rows")) {
        BallRow b;
        b.ball = e.at("ball").get<int>();
        b.eps = e.at("eps").get<double>();
        b.fraction = e.at("fraction").get<double>();
        b.ci_halfwidth = e.at("ci_halfwidth").get<double>();
        b.minus_eps_log_mu = e.at("minus_eps_log_mu").get<double>();
        b.insufficient = e.at("insufficient").get<bool>();
        r.rows.push_back(b);
    }
    r.v_values = j.at("v_values").get<std::vector<double>>();
    r.slopes = j.at("slopes").get<std::vector<double>>();
    r.slope_stderr = j.at("slope_stderr").get<std::vector<double>>();
    r.verdicts = j.at("verdicts").get<std::vector<std::string>>();
    r.stability_eps = j.at("stability_eps").get<std::vector<double>>();
    r.stability_values = j.at("stability_values").get<std::vector<double>>();
    r.stability_verdict = j.at("stability_verdict").get<std::string>();
    for (const auto& e : j.at("chain_rows")) {
        TransitionEstimate t;
        t.i = e.at("i").get<int>();
        t.j = e.at("j").get<int>();
        t.eps = e.at("eps").get<double>();
        t.n_samples = e.at("n_samples").get<int>();
        t.hits = e.at("hits").get<int>();
        t.p_hat = e.at("p_hat").get<double>();
        t.upper_bound_only = e.at("upper_bound_only").get<bool>();
        t.minus_eps_log_p = e.at("minus_eps_log_p").get<double>();
        r.chain_rows.push_back(t);
    }
    r.vtilde = j.at("vtilde").get<double>();
    r.chain_beta = j.at("chain_beta").get<double>();
    r.chain_verdict = j.at("chain_verdict").get<std::string>();
    return r;
}

std::string LdpReport::to_csv() const {
    std::string out =
        "ball,eps,fraction,ci_halfwidth,minus_eps_log_mu,insufficient\n";
    for (const auto& r : rows) {
        out += std::to_string(r.ball) + "," + fmt(r.eps) + "," +
               fmt(r.fraction) + "," + fmt(r.ci_halfwidth) + "," +
               fmt(r.minus_eps_log_mu) + "," +
               (r.insufficient ? "1" : "0") + "\n";
    }
    return out;
}

bool LdpReport::any_inconclusive() const {
    for (const auto& v : verdicts)
        if (v == "inconclusive") return true;
    return stability_verdict == "inconclusive" ||
           chain_verdict == "inconclusive";
}

LdpReport ldp_verify(const ExperimentConfig& cfg) {
    LdpReport rep;
    auto eq = find_equilibria(cfg.model);
    int l = eq.count();
    if (l < 1) throw std::runtime_error("no equilibria found");
    if (l > 6)
        throw std::runtime_error("pipeline limited to at most 6 equilibria");

    // quasipotential matrix over every equilibrium, then W and the rates
    QuasipotentialMatrix V(l);
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
            if (i == j) continue;
            auto r = quasipotential(cfg.model, eq.items[i].state,
                                    eq.items[j].state, cfg.mam);
            V.at(i, j) = r.feasible ? r.value : kInf;
        }
    // the shooting values are upper bounds; relaxing through intermediate
    // equilibria recovers e.g. the well-to-well cost through the saddle
    triangle_closure(V);
    auto w = w_all(V);
    double w_min = *std::min_element(w.begin(), w.end());
    rep.v_values.resize(l);
    for (int k = 0; k < l; ++k) rep.v_values[k] = w[k] - w_min;

    // one long path per eps, all occupation balls measured together
    std::vector<BallEvent> events;
    for (const auto& e : eq.items)
        events.push_back({e.state, cfg.ball_radius});
    for (std::size_t k = 0; k < cfg.eps_list.size(); ++k) {
        double eps = cfg.eps_list[k];
        auto est = estimate_stationary(cfg.model, eps, events, cfg.burn_in,
                                       cfg.t_total, cfg.dt,
                                       cfg.seed + 17 * (k + 1));
        for (int b = 0; b < l; ++b) {
            BallRow row;
            row.ball = b;
            row.eps = eps;
            row.fraction = est[b].fraction;
            row.ci_halfwidth = est[b].ci_halfwidth;
            row.insufficient = est[b].insufficient || est[b].fraction <= 0.0;
            // 0 stands in for "no estimate"; JSON cannot carry infinities
            row.minus_eps_log_mu =
                row.insufficient ? 0.0 : -eps * std::log(est[b].fraction);
            rep.rows.push_back(row);
        }
    }

    // regression of ln mu against -1/eps, per ball
    for (int b = 0; b < l; ++b) {
        std::vector<double> x, y;
        bool bad = false;
        for (const auto& row : rep.rows)
            if (row.ball == b) {
                if (row.insufficient) {
                    bad = true;
                    continue;
                }
                x.push_back(-1.0 / row.eps);
                y.push_back(std::log(row.fraction));
            }
        if (x.size() < 3) {
            rep.slopes.push_back(0.0);
            rep.slope_stderr.push_back(0.0);
            rep.verdicts.push_back("inconclusive");
            continue;
        }
        auto [slope, se] = fit_slope(x, y);
        rep.slopes.push_back(slope);
        rep.slope_stderr.push_back(se);
        double v = rep.v_values[b];
        if (bad || se > 0.5 * std::max(std::abs(slope), 0.05)) {
            rep.verdicts.push_back("inconclusive");
        } else if (std::abs(slope - v) <= std::max(0.3 * v, 0.1)) {
            rep.verdicts.push_back("consistent");
        } else {
            rep.verdicts.push_back("inconsistent");
        }
    }

    stochastic_stability_check(cfg, rep);

    // chain comparison between the configured pair of stable equilibria
    auto stable = eq.stable_indices();
    if (cfg.chain_pair_i < static_cast<int>(stable.size()) &&
        cfg.chain_pair_j < static_cast<int>(stable.size()) &&
        cfg.chain_pair_i != cfg.chain_pair_j) {
        int si = stable[cfg.chain_pair_i];
        int sj = stable[cfg.chain_pair_j];
        std::vector<State> forbidden;
        for (int k = 0; k < l; ++k)
            if (k != si && k != sj) forbidden.push_back(eq.items[k].state);
        auto rt = quasipotential_avoiding(cfg.model, eq.items[si].state,
                                          eq.items[sj].state, forbidden,
                                          cfg.mam.rho_avoid, cfg.mam);
        transition_vs_vtilde(cfg, eq, rt.feasible ? rt.value : kInf, rep);
    } else {
        rep.chain_verdict = "inconclusive";
    }
    return rep;
}

void stochastic_stability_check(const ExperimentConfig& cfg, LdpReport& rep) {
    auto eq = find_equilibria(cfg.model);
    double alpha = cfg.model.effective_alpha();
    // disjointness keeps the union mass additive
    bool disjoint = true;
    for (std::size_t a = 0; a < eq.items.size(); ++a)
        for (std::size_t b = a + 1; b < eq.items.size(); ++b)
            if (dist_h(eq.items[a].state, eq.items[b].state, alpha,
                       cfg.model.basis) <= 2.0 * cfg.eta)
                disjoint = false;

    std::vector<BallEvent> events;
    for (const auto& e : eq.items) events.push_back({e.state, cfg.eta});

    rep.stability_eps.clear();
    rep.stability_values.clear();
    for (std::size_t k = 0; k < cfg.eps_list.size(); ++k) {
        double eps = cfg.eps_list[k];
        auto est = estimate_stationary(cfg.model, eps, events, cfg.burn_in,
                                       cfg.t_total, cfg.dt,
                                       cfg.seed + 1013 * (k + 1));
        double total = 0.0;
        for (const auto& e : est) total += e.fraction;
        total = std::min(total, 1.0);
        rep.stability_eps.push_back(eps);
        rep.stability_values.push_back(
            eps * std::log(std::max(total, 1e-300)));
    }
    if (!disjoint) {
        rep.stability_verdict = "inconclusive";
        return;
    }
    // values are <= 0 and should rise to 0 as eps decreases
    double worst = 0.0;
    for (double v : rep.stability_values) worst = std::min(worst, v);
    if (worst > -0.05) {
        rep.stability_verdict = "consistent"; // already indistinguishable from 0
        return;
    }
    auto [slope, se] = fit_slope(rep.stability_eps, rep.stability_values);
    double t = se > 0.0 ? slope / se : (slope < 0.0 ? -1e9 : 1e9);
    // one-sided 95% with n-2 dof (2.92 at n=4)
    rep.stability_verdict = (slope < 0.0 && t < -2.92) ? "consistent"
                                                       : "inconclusive";
}

void transition_vs_vtilde(const ExperimentConfig& cfg,
                          const EquilibriumSet& eq, double vtilde,
                          LdpReport& rep) {
    NeighborhoodSystem ns;
    for (const auto& e : eq.items) ns.centers.push_back(e.state);
    ns.rho1p = cfg.rho1p;
    ns.rho0p = cfg.rho0p;
    ns.rho1 = cfg.rho1;
    ns.rho0 = cfg.rho0;
    ns.rho_star = cfg.rho_star;
    ns.validate(cfg.model.effective_alpha(), cfg.model.basis);

    auto stable = eq.stable_indices();
    int si = stable[cfg.chain_pair_i];
    int sj = stable[cfg.chain_pair_j];
    rep.chain_rows = estimate_transition(cfg.model, ns, cfg.eps_list, si, sj,
                                         cfg.chain_samples, cfg.seed + 7919,
                                         cfg.dt);
    rep.vtilde = std::isfinite(vtilde) ? vtilde : -1.0; // -1: unavailable
    // smallest eps with a direct point estimate
    const TransitionEstimate* chosen = nullptr;
    for (const auto& t : rep.chain_rows)
        if (!t.upper_bound_only && t.hits >= 5) chosen = &t;
    if (!chosen || !std::isfinite(vtilde)) {
        rep.chain_verdict = "inconclusive";
        rep.chain_beta = -1.0;
        return;
    }
    rep.chain_beta = std::abs(chosen->minus_eps_log_p - vtilde);
    rep.chain_verdict =
        rep.chain_beta <= 0.5 * vtilde ? "consistent" : "inconsistent";
}

void emit(const LdpReport& rep, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + out_dir +
                                 ": " + ec.message());
    auto write = [&](const std::string& name, const std::string& content) {
        fs::path p = fs::path(out_dir) / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + p.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + p.string());
    };
    write("report.csv", rep.to_csv());
    write("report.json", rep.to_json().dump(2) + "\n");
}

} // namespace nlw
