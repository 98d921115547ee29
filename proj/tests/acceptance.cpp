// Acceptance suite: one pass/fail line per criterion, every tolerance
// pinned in code.  Exit status is the number of failed criteria.
#include "nlw/harness.hpp"
#include "nlw/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace nlw;
using Clock = std::chrono::steady_clock;

namespace {

int n_failed = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int idx, bool pass, const std::string& detail, double secs) {
    std::printf("criterion %2d: %s — %s (%.1f s)\n", idx,
                pass ? "PASS" : "FAIL", detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++n_failed;
}

ModelConfig double_well() {
    return ModelConfig::make(8, 0.5, Nonlinearity::cubic(2.5), {},
                             NoiseSpec::power_law(8, 2.0, 1.5));
}

MamOptions pipeline_mam() {
    MamOptions o;
    o.t_schedule = {30.0, 60.0};
    o.sigma_schedule = {1.0, 0.1, 0.01};
    o.eta_start = 0.2;
    o.eta_min = 0.02;
    o.dt = 0.05;
    o.max_iter = 400;
    o.rho_avoid = 0.2;
    return o;
}

ExperimentConfig pipeline_config() {
    ExperimentConfig cfg;
    cfg.model = double_well();
    cfg.eps_list = {0.30, 0.20, 0.12, 0.08};
    cfg.ball_radius = 0.3;
    cfg.eta = 0.3;
    cfg.burn_in = 100.0;
    cfg.t_total = 100000.0;
    cfg.dt = 0.01;
    cfg.chain_samples = 1000;
    cfg.seed = 2026;
    cfg.mam = pipeline_mam();
    return cfg;
}

std::string fmt2(double a, double b) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.4g vs %.4g", a, b);
    return buf;
}

// ---- criterion 1: linear quasipotential against the Gaussian rate ----
void criterion_1() {
    auto t0 = Clock::now();
    auto cfg = ModelConfig::make(1, 0.5, Nonlinearity::zero(), {},
                                 NoiseSpec::power_law(1));
    State origin(1), target(1);
    target.position[0] = 1.0;
    MamOptions o = pipeline_mam();
    o.t_schedule = {20.0, 40.0};
    o.eta_min = 0.005; // the eta slack biases the quadratic rate downward
    auto r = quasipotential(cfg, origin, target, o);
    const double oracle = 0.5; // gamma lambda a^2 / b^2
    bool pass = r.feasible && std::abs(r.value - oracle) <= 0.05 * oracle;
    report(1, pass, "linear MAM value " + fmt2(r.value, oracle) + ", tol 5%",
           seconds_since(t0));
}

// ---- criterion 2: adjoint gradient vs central finite differences ----
void criterion_2() {
    auto t0 = Clock::now();
    auto cfg = double_well();
    auto eq = find_equilibria(cfg);
    const State* well = nullptr;
    for (const auto& e : eq.items)
        if (e.stability == Stability::stable && e.state.position[0] > 0.0)
            well = &e.state;

    ShootingObjective obj;
    obj.cfg = &cfg;
    obj.u1 = *well;
    obj.target = State(8);
    obj.t_end = 5.0;
    obj.dt = 0.05;
    obj.eta = 0.05;
    obj.sigma = 0.1;
    obj.forbidden = {scaled(*well, 0.5)};
    obj.rho_avoid = 0.4;
    obj.barrier_weight = 10.0;

    const int n_steps = 100;
    Philox rng(424242);
    ControlPath phi(0.05, n_steps, 8);
    for (auto& row : phi.coeffs)
        for (auto& x : row) x = 0.3 * (2.0 * rng.uniform() - 1.0);
    ControlPath grad;
    obj.gradient(phi, grad);

    double worst = 0.0;
    const double h = 1e-6;
    for (int d = 0; d < 20; ++d) {
        ControlPath dir(0.05, n_steps, 8);
        double gdot = 0.0;
        for (int k = 0; k < n_steps; ++k)
            for (int j = 0; j < 8; ++j) {
                dir.coeffs[k][j] = 2.0 * rng.uniform() - 1.0;
                gdot += grad.coeffs[k][j] * dir.coeffs[k][j];
            }
        ControlPath plus = phi, minus = phi;
        for (int k = 0; k < n_steps; ++k)
            for (int j = 0; j < 8; ++j) {
                plus.coeffs[k][j] += h * dir.coeffs[k][j];
                minus.coeffs[k][j] -= h * dir.coeffs[k][j];
            }
        double fd =
            (obj.evaluate(plus).objective - obj.evaluate(minus).objective) /
            (2.0 * h);
        worst = std::max(worst, std::abs(fd - gdot) /
                                    std::max({std::abs(fd), std::abs(gdot),
                                              1e-12}));
    }
    bool pass = worst < 1e-4;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "max rel err %.3g, tol 1e-4", worst);
    report(2, pass, buf, seconds_since(t0));
}

// ---- criterion 3: feedback decay bound and J ~ rho^2 scaling ----
void criterion_3() {
    auto t0 = Clock::now();
    auto cfg = double_well();
    auto eq = find_equilibria(cfg);
    const Equilibrium* well = nullptr;
    for (const auto& e : eq.items)
        if (e.stability == Stability::stable && e.state.position[0] > 0.0)
            well = &e;
    double alpha = cfg.effective_alpha();
    State dir(8);
    dir.position[0] = 1.0;
    dir.position[1] = 0.5;
    double nd = norm_h(dir, alpha, cfg.basis);

    bool decay_all = true;
    std::vector<double> lr, lj;
    for (double rho : {0.4, 0.2, 0.1, 0.05}) {
        State v0 = well->state + scaled(dir, rho / nd);
        auto r = feedback_control(cfg, v0, well->state, rho, rho / 8.0, 0.005);
        decay_all = decay_all && r.decay_ok && r.endpoint_ok;
        lr.push_back(std::log(rho));
        lj.push_back(std::log(r.action));
    }
    auto [slope, se] = fit_slope(lr, lj);
    bool pass = decay_all && std::abs(slope - 2.0) <= 0.2;
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "decay bound (factor 1.05) %s, log-log slope %.3f in 2±0.2",
                  decay_all ? "held" : "violated", slope);
    report(3, pass, buf, seconds_since(t0));
}

// ---- criterion 4: W-graph exact vs brute force, 100 fixtures ----
namespace brute {
void rec(const QuasipotentialMatrix& V, int target, std::vector<bool>& used,
         std::vector<int>& order, double& best) {
    int l = V.size();
    if (static_cast<int>(order.size()) == l - 1) {
        double cost = 0.0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k)
            cost += V(order[k], order[k + 1]);
        cost += order.empty() ? 0.0 : V(order.back(), target);
        best = std::min(best, cost);
        return;
    }
    for (int j = 0; j < l; ++j) {
        if (j == target || used[j]) continue;
        used[j] = true;
        order.push_back(j);
        rec(V, target, used, order, best);
        order.pop_back();
        used[j] = false;
    }
}
double w(const QuasipotentialMatrix& V, int target) {
    if (V.size() == 1) return 0.0;
    std::vector<bool> used(V.size(), false);
    std::vector<int> order;
    double best = std::numeric_limits<double>::infinity();
    rec(V, target, used, order, best);
    return best;
}
} // namespace brute

void criterion_4() {
    auto t0 = Clock::now();
    Philox rng(271828);
    bool pass = true;
    for (int fix = 0; fix < 100 && pass; ++fix) {
        int l = 2 + static_cast<int>(rng.uniform() * 5.0); // 2..6
        QuasipotentialMatrix V(l);
        for (int i = 0; i < l; ++i)
            for (int j = 0; j < l; ++j)
                if (i != j) V.at(i, j) = 10.0 * rng.uniform();
        auto w_mine = w_all(V);
        std::vector<double> w_ref(l);
        for (int i = 0; i < l; ++i) {
            w_ref[i] = brute::w(V, i);
            if (w_mine[i] != w_ref[i]) pass = false;
        }
        // rate_function against exhaustive evaluation of the same formula
        std::vector<double> v_to(l);
        for (int i = 0; i < l; ++i) v_to[i] = rng.uniform();
        double num = std::numeric_limits<double>::infinity();
        double base = num;
        for (int i = 0; i < l; ++i) {
            num = std::min(num, w_ref[i] + v_to[i]);
            base = std::min(base, w_ref[i]);
        }
        if (rate_function(w_mine, v_to) != num - base) pass = false;
    }
    double secs = seconds_since(t0);
    bool in_time = secs < 10.0;
    report(4, pass && in_time,
           std::string("100 fixtures, l <= 6, exact equality") +
               (in_time ? "" : "; OVER the 10 s budget"),
           secs);
}

// ---- criterion 5: stationary Gaussian occupation, one 1e7-step path ----
void criterion_5() {
    auto t0 = Clock::now();
    auto cfg = ModelConfig::make(1, 0.5, Nonlinearity::zero(), {},
                                 NoiseSpec::power_law(1));
    double eps = 0.25, alpha = cfg.effective_alpha();
    double var = eps / (2.0 * 0.5);
    auto gauss_mass = [&](double r) {
        const int ng = 800;
        double lim = 6.0 * std::sqrt(var), acc = 0.0;
        double h = 2.0 * lim / ng;
        for (int i = 0; i < ng; ++i)
            for (int k = 0; k < ng; ++k) {
                double a = -lim + (i + 0.5) * h;
                double v = -lim + (k + 0.5) * h;
                if (a * a + (v + alpha * a) * (v + alpha * a) < r * r)
                    acc += std::exp(-(a * a + v * v) / (2.0 * var)) * h * h;
            }
        return acc / (2.0 * std::numbers::pi * var);
    };
    const double dt = 0.05, burn = 50.0;
    const double t_total = burn + 1e7 * dt; // exactly 1e7 measured steps
    std::vector<BallEvent> balls{{State(1), 0.3}, {State(1), 0.6},
                                 {State(1), 1.0}};
    auto est = estimate_stationary(cfg, eps, balls, burn, t_total, dt, 31415);
    bool pass = true;
    std::ostringstream detail;
    for (std::size_t k = 0; k < balls.size(); ++k) {
        double oracle = gauss_mass(balls[k].radius);
        bool ok = std::abs(est[k].fraction - oracle) <= est[k].ci_halfwidth;
        pass = pass && ok;
        detail << (k ? ", " : "") << "r=" << balls[k].radius << ": "
               << fmt2(est[k].fraction, oracle)
               << " (ci " << est[k].ci_halfwidth << ")";
    }
    report(5, pass, detail.str(), seconds_since(t0));
}

// ---- criteria 6-8 share the double-well pipeline ----
void criteria_6_7_8(const LdpReport& rep, const ExperimentConfig& cfg,
                    double t6, double t78) {
    // 6: slope of ln mu(ball at the origin) vs -1/eps within 30% of V(0)
    int origin_ball = -1;
    for (std::size_t b = 0; b < rep.v_values.size(); ++b)
        if (rep.v_values[b] > 1e-6) origin_ball = static_cast<int>(b);
    bool pass6 = false;
    std::string det6 = "no ball with positive rate found";
    if (origin_ball >= 0) {
        double v = rep.v_values[origin_ball];
        double slope = rep.slopes[origin_ball];
        pass6 = rep.verdicts[origin_ball] == "consistent" &&
                std::abs(slope - v) <= 0.3 * v;
        // the v = 0 reference balls expose the finite-eps prefactor drift
        // that biases every fixed-radius ball slope downward at these eps
        std::ostringstream drift;
        for (std::size_t b = 0; b < rep.v_values.size(); ++b)
            if (rep.v_values[b] <= 1e-6)
                drift << " " << std::setprecision(3) << rep.slopes[b];
        det6 = "slope " + fmt2(slope, v) + " (rate), tol 30%, verdict " +
               rep.verdicts[origin_ball] + "; v=0 ball drift:" + drift.str();
    }
    report(6, pass6, det6, t6);

    // 7: eps ln mu(E_eta) trends to zero
    std::ostringstream d7;
    d7 << "eps*ln mu(E_eta) =";
    for (double v : rep.stability_values) d7 << " " << v;
    d7 << ", verdict " << rep.stability_verdict;
    report(7, rep.stability_verdict == "consistent", d7.str(), t78 * 0.5);

    // 8: chain transition sandwich with beta <= 0.5 Vtilde
    bool pass8 = rep.chain_verdict == "consistent" &&
                 rep.chain_beta <= 0.5 * rep.vtilde;
    std::ostringstream d8;
    d8 << "-eps ln P " << "vs Vtilde " << rep.vtilde << ", implied beta "
       << rep.chain_beta << " (cap " << 0.5 * rep.vtilde << "), verdict "
       << rep.chain_verdict;
    report(8, pass8, d8.str(), t78 * 0.5);
}

// ---- criterion 9: exponential moment boundedness ----
void criterion_9() {
    auto t0 = Clock::now();
    auto cfg = double_well();
    auto eq = find_equilibria(cfg);
    const State* well = nullptr;
    for (const auto& e : eq.items)
        if (e.stability == Stability::stable) well = &e.state;
    double eps = 0.3;
    double cap = cfg.effective_alpha() / (2.0 * eps * cfg.noise.b_total_sq());
    auto s = exponential_moment_check(cfg, *well, eps, 0.5 * cap, 300.0, 6,
                                      0.02, 97);
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "kappa %.4g (half the admissible %.4g), trend t-stat %.2f "
                  "< 1.645%s",
                  s.kappa_used, cap, s.trend_tstat,
                  s.kappa_reduced ? ", kappa auto-reduced" : "");
    report(9, s.bounded, buf, seconds_since(t0));
}

// ---- criterion 10: byte-for-byte determinism of emitted artifacts ----
void criterion_10() {
    auto t0 = Clock::now();
    auto cfg = pipeline_config();
    // reduced budget: determinism does not need long paths
    cfg.eps_list = {0.30, 0.20};
    cfg.t_total = 400.0;
    cfg.chain_samples = 50;
    namespace fs = std::filesystem;
    auto tmp = fs::temp_directory_path();
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    auto d1 = tmp / "nlw_acc_det1", d2 = tmp / "nlw_acc_det2";
    emit(ldp_verify(cfg), d1.string());
    emit(ldp_verify(cfg), d2.string());
    bool same_csv = slurp(d1 / "report.csv") == slurp(d2 / "report.csv");
    bool same_json = slurp(d1 / "report.json") == slurp(d2 / "report.json");
    bool nonempty = !slurp(d1 / "report.csv").empty();
    fs::remove_all(d1);
    fs::remove_all(d2);
    report(10, same_csv && same_json && nonempty,
           std::string("repeat pipeline run: csv ") +
               (same_csv ? "identical" : "differs") + ", json " +
               (same_json ? "identical" : "differs"),
           seconds_since(t0));
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();

    auto cfg = pipeline_config();
    auto t0 = Clock::now();
    auto rep = ldp_verify(cfg);
    double t_pipeline = seconds_since(t0);
    criteria_6_7_8(rep, cfg, t_pipeline, t_pipeline);

    criterion_9();
    criterion_10();

    std::printf("%d of 10 criteria passed\n", 10 - n_failed);
    return n_failed;
}
