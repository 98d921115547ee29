#include "nlw/spectral.hpp"

#include "nlw/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nlw {

SpectralBasis SpectralBasis::make(int n_modes, double length, int n_sub) {
    if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
    if (length <= 0.0) throw std::invalid_argument("length must be positive");
    if (n_sub == 0) n_sub = 2 * n_modes + 2; // 4*n_modes < 2*n_sub
    if (2 * n_sub <= 4 * n_modes)
        throw std::invalid_argument("quadrature grid too coarse for cubic terms");

    SpectralBasis b;
    b.n_modes_ = n_modes;
    b.length_ = length;
    b.eigenvalues_.resize(n_modes);
    for (int j = 0; j < n_modes; ++j) {
        double k = (j + 1) * std::numbers::pi / length;
        b.eigenvalues_[j] = k * k;
    }
    int m = n_sub - 1; // interior trapezoid nodes, endpoints vanish
    b.nodes_.resize(m);
    b.weight_ = length / n_sub;
    for (int i = 0; i < m; ++i) b.nodes_[i] = (i + 1) * length / n_sub;

    double amp = std::sqrt(2.0 / length);
    b.mode_table_.resize(static_cast<std::size_t>(n_modes) * m);
    b.mode_table_w_.resize(b.mode_table_.size());
    for (int j = 0; j < n_modes; ++j)
        for (int i = 0; i < m; ++i) {
            double e = amp * std::sin((j + 1) * std::numbers::pi * b.nodes_[i] / length);
            b.mode_table_[j * m + i] = e;
            b.mode_table_w_[j * m + i] = e * b.weight_;
        }
    return b;
}

void SpectralBasis::to_physical(std::span<const double> modal,
                                std::span<double> grid) const {
    if (static_cast<int>(modal.size()) > n_modes_)
        throw std::invalid_argument("modal vector longer than basis");
    if (static_cast<int>(grid.size()) != n_nodes())
        throw std::invalid_argument("grid size mismatch");
    const auto& k = kernels::active();
    int m = n_nodes();
    for (auto& g : grid) g = 0.0;
    for (std::size_t j = 0; j < modal.size(); ++j)
        k.axpy(modal[j], mode_table_.data() + j * m, grid.data(), m);
}

void SpectralBasis::from_physical(std::span<const double> grid,
                                  std::span<double> modal) const {
    if (static_cast<int>(grid.size()) != n_nodes())
        throw std::invalid_argument("grid size mismatch");
    if (static_cast<int>(modal.size()) != n_modes_)
        throw std::invalid_argument("modal size mismatch");
    kernels::active().matvec(mode_table_w_.data(), grid.data(), modal.data(),
                             n_modes_, n_nodes());
}

std::vector<double> SpectralBasis::to_physical(std::span<const double> modal) const {
    std::vector<double> g(n_nodes());
    to_physical(modal, g);
    return g;
}

std::vector<double> SpectralBasis::from_physical(std::span<const double> grid) const {
    std::vector<double> v(n_modes_);
    from_physical(grid, v);
    return v;
}

std::vector<double> SpectralBasis::project_pn(std::span<const double> modal,
                                              int n) const {
    if (n < 1 || n > n_modes_) throw std::out_of_range("projection level out of range");
    std::vector<double> out(modal.begin(), modal.end());
    for (std::size_t j = n; j < out.size(); ++j) out[j] = 0.0;
    return out;
}

bool State::finite() const {
    for (double x : position)
        if (!std::isfinite(x)) return false;
    for (double x : velocity)
        if (!std::isfinite(x)) return false;
    return true;
}

State operator-(const State& a, const State& b) {
    State r(a.size());
    for (int i = 0; i < a.size(); ++i) {
        r.position[i] = a.position[i] - b.position[i];
        r.velocity[i] = a.velocity[i] - b.velocity[i];
    }
    return r;
}

State operator+(const State& a, const State& b) {
    State r(a.size());
    for (int i = 0; i < a.size(); ++i) {
        r.position[i] = a.position[i] + b.position[i];
        r.velocity[i] = a.velocity[i] + b.velocity[i];
    }
    return r;
}

State scaled(const State& s, double c) {
    State r(s.size());
    for (int i = 0; i < s.size(); ++i) {
        r.position[i] = c * s.position[i];
        r.velocity[i] = c * s.velocity[i];
    }
    return r;
}

NoiseSpec NoiseSpec::power_law(int n_modes, double p, double scale) {
    NoiseSpec n;
    n.b.resize(n_modes);
    for (int j = 0; j < n_modes; ++j)
        n.b[j] = scale * std::pow(static_cast<double>(j + 1), -p);
    n.law = "b_j = " + std::to_string(scale) + " * j^(-" + std::to_string(p) + ")";
    return n;
}

std::vector<double> NoiseSpec::b1_partial_sums(const SpectralBasis& basis) const {
    std::vector<double> s(b.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
        acc += basis.eigenvalue(static_cast<int>(j)) * b[j] * b[j];
        s[j] = acc;
    }
    return s;
}

bool NoiseSpec::b1_tail_converged(const SpectralBasis& basis, double tol) const {
    auto s = b1_partial_sums(basis);
    if (s.size() < 2) return true;
    std::size_t half = s.size() / 2;
    return s.back() - s[half - 1] < tol * (1.0 + s.back());
}

double NoiseSpec::b_total_sq() const {
    double acc = 0.0;
    for (double x : b) acc += x * x;
    return acc;
}

double norm_h_sq(const State& s, double alpha, const SpectralBasis& basis) {
    if (!s.finite()) throw std::invalid_argument("state has non-finite entries");
    const auto& k = kernels::active();
    int n = s.size();
    double grad = k.weighted_sq_sum(basis.eigenvalues().data(),
                                    s.position.data(), n);
    double shift = 0.0;
    for (int j = 0; j < n; ++j) {
        double t = s.velocity[j] + alpha * s.position[j];
        shift += t * t;
    }
    return grad + shift;
}

double norm_h(const State& s, double alpha, const SpectralBasis& basis) {
    return std::sqrt(norm_h_sq(s, alpha, basis));
}

double dist_h(const State& a, const State& b, double alpha,
              const SpectralBasis& basis) {
    return norm_h(a - b, alpha, basis);
}

double norm_htheta(std::span<const double> v, const NoiseSpec& noise) {
    if (v.size() > noise.b.size())
        throw std::invalid_argument("vector longer than noise spec");
    double acc = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        double w = v[j] / noise.b[j];
        acc += w * w;
    }
    return std::sqrt(acc);
}

} // namespace nlw
