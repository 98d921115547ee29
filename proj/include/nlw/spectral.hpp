#ifndef NLW_SPECTRAL_HPP
#define NLW_SPECTRAL_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nlw {

// Sine eigenbasis of the Dirichlet Laplacian on (0, L) with a trapezoid
// collocation grid.  With n_sub subintervals the rule integrates products
// of up to four basis functions exactly as long as 4*n_modes < 2*n_sub,
// which covers the cubic nonlinearity without aliasing.
class SpectralBasis {
  public:
    static SpectralBasis make(int n_modes, double length, int n_sub = 0);

    int n_modes() const { return n_modes_; }
    double length() const { return length_; }
    int n_nodes() const { return static_cast<int>(nodes_.size()); }

    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    double eigenvalue(int j) const { return eigenvalues_[j]; } // j is 0-based
    const std::vector<double>& nodes() const { return nodes_; }
    double weight() const { return weight_; }

    // e_j sampled on the grid, row-major [n_modes][n_nodes]
    const std::vector<double>& mode_table() const { return mode_table_; }

    std::vector<double> to_physical(std::span<const double> modal) const;
    std::vector<double> from_physical(std::span<const double> grid) const;
    void to_physical(std::span<const double> modal, std::span<double> grid) const;
    void from_physical(std::span<const double> grid, std::span<double> modal) const;

    // zero all coefficients with index > n (n is 1-based, 1 <= n <= n_modes)
    std::vector<double> project_pn(std::span<const double> modal, int n) const;

  private:
    int n_modes_ = 0;
    double length_ = 0.0;
    std::vector<double> eigenvalues_;
    std::vector<double> nodes_;
    double weight_ = 0.0;
    std::vector<double> mode_table_;
    std::vector<double> mode_table_w_; // e_j(x_m) * w, used by from_physical
};

// A point [u, du/dt] in the phase space, stored as modal coefficients.
struct State {
    std::vector<double> position;
    std::vector<double> velocity;

    State() = default;
    explicit State(int n) : position(n, 0.0), velocity(n, 0.0) {}
    int size() const { return static_cast<int>(position.size()); }
    bool finite() const;
};

State operator-(const State& a, const State& b);
State operator+(const State& a, const State& b);
State scaled(const State& s, double c);

// Diagonal noise coefficients b_j > 0.
struct NoiseSpec {
    std::vector<double> b;
    std::string law;

    // b_j = scale * j^(-p)
    static NoiseSpec power_law(int n_modes, double p = 2.0, double scale = 1.0);

    // partial sums of lambda_j b_j^2; the caller checks the tail
    std::vector<double> b1_partial_sums(const SpectralBasis& basis) const;
    bool b1_tail_converged(const SpectralBasis& basis, double tol = 1e-6) const;
    double b_total_sq() const; // sum of b_j^2
};

// |u|_H with the damped norm: (sum lambda_j a_j^2 + sum (v_j + alpha a_j)^2)^1/2
double norm_h_sq(const State& s, double alpha, const SpectralBasis& basis);
double norm_h(const State& s, double alpha, const SpectralBasis& basis);
double dist_h(const State& a, const State& b, double alpha,
              const SpectralBasis& basis);

// (sum_j b_j^-2 v_j^2)^1/2
double norm_htheta(std::span<const double> v, const NoiseSpec& noise);

} // namespace nlw

#endif
