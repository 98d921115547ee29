#ifndef NLW_FW_GRAPH_HPP
#define NLW_FW_GRAPH_HPP

#include <vector>

namespace nlw {

// Pairwise quasipotential matrix V(i, j) between the stable equilibria;
// +infinity marks an unreachable pair and saturates all sums.
struct QuasipotentialMatrix {
    std::vector<std::vector<double>> v;

    QuasipotentialMatrix() = default;
    explicit QuasipotentialMatrix(int n);

    int size() const { return static_cast<int>(v.size()); }
    double operator()(int i, int j) const { return v[i][j]; }
    double& at(int i, int j) { return v[i][j]; }
    bool finite_off_diagonal() const;
};

// Shortest-path (Floyd-Warshall) closure: the quasipotential satisfies the
// triangle inequality V(i, j) <= V(i, k) + V(k, j), so relaxing through
// intermediate equilibria can only tighten numerically obtained upper bounds.
void triangle_closure(QuasipotentialMatrix& V);

struct WResult {
    double value = 0.0;
    std::vector<int> chain; // argmin visiting order, ends at the target index
};

// W_l(u_i) minimized over Hamiltonian chains: visiting orders of all l
// states that end at i, cost = sum of V over consecutive hops.  There are
// (l-1)! such chains; l <= 9 enforced.  Ties break lexicographically.
WResult w_chain(const QuasipotentialMatrix& V, int i);
std::vector<double> w_all(const QuasipotentialMatrix& V);

// Classical {i}-graph (in-tree) minimization for cross-checking: every
// node except i has one outgoing edge and all paths lead to i.  l <= 7.
double w_tree(const QuasipotentialMatrix& V, int i);

// Rate function of the stationary measure at a target point, given the
// column v_to[i] = V(u_i, target):
//   rate = min_i (W(i) + v_to[i]) - min_i W(i)
double rate_function(const std::vector<double>& w,
                     const std::vector<double>& v_to);

// same, restricted to the index subset (e.g. stable equilibria only)
double rate_function(const std::vector<double>& w,
                     const std::vector<double>& v_to,
                     const std::vector<int>& indices);

} // namespace nlw

#endif
