#include "nlw/fw_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nlw {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

QuasipotentialMatrix::QuasipotentialMatrix(int n)
    : v(n, std::vector<double>(n, 0.0)) {}

bool QuasipotentialMatrix::finite_off_diagonal() const {
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < size(); ++j)
            if (i != j && !std::isfinite(v[i][j])) return false;
    return true;
}

void triangle_closure(QuasipotentialMatrix& V) {
    int l = V.size();
    for (int k = 0; k < l; ++k)
        for (int i = 0; i < l; ++i)
            for (int j = 0; j < l; ++j)
                if (i != j)
                    V.at(i, j) = std::min(V(i, j), V(i, k) + V(k, j));
}

WResult w_chain(const QuasipotentialMatrix& V, int i) {
    int l = V.size();
    if (l > 9) throw std::invalid_argument("chain enumeration limited to l <= 9");
    if (i < 0 || i >= l) throw std::out_of_range("target index");
    WResult res;
    if (l == 1) {
        res.chain = {i};
        return res;
    }
    std::vector<int> others;
    for (int j = 0; j < l; ++j)
        if (j != i) others.push_back(j);
    // others is sorted, so std::next_permutation walks all (l-1)! orders
    // in lexicographic order; strict improvement keeps the first minimizer
    res.value = kInf;
    do {
        double cost = 0.0;
        for (std::size_t k = 0; k + 1 < others.size(); ++k)
            cost += V(others[k], others[k + 1]);
        cost += V(others.back(), i);
        if (cost < res.value) {
            res.value = cost;
            res.chain = others;
            res.chain.push_back(i);
        }
    } while (std::next_permutation(others.begin(), others.end()));
    return res;
}

std::vector<double> w_all(const QuasipotentialMatrix& V) {
    std::vector<double> w(V.size());
    for (int i = 0; i < V.size(); ++i) w[i] = w_chain(V, i).value;
    return w;
}

double w_tree(const QuasipotentialMatrix& V, int i) {
    int l = V.size();
    if (l > 7) throw std::invalid_argument("tree enumeration limited to l <= 7");
    if (l == 1) return 0.0;
    std::vector<int> others;
    for (int j = 0; j < l; ++j)
        if (j != i) others.push_back(j);
    int m = static_cast<int>(others.size());
    // parent choice per non-root node, l-1 options each (any other node)
    std::vector<int> choice(m, 0);
    std::vector<int> parent(l, -1);
    double best = kInf;
    while (true) {
        for (int k = 0; k < m; ++k) {
            int node = others[k];
            int c = choice[k];
            parent[node] = c < node ? c : c + 1; // skip the self-loop
        }
        bool valid = true;
        double cost = 0.0;
        for (int k = 0; k < m && valid; ++k) {
            int node = others[k];
            // follow parents; must reach i within l hops (no cycles)
            int cur = node, hops = 0;
            while (cur != i && hops <= l) {
                cur = parent[cur];
                ++hops;
            }
            if (cur != i) valid = false;
            cost += V(node, parent[node]);
        }
        if (valid) best = std::min(best, cost);
        int k = 0;
        while (k < m && ++choice[k] == l - 1) choice[k++] = 0;
        if (k == m) break;
    }
    return best;
}

double rate_function(const std::vector<double>& w,
                     const std::vector<double>& v_to) {
    std::vector<int> all(w.size());
    std::iota(all.begin(), all.end(), 0);
    return rate_function(w, v_to, all);
}

double rate_function(const std::vector<double>& w,
                     const std::vector<double>& v_to,
                     const std::vector<int>& indices) {
    if (w.size() != v_to.size())
        throw std::invalid_argument("w and v_to must have equal length");
    double num = kInf, base = kInf;
    for (int i : indices) {
        num = std::min(num, w[i] + v_to[i]);
        base = std::min(base, w[i]);
    }
    return num - base;
}

} // namespace nlw
