#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlw/fw_graph.hpp"
#include "nlw/rng.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace nlw;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// independent recursive enumeration of visiting orders ending at `target`
void brute_rec(const QuasipotentialMatrix& V, int target, std::vector<bool>& used,
               std::vector<int>& order, double& best) {
    int l = V.size();
    if (static_cast<int>(order.size()) == l - 1) {
        double cost = 0.0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k)
            cost += V(order[k], order[k + 1]);
        cost += order.empty() ? 0.0 : V(order.back(), target);
        if (cost < best) best = cost;
        return;
    }
    for (int j = 0; j < l; ++j) {
        if (j == target || used[j]) continue;
        used[j] = true;
        order.push_back(j);
        brute_rec(V, target, used, order, best);
        order.pop_back();
        used[j] = false;
    }
}

double brute_w(const QuasipotentialMatrix& V, int target) {
    if (V.size() == 1) return 0.0;
    std::vector<bool> used(V.size(), false);
    std::vector<int> order;
    double best = kInf;
    brute_rec(V, target, used, order, best);
    return best;
}

QuasipotentialMatrix random_fixture(Philox& rng, int l, bool with_inf) {
    QuasipotentialMatrix V(l);
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
            if (i == j) continue;
            V.at(i, j) = 10.0 * rng.uniform();
            if (with_inf && rng.uniform() < 0.15) V.at(i, j) = kInf;
        }
    return V;
}
} // namespace

TEST_CASE("three-state fixture by hand") {
    QuasipotentialMatrix V(3);
    V.v = {{0, 1, 4}, {2, 0, 1}, {5, 3, 0}};
    auto r0 = w_chain(V, 0);
    CHECK(r0.value == doctest::Approx(5.0));
    CHECK(r0.chain == std::vector<int>{2, 1, 0});
    CHECK(w_chain(V, 1).value == doctest::Approx(6.0));
    CHECK(w_chain(V, 2).value == doctest::Approx(2.0));

    auto w = w_all(V);
    CHECK(rate_function(w, {0.5, 0.7, 0.2}) == doctest::Approx(0.2));
    // the diagonal V(k,k)=0 makes the rate at an equilibrium W_k - min W
    CHECK(rate_function(w, {0.0, kInf, kInf}) == doctest::Approx(3.0));
}

TEST_CASE("exhaustive-oracle equivalence on 100 random fixtures") {
    Philox rng(314);
    for (int fix = 0; fix < 100; ++fix) {
        int l = 2 + static_cast<int>(rng.uniform() * 5.0); // 2..6
        auto V = random_fixture(rng, l, fix % 3 == 0);
        for (int i = 0; i < l; ++i) {
            double mine = w_chain(V, i).value;
            double ref = brute_w(V, i);
            if (std::isinf(ref))
                CHECK(std::isinf(mine));
            else
                CHECK(mine == doctest::Approx(ref).epsilon(1e-14));
        }
    }
}

TEST_CASE("uniform additive shifts move W by (l-1)c and keep the argmin") {
    Philox rng(99);
    for (int fix = 0; fix < 20; ++fix) {
        int l = 3 + static_cast<int>(rng.uniform() * 3.0);
        auto V = random_fixture(rng, l, false);
        double c = 5.0 * rng.uniform();
        QuasipotentialMatrix Vs(l);
        for (int i = 0; i < l; ++i)
            for (int j = 0; j < l; ++j)
                if (i != j) Vs.at(i, j) = V(i, j) + c;
        for (int i = 0; i < l; ++i) {
            auto a = w_chain(V, i);
            auto b = w_chain(Vs, i);
            CHECK(b.value ==
                  doctest::Approx(a.value + (l - 1) * c).epsilon(1e-12));
            CHECK(a.chain == b.chain);
        }
    }
}

TEST_CASE("relabeling equivariance") {
    Philox rng(7);
    auto V = random_fixture(rng, 4, false);
    // swap labels 1 and 3
    std::vector<int> p{0, 3, 2, 1};
    QuasipotentialMatrix Vp(4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) Vp.at(p[i], p[j]) = V(i, j);
    for (int i = 0; i < 4; ++i)
        CHECK(w_chain(Vp, p[i]).value ==
              doctest::Approx(w_chain(V, i).value).epsilon(1e-14));
}

TEST_CASE("rate function: nonnegative, vanishing at the minimum") {
    Philox rng(55);
    for (int fix = 0; fix < 20; ++fix) {
        int l = 2 + static_cast<int>(rng.uniform() * 4.0);
        auto V = random_fixture(rng, l, false);
        auto w = w_all(V);
        // diagonal targets: v_to = column of zeros at k
        double min_rate = kInf;
        for (int k = 0; k < l; ++k) {
            std::vector<double> v_to(l, kInf);
            v_to[k] = 0.0;
            for (int i = 0; i < l; ++i)
                if (i != k) v_to[i] = V(i, k);
            double r = rate_function(w, v_to);
            CHECK(r >= -1e-12);
            min_rate = std::min(min_rate, r);
        }
        CHECK(min_rate == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("in-tree minimum never exceeds the chain minimum") {
    // Hamiltonian chains ending at i are particular {i}-graphs
    Philox rng(123);
    for (int fix = 0; fix < 25; ++fix) {
        int l = 2 + static_cast<int>(rng.uniform() * 4.0); // 2..5
        auto V = random_fixture(rng, l, false);
        for (int i = 0; i < l; ++i) {
            double t = w_tree(V, i);
            double c = w_chain(V, i).value;
            CHECK(t <= c + 1e-12);
        }
    }
    // for l = 2 the two definitions coincide
    auto V2 = random_fixture(rng, 2, false);
    CHECK(w_tree(V2, 0) == doctest::Approx(w_chain(V2, 0).value));
}

TEST_CASE("guards: size limits, index range, saturation") {
    QuasipotentialMatrix big(10);
    CHECK_THROWS(w_chain(big, 0));
    QuasipotentialMatrix V(3);
    CHECK_THROWS(w_chain(V, 3));
    CHECK_THROWS(w_tree(QuasipotentialMatrix(8), 0));

    // an isolated target makes every chain infinite, never NaN
    QuasipotentialMatrix iso(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) iso.at(i, j) = (j == 0) ? kInf : 1.0;
    double w0 = w_chain(iso, 0).value;
    CHECK(std::isinf(w0));
    CHECK_FALSE(std::isnan(w0));
    CHECK_FALSE(iso.finite_off_diagonal());
}

TEST_CASE("triangle closure relaxes through intermediates and is idempotent") {
    QuasipotentialMatrix V(3);
    V.at(0, 1) = 0.8;
    V.at(1, 0) = 0.1;
    V.at(1, 2) = 0.2;
    V.at(2, 1) = 0.9;
    V.at(0, 2) = 3.0; // worse than 0 -> 1 -> 2
    V.at(2, 0) = kInf; // reachable only through 1
    triangle_closure(V);
    CHECK(V(0, 2) == doctest::Approx(1.0));
    CHECK(V(2, 0) == doctest::Approx(1.0));
    CHECK(V(0, 1) == doctest::Approx(0.8));
    auto before = V.v;
    triangle_closure(V);
    CHECK(V.v == before);

    // closure never increases an entry on random fixtures
    Philox rng(99);
    for (int rep = 0; rep < 20; ++rep) {
        auto A = random_fixture(rng, 4, rep % 2 == 0);
        auto B = A;
        triangle_closure(B);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(B(i, j) <= A(i, j) + 1e-12);
    }
}
