#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlw/model.hpp"
#include "nlw/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace nlw;
using std::numbers::pi;

TEST_CASE("polynomial evaluation and calculus") {
    auto f = Nonlinearity::cubic(2.5); // u^3 - 2.5 u
    CHECK(f.f(2.0) == doctest::Approx(3.0));
    CHECK(f.fprime(2.0) == doctest::Approx(12.0 - 2.5));
    CHECK(f.fsecond(2.0) == doctest::Approx(12.0));
    CHECK(f.primitive(0.0) == 0.0);
    CHECK(f.primitive(2.0) == doctest::Approx(4.0 - 5.0));
    CHECK(f.degree() == 3);
    CHECK(Nonlinearity::zero().degree() == 0);
}

TEST_CASE("growth exponent and dissipativity fits") {
    // f = u^3 - u: |f''| = 6|u| forces rho = 2, outside the strict rho < 2
    // growth restriction; the odd positive leading term still gives nu = 0
    auto r1 = validate_nonlinearity(Nonlinearity::cubic(1.0), 1.0, 0.5);
    CHECK(r1.rho == doctest::Approx(2.0));
    CHECK_FALSE(r1.growth_ok);
    CHECK(r1.dissipativity_ok);
    CHECK(r1.nu == 0.0);
    CHECK_FALSE(r1.note.empty());
    CHECK_FALSE(r1.compliant);

    auto r2 = validate_nonlinearity(Nonlinearity::zero(), 1.0, 0.5);
    CHECK(r2.compliant);
    CHECK(r2.nu == 0.0);

    // f = u^3: F = u^4/4 >= 0 and F - f u <= 0, so C = 0 works
    auto r3 = validate_nonlinearity(
        Nonlinearity::polynomial({0.0, 0.0, 0.0, 1.0}), 1.0, 0.5);
    CHECK(r3.nu == 0.0);
    CHECK(r3.c == doctest::Approx(0.0));
    CHECK(r3.dissipativity_ok);
}

TEST_CASE("config construction and validation hooks") {
    auto cfg = ModelConfig::make(4, 0.5, Nonlinearity::cubic(2.5), {},
                                 NoiseSpec::power_law(4));
    CHECK(cfg.h_modes.size() == 4);
    CHECK(cfg.validation.has_value());
    CHECK(cfg.default_alpha() ==
          doctest::Approx(0.1 * std::min(0.5, 1.0 / 0.5)));
    CHECK(cfg.effective_alpha() == doctest::Approx(cfg.default_alpha()));

    CHECK_THROWS(ModelConfig::make(4, -1.0, Nonlinearity::zero(), {},
                                   NoiseSpec::power_law(4)));
    NoiseSpec bad = NoiseSpec::power_law(4);
    bad.b[2] = 0.0;
    CHECK_THROWS(ModelConfig::make(4, 0.5, Nonlinearity::zero(), {}, bad));
}

TEST_CASE("energy closed forms") {
    auto lin = ModelConfig::make(4, 0.5, Nonlinearity::zero(), {},
                                 NoiseSpec::power_law(4));
    State z(4);
    CHECK(energy(z, lin) == 0.0);

    State s(4);
    s.position[0] = 1.0;
    double alpha = lin.effective_alpha();
    CHECK(energy(s, lin) == doctest::Approx(1.0 + alpha * alpha));

    // single mode through the cubic: 2 int F = 2 (3 a^4 / (8 pi) - kappa a^2 / 2)
    auto cub = ModelConfig::make(4, 0.5, Nonlinearity::cubic(2.5), {},
                                 NoiseSpec::power_law(4));
    double a = 0.7;
    State s2(4);
    s2.position[0] = a;
    double int_f = 3.0 * std::pow(a, 4) / (8.0 * pi) - 2.5 * a * a / 2.0;
    CHECK(energy(s2, cub) ==
          doctest::Approx(a * a + alpha * alpha * a * a + 2.0 * int_f)
              .epsilon(1e-10));
}

TEST_CASE("energy matches a refined quadrature on random states") {
    auto cfg = ModelConfig::make(6, 0.5, Nonlinearity::cubic(2.5), {},
                                 NoiseSpec::power_law(6));
    Philox rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        State s(6);
        for (int j = 0; j < 6; ++j) {
            s.position[j] = 2.0 * rng.uniform() - 1.0;
            s.velocity[j] = 2.0 * rng.uniform() - 1.0;
        }
        const int n_fine = 20000;
        double integral = 0.0;
        for (int i = 0; i <= n_fine; ++i) {
            double x = pi * i / n_fine;
            double u = 0.0;
            for (int j = 0; j < 6; ++j)
                u += s.position[j] * std::sqrt(2.0 / pi) *
                     std::sin((j + 1) * x);
            double w = (i == 0 || i == n_fine) ? 0.5 : 1.0;
            integral += w * cfg.f.primitive(u) * pi / n_fine;
        }
        double expect =
            norm_h_sq(s, cfg.effective_alpha(), cfg.basis) + 2.0 * integral;
        CHECK(energy(s, cfg) == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("energy dominates the phase-space norm up to the fitted constant") {
    auto cfg = ModelConfig::make(6, 0.5, Nonlinearity::cubic(2.5), {},
                                 NoiseSpec::power_law(6));
    const auto& rep = *cfg.validation;
    Philox rng(9);
    for (int k = 0; k < 100; ++k) {
        State s(6);
        for (int j = 0; j < 6; ++j) {
            s.position[j] = 6.0 * (2.0 * rng.uniform() - 1.0);
            s.velocity[j] = 6.0 * (2.0 * rng.uniform() - 1.0);
        }
        double n2 = norm_h_sq(s, cfg.effective_alpha(), cfg.basis);
        CHECK(energy(s, cfg) >= 0.5 * n2 - 2.0 * pi * rep.c - 1e-9);
    }
}

TEST_CASE("energy quadrature overflow is reported") {
    auto cfg = ModelConfig::make(2, 0.5, Nonlinearity::cubic(2.5), {},
                                 NoiseSpec::power_law(2));
    State s(2);
    s.position[0] = 1e100;
    CHECK_THROWS_AS(energy(s, cfg), std::exception);
}
