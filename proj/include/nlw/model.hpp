#ifndef NLW_MODEL_HPP
#define NLW_MODEL_HPP

#include "nlw/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nlw {

// Polynomial nonlinearity f(u) = sum_k coeffs[k] u^k with closed-form
// derivatives and the primitive F normalized by F(0) = 0.
struct Nonlinearity {
    std::vector<double> coeffs; // ascending powers, constant term first

    static Nonlinearity zero();
    static Nonlinearity cubic(double kappa); // u^3 - kappa*u
    static Nonlinearity polynomial(std::vector<double> coeffs);

    int degree() const;
    double f(double u) const;
    double fprime(double u) const;
    double fsecond(double u) const;
    double primitive(double u) const; // F with F(0)=0

    std::vector<double> fprime_coeffs() const;
    std::vector<double> primitive_coeffs() const;
};

struct NonlinearityReport {
    double rho = 0.0;      // minimal growth exponent for |f''|
    double nu = 0.0;       // fitted dissipativity constant
    double c = 0.0;        // fitted additive constant
    bool growth_ok = false;        // rho < 2
    bool dissipativity_ok = false; // nu <= (lambda_1 ^ gamma)/8
    bool compliant = false;
    std::string note;
};

NonlinearityReport validate_nonlinearity(const Nonlinearity& f, double lambda1,
                                         double gamma);

struct ModelConfig {
    double gamma = 0.5;
    double alpha = 0.0; // 0 means "use default_alpha()"
    Nonlinearity f;
    std::vector<double> h_modes;
    SpectralBasis basis;
    NoiseSpec noise;
    std::optional<NonlinearityReport> validation;

    // 0.1 * min(gamma, lambda_1/gamma); keeps the damped norm equivalent
    // to the natural one
    double default_alpha() const;
    double effective_alpha() const { return alpha > 0.0 ? alpha : default_alpha(); }

    void validate(); // fills `validation`

    static ModelConfig make(int n_modes, double gamma, Nonlinearity f,
                            std::vector<double> h_modes, NoiseSpec noise,
                            double alpha = 0.0);
};

// |u|_H^2 + 2 int F(u_1) dx via collocation quadrature
double energy(const State& s, const ModelConfig& cfg);

} // namespace nlw

#endif
