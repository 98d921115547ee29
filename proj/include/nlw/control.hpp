#ifndef NLW_CONTROL_HPP
#define NLW_CONTROL_HPP

#include <span>
#include <vector>

namespace nlw {

// Time-gridded modal control, piecewise constant on a uniform grid.
// coeffs[k] holds the modal vector acting on [k*dt, (k+1)*dt).
struct ControlPath {
    double dt = 0.0;
    std::vector<std::vector<double>> coeffs;

    ControlPath() = default;
    ControlPath(double dt_, int n_steps, int n_modes)
        : dt(dt_), coeffs(n_steps, std::vector<double>(n_modes, 0.0)) {}

    double horizon() const { return dt * static_cast<double>(coeffs.size()); }
    int n_steps() const { return static_cast<int>(coeffs.size()); }
    int n_modes() const {
        return coeffs.empty() ? 0 : static_cast<int>(coeffs[0].size());
    }
    bool empty() const { return coeffs.empty(); }

    std::span<const double> at_time(double t) const {
        if (coeffs.empty()) return {};
        auto k = static_cast<std::size_t>(t / dt);
        if (k >= coeffs.size()) k = coeffs.size() - 1;
        return coeffs[k];
    }
    bool finite() const;
};

} // namespace nlw

#endif
