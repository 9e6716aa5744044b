#ifndef BKAM_PHASE_SPACE_HPP
#define BKAM_PHASE_SPACE_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "bkam/math_util.hpp"
#include "bkam/smooth.hpp"

namespace bkam {

/// Model chart T^n x B^n. The Poisson structure carried by the chart is
///   (1/c) y_1 d/dphi_1 ^ d/dy_1  +  sum_{i>=2} d/dphi_i ^ d/dy_i,
/// i.e. the singular action/angle pair sits in slot 1 and c is the modular
/// period of the hypersurface {y_1 = 0}. Angles live on the unit torus and
/// frequencies are cycles per unit time.
struct BPhaseSpace {
    int n = 2;         // degrees of freedom, n >= 2
    double c = 1.0;    // modular period
    double r = 1.0;    // action-ball radius

    void validate() const {
        if (n < 2) throw std::invalid_argument("BPhaseSpace: n must be at least 2");
        if (!(c > 0.0)) throw std::invalid_argument("BPhaseSpace: modular period must be positive");
        if (!(r > 0.0)) throw std::invalid_argument("BPhaseSpace: action radius must be positive");
    }

    bool contains(std::span<const double> y) const {
        double s = 0.0;
        for (double v : y) s += v * v;
        return s < r * r;
    }
};

/// Point of the chart; angles are kept reduced to [0,1).
struct State {
    std::vector<double> phi;
    std::vector<double> y;

    State() = default;
    State(std::vector<double> phi_, std::vector<double> y_)
        : phi(std::move(phi_)), y(std::move(y_)) {
        if (phi.size() != y.size()) throw std::invalid_argument("State: phi/y size mismatch");
        wrap();
    }

    int n() const { return int(phi.size()); }
    bool on_Z() const { return y.at(0) == 0.0; }
    void wrap() {
        for (auto& p : phi) p = wrap_unit(p);
    }
};

/// b-function Hamiltonian H = kappa log|y_1| + g(phi, y) with smooth g.
struct BHamiltonian {
    double kappa = 0.0;
    SmoothPtr smooth = std::make_shared<ZeroSmooth>();

    /// H value; -inf on Z when kappa != 0.
    double value(const State& s) const {
        double v = smooth->value(s.phi, s.y);
        if (kappa != 0.0) v += kappa * std::log(std::abs(s.y[0]));
        return v;
    }

    double smooth_value(const State& s) const { return smooth->value(s.phi, s.y); }

    void smooth_gradient(std::span<const double> phi, std::span<const double> y,
                         std::span<double> gphi, std::span<double> gy) const {
        for (auto& v : gphi) v = 0.0;
        for (auto& v : gy) v = 0.0;
        smooth->add_gradient(phi, y, 1.0, gphi, gy);
    }
};

inline void check_in_chart(const BPhaseSpace& space, const State& s) {
    if (s.n() != space.n) throw std::invalid_argument("state dimension does not match chart");
    if (!space.contains(s.y)) throw std::domain_error("state outside the action ball");
}

/// Poisson bracket of two b-functions at a state. The singular pair
/// contributes through the extended derivative y_1 dF/dy_1 = kappa_F +
/// y_1 dg_F/dy_1, which is finite on Z, so the bracket of b-functions of the
/// admitted form is finite everywhere on the chart.
inline double poisson_bracket(const BPhaseSpace& space, const BHamiltonian& F,
                              const BHamiltonian& G, const State& s) {
    space.validate();
    check_in_chart(space, s);
    const int n = space.n;
    std::vector<double> Fp(n), Fy(n), Gp(n), Gy(n);
    F.smooth_gradient(s.phi, s.y, Fp, Fy);
    G.smooth_gradient(s.phi, s.y, Gp, Gy);

    double sum = 0.0;
    for (int i = 1; i < n; ++i) sum += Fp[i] * Gy[i] - Fy[i] * Gp[i];

    const double fhat = F.kappa + s.y[0] * Fy[0];
    const double ghat = G.kappa + s.y[0] * Gy[0];
    sum += (Fp[0] * ghat - fhat * Gp[0]) / space.c;
    return sum;
}

/// Velocity (dphi, dy) of the b-Hamiltonian vector field:
///   dphi_1 = kappa/c + (y_1/c) dg/dy_1,   dphi_i = dg/dy_i   (i >= 2),
///   dy_1   = -(y_1/c) dg/dphi_1,          dy_i   = -dg/dphi_i (i >= 2).
/// Finite on Z for every admitted Hamiltonian.
inline std::vector<double> hamiltonian_vector_field(const BPhaseSpace& space,
                                                    const BHamiltonian& H, const State& s) {
    space.validate();
    check_in_chart(space, s);
    const int n = space.n;
    std::vector<double> gp(n), gy(n);
    H.smooth_gradient(s.phi, s.y, gp, gy);

    std::vector<double> vel(std::size_t(2 * n));
    vel[0] = H.kappa / space.c + (s.y[0] / space.c) * gy[0];
    vel[std::size_t(n)] = -(s.y[0] / space.c) * gp[0];
    for (int i = 1; i < n; ++i) {
        vel[std::size_t(i)] = gy[i];
        vel[std::size_t(n + i)] = -gp[i];
    }
    return vel;
}

}  // namespace bkam

#endif
