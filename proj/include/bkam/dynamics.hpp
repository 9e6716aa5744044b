#ifndef BKAM_DYNAMICS_HPP
#define BKAM_DYNAMICS_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bkam/ode.hpp"
#include "bkam/phase_space.hpp"

namespace bkam {

enum class IntegratorMethod { adaptive_rk853, splitting };

struct IntegratorConfig {
    IntegratorMethod method = IntegratorMethod::adaptive_rk853;
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double max_step = 0.0;         // adaptive: step cap (0 = none); splitting: the fixed step
    bool multiplicative_y1 = true;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw std::invalid_argument("IntegratorConfig: tolerances must be positive");
        if (max_step < 0.0) throw std::invalid_argument("IntegratorConfig: negative max_step");
        if (method == IntegratorMethod::splitting && !(max_step > 0.0))
            throw std::invalid_argument("IntegratorConfig: splitting needs a positive step");
    }
};

/// Trajectory left the action ball; carries the escape time.
struct EscapeError : std::runtime_error {
    explicit EscapeError(double t)
        : std::runtime_error("trajectory escaped the chart at t = " + std::to_string(t)),
          t_escape(t) {}
    double t_escape;
};

struct StepUnderflowError : std::runtime_error {
    explicit StepUnderflowError(double t)
        : std::runtime_error("step size underflow at t = " + std::to_string(t)) {}
};

struct DriftRecord {
    std::optional<double> max_energy_drift;  // absent for motion on Z
    double max_action_drift = 0.0;
    double max_multiplicative_defect = 0.0;  // |y_1 - y_1(0) exp(w)| accumulated in the log variable
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    DriftRecord drift;
    IntegratorConfig config;
    OdeStats stats;
};

namespace detail {

/// Integration state for the chart flow. With the multiplicative option the
/// singular action is carried as y_1 = y10 * exp(w) and w is integrated in
/// its place, which preserves Z and sign(y_1) exactly.
class ChartFlow {
public:
    ChartFlow(const BPhaseSpace& space, const BHamiltonian& H, const State& s0,
              const IntegratorConfig& cfg)
        : space_(space), H_(H), cfg_(cfg), n_(space.n), y10_(s0.y[0]) {
        space_.validate();
        cfg_.validate();
        check_in_chart(space_, s0);
        z_.assign(std::size_t(2 * n_), 0.0);
        for (int i = 0; i < n_; ++i) z_[std::size_t(i)] = s0.phi[std::size_t(i)];
        if (cfg_.multiplicative_y1) {
            z_[std::size_t(n_)] = 0.0;  // w
            for (int i = 1; i < n_; ++i) z_[std::size_t(n_ + i)] = s0.y[std::size_t(i)];
        } else {
            for (int i = 0; i < n_; ++i) z_[std::size_t(n_ + i)] = s0.y[std::size_t(i)];
        }

        OdeConfig ocfg;
        ocfg.abs_tol = cfg_.abs_tol;
        ocfg.rel_tol = cfg_.rel_tol;
        ocfg.max_step = cfg_.max_step;
        stepper_.emplace(
            [this](double t, const double* z, double* dz) { rhs(t, z, dz); }, z_.size(), ocfg);
        stepper_->start(0.0, z_);
    }

    void advance_to(double t) {
        escaped_ = false;
        auto status = stepper_->advance_to(t, [this](double tt, std::span<const double> zz) {
            if (!inside(zz)) {
                escape_time_ = tt;
                escaped_ = true;
                return false;
            }
            return true;
        });
        if (escaped_ || status == OdeStatus::halted) throw EscapeError(escape_time_);
        if (status == OdeStatus::step_underflow) throw StepUnderflowError(stepper_->t());
        if (status == OdeStatus::too_many_steps)
            throw std::runtime_error("integration exceeded the step budget");
    }

    State state() const {
        auto z = stepper_->y();
        State s;
        s.phi.resize(std::size_t(n_));
        s.y.resize(std::size_t(n_));
        for (int i = 0; i < n_; ++i) s.phi[std::size_t(i)] = wrap_unit(z[std::size_t(i)]);
        if (cfg_.multiplicative_y1) {
            s.y[0] = y10_ * std::exp(z[std::size_t(n_)]);
            for (int i = 1; i < n_; ++i) s.y[std::size_t(i)] = z[std::size_t(n_ + i)];
        } else {
            for (int i = 0; i < n_; ++i) s.y[std::size_t(i)] = z[std::size_t(n_ + i)];
        }
        return s;
    }

    const OdeStats& stats() const { return stepper_->stats(); }

private:
    void rhs(double, const double* z, double* dz) const {
        const int n = n_;
        const double* phi = z;
        thread_local std::vector<double> y, gp, gy;
        y.assign(std::size_t(n), 0.0);
        gp.assign(std::size_t(n), 0.0);
        gy.assign(std::size_t(n), 0.0);
        if (cfg_.multiplicative_y1) {
            y[0] = y10_ * std::exp(z[n]);
            for (int i = 1; i < n; ++i) y[std::size_t(i)] = z[n + i];
        } else {
            for (int i = 0; i < n; ++i) y[std::size_t(i)] = z[n + i];
        }
        H_.smooth->add_gradient(std::span<const double>(phi, std::size_t(n)), y, 1.0, gp, gy);

        dz[0] = H_.kappa / space_.c + (y[0] / space_.c) * gy[0];
        for (int i = 1; i < n; ++i) dz[i] = gy[std::size_t(i)];
        if (cfg_.multiplicative_y1) {
            dz[n] = -gp[0] / space_.c;  // d/dt log-factor
        } else {
            dz[n] = -(y[0] / space_.c) * gp[0];
        }
        for (int i = 1; i < n; ++i) dz[n + i] = -gp[std::size_t(i)];
    }

    bool inside(std::span<const double> z) const {
        double s = 0.0;
        if (cfg_.multiplicative_y1) {
            const double w = z[std::size_t(n_)];
            if (w > 690.0) return false;  // exp overflow guard; implies |y1| huge anyway
            const double y1 = y10_ * std::exp(w);
            s += y1 * y1;
            for (int i = 1; i < n_; ++i) s += z[std::size_t(n_ + i)] * z[std::size_t(n_ + i)];
        } else {
            for (int i = 0; i < n_; ++i) s += z[std::size_t(n_ + i)] * z[std::size_t(n_ + i)];
        }
        return s < space_.r * space_.r;
    }

    BPhaseSpace space_;
    BHamiltonian H_;
    IntegratorConfig cfg_;
    int n_;
    double y10_;
    std::vector<double> z_;
    std::optional<Dop853> stepper_;
    bool escaped_ = false;
    double escape_time_ = 0.0;
};

/// Strang splitting for H = kappa log|y1| + A(y) + V(phi). Both partial
/// flows are exact: the drift advances angles linearly, the kick moves
/// actions with frozen angles (multiplicatively in y_1).
class SplittingFlow {
public:
    SplittingFlow(const BPhaseSpace& space, const BHamiltonian& H, const State& s0,
                  const IntegratorConfig& cfg)
        : space_(space), cfg_(cfg), n_(space.n), kappa_(H.kappa) {
        space_.validate();
        cfg_.validate();
        check_in_chart(space_, s0);
        sep_ = std::dynamic_pointer_cast<const SeparableSmooth>(H.smooth);
        if (!sep_)
            throw std::invalid_argument(
                "splitting integrator requires a separable smooth part h(y) + V(phi)");
        phi_.assign(s0.phi.begin(), s0.phi.end());
        y_.assign(s0.y.begin(), s0.y.end());
    }

    void advance_to(double t) {
        const double dt = t - t_;
        if (dt == 0.0) return;
        const long nsub = std::max<long>(1, std::lround(std::abs(dt) / cfg_.max_step));
        const double h = dt / double(nsub);
        for (long s = 0; s < nsub; ++s) {
            drift(0.5 * h);
            kick(h);
            drift(0.5 * h);
            ++steps_;
            double norm = 0.0;
            for (double v : y_) norm += v * v;
            if (!(norm < space_.r * space_.r)) throw EscapeError(t_ + h * double(s + 1));
        }
        t_ = t;
    }

    State state() const {
        State s;
        s.phi.resize(std::size_t(n_));
        for (int i = 0; i < n_; ++i) s.phi[std::size_t(i)] = wrap_unit(phi_[std::size_t(i)]);
        s.y = y_;
        return s;
    }

    OdeStats stats() const {
        OdeStats st;
        st.steps = st.accepted = steps_;
        return st;
    }

private:
    void drift(double h) {
        thread_local std::vector<double> gy;
        gy.assign(std::size_t(n_), 0.0);
        sep_->drift_part().add_gradient(y_, 1.0, gy);
        phi_[0] += h * (kappa_ / space_.c + (y_[0] / space_.c) * gy[0]);
        for (int i = 1; i < n_; ++i) phi_[std::size_t(i)] += h * gy[std::size_t(i)];
    }

    void kick(double h) {
        thread_local std::vector<double> gp, gy;
        gp.assign(std::size_t(n_), 0.0);
        gy.assign(std::size_t(n_), 0.0);
        sep_->kick_part().add_gradient(phi_, y_, 1.0, gp, gy);
        y_[0] *= std::exp(-(h / space_.c) * gp[0]);
        for (int i = 1; i < n_; ++i) y_[std::size_t(i)] -= h * gp[std::size_t(i)];
    }

    BPhaseSpace space_;
    IntegratorConfig cfg_;
    int n_;
    double kappa_;
    std::shared_ptr<const SeparableSmooth> sep_;
    std::vector<double> phi_, y_;
    double t_ = 0.0;
    long steps_ = 0;
};

}  // namespace detail

/// Time-t flow of the b-Hamiltonian vector field of H from s0.
inline State flow(const BPhaseSpace& space, const BHamiltonian& H, const State& s0, double t,
                  const IntegratorConfig& cfg = {}) {
    if (!std::isfinite(t)) throw std::invalid_argument("flow: non-finite time");
    if (t == 0.0) return s0;
    if (cfg.method == IntegratorMethod::splitting) {
        detail::SplittingFlow f(space, H, s0, cfg);
        f.advance_to(t);
        return f.state();
    }
    detail::ChartFlow f(space, H, s0, cfg);
    f.advance_to(t);
    return f.state();
}

/// Uniformly sampled trajectory on [0, t_final] with spacing dt_out.
inline Trajectory sample_trajectory(const BPhaseSpace& space, const BHamiltonian& H,
                                    const State& s0, double t_final, double dt_out,
                                    const IntegratorConfig& cfg = {}) {
    if (!(dt_out > 0.0)) throw std::invalid_argument("sample_trajectory: dt_out must be positive");
    if (!(t_final >= 0.0) || !std::isfinite(t_final))
        throw std::invalid_argument("sample_trajectory: bad t_final");

    const long nsamp = long(std::floor(t_final / dt_out + 1e-9)) + 1;
    Trajectory traj;
    traj.config = cfg;
    traj.times.reserve(std::size_t(nsamp));
    traj.states.reserve(std::size_t(nsamp));

    const bool split = cfg.method == IntegratorMethod::splitting;
    std::optional<detail::ChartFlow> af;
    std::optional<detail::SplittingFlow> sf;
    if (split)
        sf.emplace(space, H, s0, cfg);
    else
        af.emplace(space, H, s0, cfg);

    const double h0 = H.value(s0);
    for (long k = 0; k < nsamp; ++k) {
        const double t = double(k) * dt_out;
        if (k > 0) {
            if (split)
                sf->advance_to(t);
            else
                af->advance_to(t);
        }
        State s = split ? sf->state() : af->state();
        traj.times.push_back(t);

        double adrift = 0.0;
        for (int i = 0; i < space.n; ++i)
            adrift = std::max(adrift, std::abs(s.y[std::size_t(i)] - s0.y[std::size_t(i)]));
        traj.drift.max_action_drift = std::max(traj.drift.max_action_drift, adrift);
        if (s.y[0] != 0.0 && std::isfinite(h0)) {
            const double drift = std::abs(H.value(s) - h0);
            traj.drift.max_energy_drift =
                std::max(traj.drift.max_energy_drift.value_or(0.0), drift);
        }
        traj.states.push_back(std::move(s));
    }
    traj.stats = split ? sf->stats() : af->stats();
    return traj;
}

}  // namespace bkam

#endif
