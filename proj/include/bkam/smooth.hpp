#ifndef BKAM_SMOOTH_HPP
#define BKAM_SMOOTH_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bkam/math_util.hpp"
#include "bkam/polynomial.hpp"

namespace bkam {

/// Smooth part g(phi, y) of a b-Hamiltonian. Implementations supply exact
/// first partial derivatives; nothing in the library differentiates these
/// numerically.
class SmoothFunction {
public:
    virtual ~SmoothFunction() = default;
    virtual double value(std::span<const double> phi, std::span<const double> y) const = 0;
    /// gphi[j] += dG/dphi_j, gy[j] += dG/dy_j
    virtual void add_gradient(std::span<const double> phi, std::span<const double> y,
                              double scale, std::span<double> gphi,
                              std::span<double> gy) const = 0;
};

using SmoothPtr = std::shared_ptr<const SmoothFunction>;

class ZeroSmooth final : public SmoothFunction {
public:
    double value(std::span<const double>, std::span<const double>) const override { return 0.0; }
    void add_gradient(std::span<const double>, std::span<const double>, double,
                      std::span<double>, std::span<double>) const override {}
};

/// Angle-independent polynomial part h(y).
class PolynomialSmooth final : public SmoothFunction {
public:
    explicit PolynomialSmooth(PolynomialInY p) : poly_(std::move(p)) {}

    double value(std::span<const double>, std::span<const double> y) const override {
        return poly_.value(y);
    }
    void add_gradient(std::span<const double>, std::span<const double> y, double scale,
                      std::span<double>, std::span<double> gy) const override {
        poly_.add_gradient(y, scale, gy);
    }
    const PolynomialInY& poly() const { return poly_; }

private:
    PolynomialInY poly_;
};

/// Finite Fourier sum over the angles with polynomial-in-y amplitudes:
///   f = sum_t  [ ac_t(y) cos(2 pi k_t . phi) + as_t(y) sin(2 pi k_t . phi) ].
class FourierPoly final : public SmoothFunction {
public:
    struct Term {
        std::vector<int> k;
        PolynomialInY amp_cos;
        PolynomialInY amp_sin;
    };

    FourierPoly(int n_angles, int n_actions) : n_angles_(n_angles), n_actions_(n_actions) {}

    void add_term(Term t) {
        if (int(t.k.size()) != n_angles_)
            throw std::invalid_argument("FourierPoly: mode length mismatch");
        if (t.amp_cos.nvars() != n_actions_ || t.amp_sin.nvars() != n_actions_)
            throw std::invalid_argument("FourierPoly: amplitude dimension mismatch");
        terms_.push_back(std::move(t));
    }

    void add_cos(std::vector<int> k, PolynomialInY amp) {
        Term t{std::move(k), std::move(amp), PolynomialInY(n_actions_)};
        add_term(std::move(t));
    }
    void add_sin(std::vector<int> k, PolynomialInY amp) {
        Term t{std::move(k), PolynomialInY(n_actions_), std::move(amp)};
        add_term(std::move(t));
    }

    double value(std::span<const double> phi, std::span<const double> y) const override {
        double s = 0.0;
        for (const auto& t : terms_) {
            const double a = two_pi * dot(t.k, phi);
            s += t.amp_cos.value(y) * std::cos(a) + t.amp_sin.value(y) * std::sin(a);
        }
        return s;
    }

    void add_gradient(std::span<const double> phi, std::span<const double> y, double scale,
                      std::span<double> gphi, std::span<double> gy) const override {
        for (const auto& t : terms_) {
            const double a = two_pi * dot(t.k, phi);
            const double ca = std::cos(a), sa = std::sin(a);
            const double ac = t.amp_cos.value(y), as = t.amp_sin.value(y);
            for (int j = 0; j < n_angles_; ++j) {
                if (t.k[j] == 0) continue;
                gphi[j] += scale * two_pi * double(t.k[j]) * (-ac * sa + as * ca);
            }
            t.amp_cos.add_gradient(y, scale * ca, gy);
            t.amp_sin.add_gradient(y, scale * sa, gy);
        }
    }

    int n_angles() const { return n_angles_; }
    int n_actions() const { return n_actions_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    /// True when every amplitude is constant in y.
    bool is_angle_only() const {
        for (const auto& t : terms_)
            if (t.amp_cos.degree() > 0 || t.amp_sin.degree() > 0) return false;
        return true;
    }

private:
    static double dot(const std::vector<int>& k, std::span<const double> phi) {
        double s = 0.0;
        for (std::size_t i = 0; i < k.size(); ++i) s += double(k[i]) * phi[i];
        return s;
    }

    int n_angles_, n_actions_;
    std::vector<Term> terms_;
};

/// Weighted sum of smooth parts.
class SmoothSum final : public SmoothFunction {
public:
    SmoothSum() = default;
    SmoothSum(std::initializer_list<std::pair<double, SmoothPtr>> parts) {
        for (auto& p : parts) add(p.first, p.second);
    }

    void add(double weight, SmoothPtr f) {
        if (f) parts_.emplace_back(weight, std::move(f));
    }

    double value(std::span<const double> phi, std::span<const double> y) const override {
        double s = 0.0;
        for (const auto& [w, f] : parts_) s += w * f->value(phi, y);
        return s;
    }
    void add_gradient(std::span<const double> phi, std::span<const double> y, double scale,
                      std::span<double> gphi, std::span<double> gy) const override {
        for (const auto& [w, f] : parts_) f->add_gradient(phi, y, scale * w, gphi, gy);
    }

private:
    std::vector<std::pair<double, SmoothPtr>> parts_;
};

/// y1 * f(phi, y); the factor y1 is what keeps this class of perturbations
/// from moving the exceptional hypersurface.
class Y1Weighted final : public SmoothFunction {
public:
    explicit Y1Weighted(SmoothPtr f) : f_(std::move(f)) {}

    double value(std::span<const double> phi, std::span<const double> y) const override {
        return y[0] * f_->value(phi, y);
    }
    void add_gradient(std::span<const double> phi, std::span<const double> y, double scale,
                      std::span<double> gphi, std::span<double> gy) const override {
        f_->add_gradient(phi, y, scale * y[0], gphi, gy);
        gy[0] += scale * f_->value(phi, y);
    }

private:
    SmoothPtr f_;
};

/// Adapter for ad-hoc evaluators (used mainly by tests); both callables are
/// required so derivatives stay closed-form.
class FunctionalSmooth final : public SmoothFunction {
public:
    using Value = std::function<double(std::span<const double>, std::span<const double>)>;
    using Gradient = std::function<void(std::span<const double>, std::span<const double>,
                                        std::span<double>, std::span<double>)>;

    FunctionalSmooth(Value v, Gradient g) : value_(std::move(v)), grad_(std::move(g)) {}

    double value(std::span<const double> phi, std::span<const double> y) const override {
        return value_(phi, y);
    }
    void add_gradient(std::span<const double> phi, std::span<const double> y, double scale,
                      std::span<double> gphi, std::span<double> gy) const override {
        std::vector<double> dp(phi.size(), 0.0), dy(y.size(), 0.0);
        grad_(phi, y, dp, dy);
        for (std::size_t i = 0; i < phi.size(); ++i) gphi[i] += scale * dp[i];
        for (std::size_t i = 0; i < y.size(); ++i) gy[i] += scale * dy[i];
    }

private:
    Value value_;
    Gradient grad_;
};

/// Separable smooth part h(y) + V(phi); the splitting integrator requires
/// this structure because both partial flows are then exact.
class SeparableSmooth final : public SmoothFunction {
public:
    SeparableSmooth(PolynomialInY h, FourierPoly v) : h_(std::move(h)), v_(std::move(v)) {
        if (!v_.is_angle_only())
            throw std::invalid_argument("SeparableSmooth: kick part must not depend on actions");
    }

    double value(std::span<const double> phi, std::span<const double> y) const override {
        return h_.value(y) + v_.value(phi, y);
    }
    void add_gradient(std::span<const double> phi, std::span<const double> y, double scale,
                      std::span<double> gphi, std::span<double> gy) const override {
        h_.add_gradient(y, scale, gy);
        v_.add_gradient(phi, y, scale, gphi, gy);
    }

    const PolynomialInY& drift_part() const { return h_; }
    const FourierPoly& kick_part() const { return v_; }

private:
    PolynomialInY h_;
    FourierPoly v_;
};

}  // namespace bkam

#endif
