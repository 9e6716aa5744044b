#ifndef BKAM_POLYNOMIAL_HPP
#define BKAM_POLYNOMIAL_HPP

#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace bkam {

/// Sparse polynomial in the action variables with exact derivative,
/// restriction and recentering operations. Terms are kept in a sorted map so
/// every traversal is deterministic.
class PolynomialInY {
public:
    PolynomialInY() = default;
    explicit PolynomialInY(int nvars) : nvars_(nvars) {
        if (nvars < 0) throw std::invalid_argument("PolynomialInY: negative dimension");
    }

    static PolynomialInY constant(int nvars, double value) {
        PolynomialInY p(nvars);
        p.add_term(std::vector<int>(std::size_t(nvars), 0), value);
        return p;
    }

    int nvars() const { return nvars_; }
    bool empty() const { return terms_.empty(); }
    const std::map<std::vector<int>, double>& terms() const { return terms_; }

    void add_term(std::vector<int> alpha, double coeff) {
        if (int(alpha.size()) != nvars_)
            throw std::invalid_argument("PolynomialInY: multi-index length mismatch");
        for (int a : alpha)
            if (a < 0) throw std::invalid_argument("PolynomialInY: negative exponent");
        if (coeff == 0.0) return;
        auto [it, fresh] = terms_.emplace(std::move(alpha), coeff);
        if (!fresh) {
            it->second += coeff;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    double value(std::span<const double> y) const {
        check_point(y);
        double s = 0.0;
        for (const auto& [alpha, coeff] : terms_) s += coeff * monomial(alpha, y);
        return s;
    }

    /// gy[j] += scale * dP/dy_j
    void add_gradient(std::span<const double> y, double scale, std::span<double> gy) const {
        check_point(y);
        for (const auto& [alpha, coeff] : terms_) {
            for (int j = 0; j < nvars_; ++j) {
                if (alpha[j] == 0) continue;
                double d = coeff * double(alpha[j]);
                for (int i = 0; i < nvars_; ++i) {
                    int e = alpha[i] - (i == j ? 1 : 0);
                    for (int p = 0; p < e; ++p) d *= y[i];
                }
                gy[j] += scale * d;
            }
        }
    }

    PolynomialInY derivative(int j) const {
        PolynomialInY out(nvars_);
        for (const auto& [alpha, coeff] : terms_) {
            if (alpha[j] == 0) continue;
            auto beta = alpha;
            --beta[j];
            out.add_term(std::move(beta), coeff * double(alpha[j]));
        }
        return out;
    }

    PolynomialInY operator*(double s) const {
        PolynomialInY out(nvars_);
        for (const auto& [alpha, coeff] : terms_) out.add_term(alpha, coeff * s);
        return out;
    }

    PolynomialInY operator+(const PolynomialInY& other) const {
        if (other.nvars_ != nvars_)
            throw std::invalid_argument("PolynomialInY: dimension mismatch");
        PolynomialInY out = *this;
        for (const auto& [alpha, coeff] : other.terms_) out.add_term(alpha, coeff);
        return out;
    }

    /// Set variable `var` to zero and remove it; the result has nvars-1
    /// variables with the remaining ones re-indexed in order.
    PolynomialInY restrict_var_to_zero(int var) const {
        PolynomialInY out(nvars_ - 1);
        for (const auto& [alpha, coeff] : terms_) {
            if (alpha[var] != 0) continue;
            std::vector<int> beta;
            beta.reserve(std::size_t(nvars_ - 1));
            for (int i = 0; i < nvars_; ++i)
                if (i != var) beta.push_back(alpha[i]);
            out.add_term(std::move(beta), coeff);
        }
        return out;
    }

    /// Exact recentering: returns Q with Q(u) = P(y0 + u).
    PolynomialInY shifted(std::span<const double> y0) const {
        check_point(y0);
        PolynomialInY out(nvars_);
        std::vector<int> beta(std::size_t(nvars_), 0);
        for (const auto& [alpha, coeff] : terms_)
            expand_shift(alpha, y0, 0, coeff, beta, out);
        return out;
    }

    int degree() const {
        int d = 0;
        for (const auto& [alpha, coeff] : terms_) {
            int s = 0;
            for (int a : alpha) s += a;
            d = std::max(d, s);
        }
        return d;
    }

    double coefficient(std::span<const int> alpha) const {
        std::vector<int> key(alpha.begin(), alpha.end());
        auto it = terms_.find(key);
        return it == terms_.end() ? 0.0 : it->second;
    }

private:
    void check_point(std::span<const double> y) const {
        if (int(y.size()) != nvars_)
            throw std::invalid_argument("PolynomialInY: point dimension mismatch");
    }

    static double monomial(const std::vector<int>& alpha, std::span<const double> y) {
        double m = 1.0;
        for (std::size_t i = 0; i < alpha.size(); ++i)
            for (int p = 0; p < alpha[i]; ++p) m *= y[i];
        return m;
    }

    static double binom(int n, int k) {
        double b = 1.0;
        for (int i = 1; i <= k; ++i) b = b * double(n - k + i) / double(i);
        return b;
    }

    void expand_shift(const std::vector<int>& alpha, std::span<const double> y0, int var,
                      double coeff, std::vector<int>& beta, PolynomialInY& out) const {
        if (var == nvars_) {
            out.add_term(beta, coeff);
            return;
        }
        for (int j = 0; j <= alpha[var]; ++j) {
            double c = coeff * binom(alpha[var], j) * std::pow(y0[var], double(alpha[var] - j));
            if (c == 0.0 && j < alpha[var]) continue;
            beta[var] = j;
            expand_shift(alpha, y0, var + 1, c, beta, out);
        }
        beta[var] = 0;
    }

    int nvars_ = 0;
    std::map<std::vector<int>, double> terms_;
};

}  // namespace bkam

#endif
