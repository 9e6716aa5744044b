#ifndef BKAM_FOURIER_TAYLOR_HPP
#define BKAM_FOURIER_TAYLOR_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "bkam/math_util.hpp"
#include "bkam/polynomial.hpp"

namespace bkam {

using cplx = std::complex<double>;

namespace detail {

/// Shared multi-index bookkeeping for Taylor blocks of degree <= D in m
/// action variables, in graded lexicographic order.
struct TaylorBasis {
    int m, D;
    std::vector<std::vector<int>> alphas;
    std::vector<int> lookup;  // packed exponents -> index, -1 if absent

    TaylorBasis(int m_, int D_) : m(m_), D(D_) {
        std::vector<int> a(std::size_t(m), 0);
        build(a, 0, 0);
        std::stable_sort(alphas.begin(), alphas.end(),
                         [](const std::vector<int>& x, const std::vector<int>& y) {
                             int sx = 0, sy = 0;
                             for (int v : x) sx += v;
                             for (int v : y) sy += v;
                             if (sx != sy) return sx < sy;
                             return x < y;
                         });
        long span = 1;
        for (int i = 0; i < m; ++i) span *= (D + 1);
        lookup.assign(std::size_t(span), -1);
        for (std::size_t i = 0; i < alphas.size(); ++i) lookup[pack(alphas[i])] = int(i);
    }

    std::size_t pack(std::span<const int> alpha) const {
        long p = 0;
        for (int i = 0; i < m; ++i) p = p * (D + 1) + alpha[std::size_t(i)];
        return std::size_t(p);
    }

    int index(std::span<const int> alpha) const {
        for (int v : alpha)
            if (v < 0 || v > D) return -1;
        return lookup[pack(alpha)];
    }

    int count() const { return int(alphas.size()); }

    static std::shared_ptr<const TaylorBasis> get(int m, int D) {
        static std::mutex mu;
        static std::vector<std::shared_ptr<const TaylorBasis>> cache;
        std::lock_guard<std::mutex> lock(mu);
        for (const auto& b : cache)
            if (b->m == m && b->D == D) return b;
        cache.push_back(std::make_shared<TaylorBasis>(m, D));
        return cache.back();
    }

private:
    void build(std::vector<int>& a, int pos, int total) {
        if (pos == m) {
            alphas.push_back(a);
            return;
        }
        for (int v = 0; v + total <= D; ++v) {
            a[std::size_t(pos)] = v;
            build(a, pos + 1, total + v);
        }
        a[std::size_t(pos)] = 0;
    }
};

}  // namespace detail

/// Truncated torus-Fourier x action-Taylor series on T^m x B^m:
///   F(phi, y) = sum_{|k|_inf <= K} sum_{|alpha| <= D}
///               c(k, alpha) exp(2 pi i k.phi) y^alpha.
/// Real-valued series satisfy c(-k, alpha) = conj(c(k, alpha)); all algebra
/// preserves that symmetry. Truncation is plain projection.
class FourierTaylor {
public:
    FourierTaylor() : FourierTaylor(1, 0, 0) {}

    FourierTaylor(int m, int K, int D) : m_(m), K_(K), D_(D) {
        if (m < 1 || K < 0 || D < 0) throw std::invalid_argument("FourierTaylor: bad shape");
        basis_ = detail::TaylorBasis::get(m, D);
        nk_ = 1;
        for (int i = 0; i < m; ++i) nk_ *= long(2 * K + 1);
        na_ = basis_->count();
        c_.assign(std::size_t(nk_) * std::size_t(na_), cplx(0.0, 0.0));
    }

    int dims() const { return m_; }
    int cutoff() const { return K_; }
    int degree() const { return D_; }
    long mode_count() const { return nk_; }
    int alpha_count() const { return na_; }
    const std::vector<std::vector<int>>& alphas() const { return basis_->alphas; }

    long k_index(std::span<const int> k) const {
        long idx = 0;
        for (int i = 0; i < m_; ++i) {
            const int v = k[std::size_t(i)];
            if (v < -K_ || v > K_) return -1;
            idx = idx * (2 * K_ + 1) + (v + K_);
        }
        return idx;
    }

    void k_unpack(long idx, std::span<int> k) const {
        for (int i = m_ - 1; i >= 0; --i) {
            k[std::size_t(i)] = int(idx % (2 * K_ + 1)) - K_;
            idx /= (2 * K_ + 1);
        }
    }

    cplx get(std::span<const int> k, std::span<const int> alpha) const {
        const long ik = k_index(k);
        const int ia = basis_->index(alpha);
        if (ik < 0 || ia < 0) return cplx(0.0, 0.0);
        return c_[std::size_t(ik) * std::size_t(na_) + std::size_t(ia)];
    }

    void set(std::span<const int> k, std::span<const int> alpha, cplx z) {
        const long ik = k_index(k);
        const int ia = basis_->index(alpha);
        if (ik < 0 || ia < 0) throw std::out_of_range("FourierTaylor::set outside truncation");
        c_[std::size_t(ik) * std::size_t(na_) + std::size_t(ia)] = z;
    }

    void add_to(std::span<const int> k, std::span<const int> alpha, cplx z) {
        const long ik = k_index(k);
        const int ia = basis_->index(alpha);
        if (ik < 0 || ia < 0) throw std::out_of_range("FourierTaylor::add_to outside truncation");
        c_[std::size_t(ik) * std::size_t(na_) + std::size_t(ia)] += z;
    }

    /// Write z at (k, alpha) and conj(z) at (-k, alpha).
    void set_real_pair(std::span<const int> k, std::span<const int> alpha, cplx z) {
        set(k, alpha, z);
        std::vector<int> mk(k.begin(), k.end());
        for (auto& v : mk) v = -v;
        set(mk, alpha, std::conj(z));
    }

    cplx& raw(long ik, int ia) { return c_[std::size_t(ik) * std::size_t(na_) + std::size_t(ia)]; }
    cplx raw(long ik, int ia) const {
        return c_[std::size_t(ik) * std::size_t(na_) + std::size_t(ia)];
    }

    double l1_norm() const {
        double s = 0.0;
        for (const auto& v : c_) s += std::abs(v);
        return s;
    }

    double reality_defect() const {
        double d = 0.0;
        std::vector<int> k(std::size_t(m_)), mk(std::size_t(m_));
        for (long ik = 0; ik < nk_; ++ik) {
            k_unpack(ik, k);
            for (int i = 0; i < m_; ++i) mk[std::size_t(i)] = -k[std::size_t(i)];
            const long imk = k_index(mk);
            for (int ia = 0; ia < na_; ++ia)
                d = std::max(d, std::abs(raw(ik, ia) - std::conj(raw(imk, ia))));
        }
        return d;
    }

    FourierTaylor& operator+=(const FourierTaylor& other) {
        require_same_shape(other);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += other.c_[i];
        return *this;
    }

    FourierTaylor& operator-=(const FourierTaylor& other) {
        require_same_shape(other);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= other.c_[i];
        return *this;
    }

    FourierTaylor& operator*=(cplx z) {
        for (auto& v : c_) v *= z;
        return *this;
    }

    /// Copy into a (possibly) larger truncation box.
    FourierTaylor promoted(int K, int D) const {
        if (K == K_ && D == D_) return *this;
        if (K < K_ || D < D_) return truncated(K, D);
        FourierTaylor out(m_, K, D);
        std::vector<int> k(std::size_t(m_));
        for (long ik = 0; ik < nk_; ++ik) {
            k_unpack(ik, k);
            const long jk = out.k_index(k);
            for (int ia = 0; ia < na_; ++ia)
                out.raw(jk, out.basis_->index(basis_->alphas[std::size_t(ia)])) = raw(ik, ia);
        }
        return out;
    }

    /// Projection onto a smaller truncation box (modes outside are dropped).
    FourierTaylor truncated(int K, int D) const {
        FourierTaylor out(m_, std::min(K, K_), std::min(D, D_));
        std::vector<int> k(std::size_t(out.m_));
        for (long jk = 0; jk < out.nk_; ++jk) {
            out.k_unpack(jk, k);
            const long ik = k_index(k);
            for (int ja = 0; ja < out.na_; ++ja) {
                const int ia = basis_->index(out.basis_->alphas[std::size_t(ja)]);
                out.raw(jk, ja) = raw(ik, ia);
            }
        }
        return out.promoted(K, D);
    }

    FourierTaylor deriv_phi(int j) const {
        FourierTaylor out(m_, K_, D_);
        std::vector<int> k(std::size_t(m_));
        for (long ik = 0; ik < nk_; ++ik) {
            k_unpack(ik, k);
            const cplx factor(0.0, two_pi * double(k[std::size_t(j)]));
            for (int ia = 0; ia < na_; ++ia) out.raw(ik, ia) = factor * raw(ik, ia);
        }
        return out;
    }

    FourierTaylor deriv_y(int j) const {
        FourierTaylor out(m_, K_, D_);
        std::vector<int> beta(std::size_t(m_));
        for (int ia = 0; ia < na_; ++ia) {
            const auto& alpha = basis_->alphas[std::size_t(ia)];
            if (alpha[std::size_t(j)] == 0) continue;
            beta.assign(alpha.begin(), alpha.end());
            --beta[std::size_t(j)];
            const int ib = basis_->index(beta);
            const double fac = double(alpha[std::size_t(j)]);
            for (long ik = 0; ik < nk_; ++ik) out.raw(ik, ib) += fac * raw(ik, ia);
        }
        return out;
    }

    /// Directional angle derivative sum_j omega_j d/dphi_j (the operator
    /// appearing in the cohomological equation).
    FourierTaylor directional_phi(std::span<const double> omega) const {
        if (int(omega.size()) != m_)
            throw std::invalid_argument("directional_phi: dimension mismatch");
        FourierTaylor out(m_, K_, D_);
        std::vector<int> k(std::size_t(m_));
        for (long ik = 0; ik < nk_; ++ik) {
            k_unpack(ik, k);
            double kw = 0.0;
            for (int i = 0; i < m_; ++i) kw += omega[std::size_t(i)] * double(k[std::size_t(i)]);
            const cplx factor(0.0, two_pi * kw);
            for (int ia = 0; ia < na_; ++ia) out.raw(ik, ia) = factor * raw(ik, ia);
        }
        return out;
    }

    cplx eval_complex(std::span<const double> phi, std::span<const double> y) const {
        if (int(phi.size()) != m_ || int(y.size()) != m_)
            throw std::invalid_argument("FourierTaylor::eval dimension mismatch");
        // per-dimension phase powers e^{2 pi i k phi_d}, k = -K..K
        std::vector<cplx> phases(std::size_t(m_) * std::size_t(2 * K_ + 1));
        for (int d = 0; d < m_; ++d) {
            const cplx step = std::polar(1.0, two_pi * phi[std::size_t(d)]);
            cplx p(1.0, 0.0);
            auto* row = &phases[std::size_t(d) * std::size_t(2 * K_ + 1)];
            row[K_] = p;
            for (int k = 1; k <= K_; ++k) {
                row[K_ + k] = row[K_ + k - 1] * step;
                row[K_ - k] = std::conj(row[K_ + k]);
            }
        }
        std::vector<double> mono(std::size_t(na_));
        for (int ia = 0; ia < na_; ++ia) {
            double v = 1.0;
            const auto& alpha = basis_->alphas[std::size_t(ia)];
            for (int d = 0; d < m_; ++d)
                for (int p = 0; p < alpha[std::size_t(d)]; ++p) v *= y[std::size_t(d)];
            mono[std::size_t(ia)] = v;
        }
        cplx total(0.0, 0.0);
        std::vector<int> k(std::size_t(m_));
        for (long ik = 0; ik < nk_; ++ik) {
            k_unpack(ik, k);
            cplx phase(1.0, 0.0);
            for (int d = 0; d < m_; ++d)
                phase *= phases[std::size_t(d) * std::size_t(2 * K_ + 1) +
                                std::size_t(k[std::size_t(d)] + K_)];
            cplx poly(0.0, 0.0);
            for (int ia = 0; ia < na_; ++ia) poly += raw(ik, ia) * mono[std::size_t(ia)];
            total += phase * poly;
        }
        return total;
    }

    double eval(std::span<const double> phi, std::span<const double> y) const {
        return eval_complex(phi, y).real();
    }

    const detail::TaylorBasis& basis() const { return *basis_; }

private:
    void require_same_shape(const FourierTaylor& other) const {
        if (other.m_ != m_ || other.K_ != K_ || other.D_ != D_)
            throw std::invalid_argument("FourierTaylor: shape mismatch");
    }

    friend FourierTaylor ft_mul(const FourierTaylor&, const FourierTaylor&);

    int m_, K_, D_;
    long nk_;
    int na_;
    std::shared_ptr<const detail::TaylorBasis> basis_;
    std::vector<cplx> c_;
};

inline FourierTaylor ft_add(const FourierTaylor& a, const FourierTaylor& b) {
    if (a.dims() != b.dims()) throw std::invalid_argument("ft_add: dimension mismatch");
    const int K = std::max(a.cutoff(), b.cutoff());
    const int D = std::max(a.degree(), b.degree());
    FourierTaylor out = a.promoted(K, D);
    out += b.promoted(K, D);
    return out;
}

inline FourierTaylor ft_sub(const FourierTaylor& a, const FourierTaylor& b) {
    if (a.dims() != b.dims()) throw std::invalid_argument("ft_sub: dimension mismatch");
    const int K = std::max(a.cutoff(), b.cutoff());
    const int D = std::max(a.degree(), b.degree());
    FourierTaylor out = a.promoted(K, D);
    out -= b.promoted(K, D);
    return out;
}

namespace detail {

/// Apply matrix M (R rows by C cols) along one axis of a row-major tensor.
inline std::vector<cplx> apply_axis(const std::vector<cplx>& in, std::vector<long>& shape,
                                    std::size_t axis, const std::vector<cplx>& M, long R) {
    long outer = 1, inner = 1;
    const long C = shape[axis];
    for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];

    std::vector<cplx> out(std::size_t(outer * R * inner), cplx(0.0, 0.0));
    for (long o = 0; o < outer; ++o)
        for (long r = 0; r < R; ++r) {
            const cplx* Mrow = &M[std::size_t(r * C)];
            cplx* dst = &out[std::size_t((o * R + r) * inner)];
            for (long c = 0; c < C; ++c) {
                const cplx w = Mrow[c];
                if (w == cplx(0.0, 0.0)) continue;
                const cplx* src = &in[std::size_t((o * C + c) * inner)];
                for (long i = 0; i < inner; ++i) dst[std::size_t(i)] += w * src[std::size_t(i)];
            }
        }
    shape[axis] = R;
    return out;
}

inline std::vector<cplx> dft_matrix(long S, int K, bool forward) {
    // forward: grid values from modes (S rows, 2K+1 cols)
    // inverse: modes from grid values ((2K+1) rows, S cols), 1/S normalized
    std::vector<cplx> M;
    if (forward) {
        M.resize(std::size_t(S) * std::size_t(2 * K + 1));
        for (long s = 0; s < S; ++s)
            for (int k = -K; k <= K; ++k)
                M[std::size_t(s * (2 * K + 1) + (k + K))] =
                    std::polar(1.0, two_pi * double(k) * double(s) / double(S));
    } else {
        M.resize(std::size_t(2 * K + 1) * std::size_t(S));
        for (int k = -K; k <= K; ++k)
            for (long s = 0; s < S; ++s)
                M[std::size_t((k + K) * S + s)] =
                    std::polar(1.0, -two_pi * double(k) * double(s) / double(S)) / double(S);
    }
    return M;
}

}  // namespace detail

/// Product truncated back to the larger of the operand boxes. Computed on an
/// alias-free collocation grid (S >= Ka + Kb + Kr + 1), so the retained
/// coefficients are exact up to round-off.
inline FourierTaylor ft_mul(const FourierTaylor& a, const FourierTaylor& b) {
    if (a.dims() != b.dims()) throw std::invalid_argument("ft_mul: dimension mismatch");
    const int m = a.dims();
    const int Kr = std::max(a.cutoff(), b.cutoff());
    const int Dr = std::max(a.degree(), b.degree());
    const long S = a.cutoff() + b.cutoff() + Kr + 1;

    auto to_grid = [&](const FourierTaylor& f) {
        const int K = f.cutoff();
        std::vector<long> shape;
        shape.push_back(f.alpha_count());
        for (int d = 0; d < m; ++d) shape.push_back(2 * K + 1);
        // reorder raw layout [k][alpha] -> [alpha][k...]
        std::vector<cplx> data(std::size_t(f.alpha_count()) * std::size_t(f.mode_count()));
        for (long ik = 0; ik < f.mode_count(); ++ik)
            for (int ia = 0; ia < f.alpha_count(); ++ia)
                data[std::size_t(ia) * std::size_t(f.mode_count()) + std::size_t(ik)] =
                    f.raw(ik, ia);
        const auto M = detail::dft_matrix(S, K, true);
        for (int d = 0; d < m; ++d) data = detail::apply_axis(data, shape, std::size_t(d + 1), M, S);
        return data;
    };

    const auto ga = to_grid(a);
    const auto gb = to_grid(b);
    long grid = 1;
    for (int d = 0; d < m; ++d) grid *= S;

    // pointwise truncated polynomial product in the action variables
    const FourierTaylor model(m, 0, Dr);
    const auto& alphas = model.basis().alphas;
    struct Triple { int ia, ib, ic; };
    std::vector<Triple> triples;
    {
        std::vector<int> gamma(std::size_t(m));
        const auto& ba = a.basis();
        const auto& bb = b.basis();
        for (int ia = 0; ia < ba.count(); ++ia)
            for (int ib = 0; ib < bb.count(); ++ib) {
                int total = 0;
                for (int d = 0; d < m; ++d) {
                    gamma[std::size_t(d)] = ba.alphas[std::size_t(ia)][std::size_t(d)] +
                                            bb.alphas[std::size_t(ib)][std::size_t(d)];
                    total += gamma[std::size_t(d)];
                }
                if (total > Dr) continue;
                const int ic = model.basis().index(gamma);
                triples.push_back({ia, ib, ic});
            }
    }

    std::vector<cplx> gr(std::size_t(alphas.size()) * std::size_t(grid), cplx(0.0, 0.0));
    for (const auto& t : triples) {
        const cplx* pa = &ga[std::size_t(t.ia) * std::size_t(grid)];
        const cplx* pb = &gb[std::size_t(t.ib) * std::size_t(grid)];
        cplx* pc = &gr[std::size_t(t.ic) * std::size_t(grid)];
        for (long s = 0; s < grid; ++s) pc[std::size_t(s)] += pa[std::size_t(s)] * pb[std::size_t(s)];
    }

    // back to coefficients, cropped to |k|_inf <= Kr
    std::vector<long> shape;
    shape.push_back(long(alphas.size()));
    for (int d = 0; d < m; ++d) shape.push_back(S);
    const auto Minv = detail::dft_matrix(S, Kr, false);
    auto coeffs = gr;
    for (int d = 0; d < m; ++d)
        coeffs = detail::apply_axis(coeffs, shape, std::size_t(d + 1), Minv, 2 * Kr + 1);

    FourierTaylor out(m, Kr, Dr);
    for (long ik = 0; ik < out.mode_count(); ++ik)
        for (int ia = 0; ia < out.alpha_count(); ++ia)
            out.raw(ik, ia) = coeffs[std::size_t(ia) * std::size_t(out.mode_count()) + std::size_t(ik)];
    return out;
}

/// Canonical bracket on the symplectic factor:
///   {a, b} = sum_j (da/dphi_j db/dy_j - da/dy_j db/dphi_j).
inline FourierTaylor ft_poisson(const FourierTaylor& a, const FourierTaylor& b) {
    if (a.dims() != b.dims()) throw std::invalid_argument("ft_poisson: dimension mismatch");
    const int m = a.dims();
    FourierTaylor out(m, std::max(a.cutoff(), b.cutoff()), std::max(a.degree(), b.degree()));
    for (int j = 0; j < m; ++j) {
        out += ft_mul(a.deriv_phi(j), b.deriv_y(j));
        out -= ft_mul(a.deriv_y(j), b.deriv_phi(j));
    }
    return out;
}

/// Embed an action polynomial as the k = 0 part of a series.
inline FourierTaylor to_fourier_taylor(const PolynomialInY& p, int K, int D) {
    FourierTaylor out(p.nvars(), K, D);
    std::vector<int> k0(std::size_t(p.nvars()), 0);
    for (const auto& [alpha, coeff] : p.terms()) {
        int total = 0;
        for (int v : alpha) total += v;
        if (total > D) continue;  // projection
        out.add_to(k0, alpha, cplx(coeff, 0.0));
    }
    return out;
}

}  // namespace bkam

#endif
