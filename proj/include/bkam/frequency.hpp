#ifndef BKAM_FREQUENCY_HPP
#define BKAM_FREQUENCY_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bkam/dynamics.hpp"
#include "bkam/math_util.hpp"

namespace bkam {

struct FrequencyVector {
    std::vector<double> omega;       // cycles per unit time
    std::vector<double> amplitudes;
    double residual = 0.0;           // fraction of signal norm left after extraction
};

inline bool is_chaotic(const FrequencyVector& fv) { return fv.residual > 0.1; }

struct DegenerateSignalError : std::runtime_error {
    DegenerateSignalError() : std::runtime_error("degenerate (constant or zero) signal") {}
};

struct DiophantineCertificate {
    double gamma = 0.0;
    int K_max = 0;
    double L_lower = 0.0;        // min over 0 < |k|_1 <= K_max of |omega.k| |k|^gamma
    std::vector<int> worst_k;
};

namespace detail {

using cplx = std::complex<double>;

/// Windowed correlation analysis state: Hann weights, normalized inner
/// product, and a running residual signal with Gram-Schmidt deflation.
class NaffWorkspace {
public:
    NaffWorkspace(std::span<const cplx> signal, double dt)
        : n_(signal.size()), dt_(dt), f_(signal.begin(), signal.end()) {
        w_.resize(n_);
        double wsum = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            w_[j] = 1.0 - std::cos(two_pi * double(j) / double(n_ - 1));
            wsum += w_[j];
        }
        for (auto& w : w_) w /= wsum;
    }

    double norm(std::span<const cplx> g) const {
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += w_[j] * std::norm(g[j]);
        return std::sqrt(s);
    }

    /// <g, e_nu> with e_nu(t) = exp(2 pi i nu t); evaluated with a recurrent
    /// phasor so a full correlation costs one complex exponential.
    cplx correlate(std::span<const cplx> g, double nu) const {
        const cplx rot = std::polar(1.0, -two_pi * nu * dt_);
        cplx phase(1.0, 0.0);
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            acc += w_[j] * g[j] * phase;
            phase *= rot;
        }
        return acc;
    }

    /// Coarse scan over (-Nyquist, Nyquist] followed by golden-section
    /// refinement of |<f_res, e_nu>|.
    double locate_peak(std::span<const cplx> g) const {
        const std::size_t m = n_;
        const double dnu = 1.0 / (double(m) * dt_);
        double best_nu = 0.0, best = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
            double nu = -0.5 / dt_ + double(i) * dnu;
            const double a = std::abs(correlate(g, nu));
            if (a > best) {
                best = a;
                best_nu = nu;
            }
        }
        auto score = [&](double nu) { return std::abs(correlate(g, nu)); };
        return golden_section_max(score, best_nu - dnu, best_nu + dnu);
    }

    std::vector<cplx> make_exponential(double nu) const {
        std::vector<cplx> e(n_);
        const cplx rot = std::polar(1.0, two_pi * nu * dt_);
        cplx phase(1.0, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            e[j] = phase;
            phase *= rot;
        }
        return e;
    }

    std::size_t size() const { return n_; }
    double dt() const { return dt_; }
    std::vector<cplx>& residual_signal() { return f_; }

    /// Project g off the span of the orthonormalized basis and append the
    /// newly orthonormalized exponential (modified Gram-Schmidt).
    void deflate(const std::vector<cplx>& e) {
        std::vector<cplx> u = e;
        for (const auto& b : basis_) {
            const cplx c = dotw(u, b);
            for (std::size_t j = 0; j < n_; ++j) u[j] -= c * b[j];
        }
        const double nu = norm(u);
        if (nu < 1e-14) return;  // numerically dependent mode; residual handles it
        for (auto& v : u) v /= nu;
        const cplx c = dotw(f_, u);
        for (std::size_t j = 0; j < n_; ++j) f_[j] -= c * u[j];
        basis_.push_back(std::move(u));
    }

    cplx dotw(std::span<const cplx> a, std::span<const cplx> b) const {
        cplx s(0.0, 0.0);
        for (std::size_t j = 0; j < n_; ++j) s += w_[j] * a[j] * std::conj(b[j]);
        return s;
    }

private:
    std::size_t n_;
    double dt_;
    std::vector<cplx> f_;
    std::vector<double> w_;
    std::vector<std::vector<cplx>> basis_;
};

}  // namespace detail

/// Iterative extraction of the n_freq strongest frequencies of a complex
/// signal sampled at spacing dt (Hann window, golden-section refinement,
/// Gram-Schmidt deflation). Frequencies are reported inside the Nyquist band;
/// amplitudes are sorted descending.
inline FrequencyVector naff_extract(std::span<const std::complex<double>> signal, double dt,
                                    int n_freq) {
    if (signal.size() < 64) throw std::invalid_argument("naff_extract: signal shorter than 64");
    if (n_freq < 1) throw std::invalid_argument("naff_extract: n_freq must be at least 1");
    if (!(dt > 0.0)) throw std::invalid_argument("naff_extract: dt must be positive");

    detail::NaffWorkspace ws(signal, dt);
    const double fnorm = ws.norm(signal);
    if (fnorm < 1e-300) throw DegenerateSignalError();
    // A constant signal carries no frequency content worth extracting.
    {
        std::vector<std::complex<double>> centered(signal.begin(), signal.end());
        std::complex<double> mean(0.0, 0.0);
        for (const auto& v : centered) mean += v;
        mean /= double(centered.size());
        for (auto& v : centered) v -= mean;
        if (ws.norm(centered) < 1e-14 * fnorm) throw DegenerateSignalError();
    }

    std::vector<double> freqs, amps;
    for (int q = 0; q < n_freq; ++q) {
        const auto& res = ws.residual_signal();
        if (ws.norm(res) < 1e-14 * fnorm) break;
        const double nu = ws.locate_peak(res);
        const double amp = std::abs(ws.correlate(res, nu));
        freqs.push_back(nu);
        amps.push_back(amp);
        ws.deflate(ws.make_exponential(nu));
    }

    // One refinement sweep: re-locate each tone on the signal minus the
    // reconstruction of the others, which removes most mutual interference.
    if (freqs.size() > 1) {
        detail::NaffWorkspace clean(signal, dt);
        std::vector<std::vector<std::complex<double>>> tones;
        std::vector<std::complex<double>> coefs;
        for (std::size_t q = 0; q < freqs.size(); ++q) {
            auto e = clean.make_exponential(freqs[q]);
            coefs.push_back(clean.dotw(signal, e));
            tones.push_back(std::move(e));
        }
        for (std::size_t q = 0; q < freqs.size(); ++q) {
            std::vector<std::complex<double>> part(signal.begin(), signal.end());
            for (std::size_t p = 0; p < freqs.size(); ++p) {
                if (p == q) continue;
                for (std::size_t j = 0; j < part.size(); ++j) part[j] -= coefs[p] * tones[p][j];
            }
            freqs[q] = clean.locate_peak(part);
            tones[q] = clean.make_exponential(freqs[q]);
            coefs[q] = clean.dotw(part, tones[q]);
            amps[q] = std::abs(coefs[q]);
        }
        // Residual of the final model.
        std::vector<std::complex<double>> res(signal.begin(), signal.end());
        for (std::size_t p = 0; p < freqs.size(); ++p)
            for (std::size_t j = 0; j < res.size(); ++j) res[j] -= coefs[p] * tones[p][j];
        FrequencyVector out;
        std::vector<std::size_t> order(freqs.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return amps[a] > amps[b]; });
        for (auto i : order) {
            out.omega.push_back(freqs[i]);
            out.amplitudes.push_back(amps[i]);
        }
        out.residual = std::min(1.0, clean.norm(res) / fnorm);
        return out;
    }

    FrequencyVector out;
    out.omega = freqs;
    out.amplitudes = amps;
    out.residual = std::min(1.0, ws.norm(ws.residual_signal()) / fnorm);
    return out;
}

/// Fundamental frequency of each angle of a uniformly sampled trajectory,
/// from the unit-modulus signals exp(2 pi i phi_j(t)).
inline FrequencyVector measure_torus_frequencies(const Trajectory& traj) {
    if (traj.times.size() < 64)
        throw std::invalid_argument("measure_torus_frequencies: trajectory too short");
    const double dt = traj.times[1] - traj.times[0];
    const int n = traj.states.front().n();

    FrequencyVector out;
    out.omega.resize(std::size_t(n));
    out.amplitudes.resize(std::size_t(n));
    for (int j = 0; j < n; ++j) {
        std::vector<std::complex<double>> sig(traj.times.size());
        for (std::size_t s = 0; s < sig.size(); ++s)
            sig[s] = std::polar(1.0, two_pi * traj.states[s].phi[std::size_t(j)]);
        FrequencyVector one = naff_extract(sig, dt, 1);
        out.omega[std::size_t(j)] = one.omega.at(0);
        out.amplitudes[std::size_t(j)] = one.amplitudes.at(0);
        out.residual = std::max(out.residual, one.residual);
    }
    return out;
}

/// Same per-angle extraction, but a frozen angle reports frequency zero
/// instead of failing; used to seed period-lattice searches.
inline FrequencyVector measure_torus_frequencies_or_zero(const Trajectory& traj) {
    if (traj.times.size() < 64)
        throw std::invalid_argument("measure_torus_frequencies_or_zero: trajectory too short");
    const double dt = traj.times[1] - traj.times[0];
    const int n = traj.states.front().n();
    FrequencyVector out;
    out.omega.resize(std::size_t(n), 0.0);
    out.amplitudes.resize(std::size_t(n), 0.0);
    for (int j = 0; j < n; ++j) {
        std::vector<std::complex<double>> sig(traj.times.size());
        for (std::size_t s = 0; s < sig.size(); ++s)
            sig[s] = std::polar(1.0, two_pi * traj.states[s].phi[std::size_t(j)]);
        try {
            FrequencyVector one = naff_extract(sig, dt, 1);
            out.omega[std::size_t(j)] = one.omega.at(0);
            out.amplitudes[std::size_t(j)] = one.amplitudes.at(0);
            out.residual = std::max(out.residual, one.residual);
        } catch (const DegenerateSignalError&) {
            out.omega[std::size_t(j)] = 0.0;
            out.amplitudes[std::size_t(j)] = 1.0;
        }
    }
    return out;
}

namespace detail {

inline long ball_count(int n, int K) {
    // lattice points with 0 < |k|_1 <= K; shell[d][s] counts d-dim vectors
    // with |k|_1 == s, built by convolution over dimensions
    std::vector<std::vector<long>> shell(std::size_t(n + 1),
                                         std::vector<long>(std::size_t(K + 1), 0));
    shell[0][0] = 1;
    for (int d = 1; d <= n; ++d)
        for (int s = 0; s <= K; ++s) {
            long c = 0;
            for (int a = -s; a <= s; ++a) c += shell[std::size_t(d - 1)][std::size_t(s - std::abs(a))];
            shell[std::size_t(d)][std::size_t(s)] = c;
        }
    long total = 0;
    for (int s = 1; s <= K; ++s) total += shell[std::size_t(n)][std::size_t(s)];
    return total;
}

template <class Visit>
void enumerate_shell(int dim, int remaining, std::vector<int>& k, int pos, Visit&& visit) {
    if (pos == dim - 1) {
        // last component absorbs the remaining budget (both signs)
        k[std::size_t(pos)] = remaining;
        visit(k);
        if (remaining != 0) {
            k[std::size_t(pos)] = -remaining;
            visit(k);
        }
        k[std::size_t(pos)] = 0;
        return;
    }
    for (int a = -remaining; a <= remaining; ++a) {
        k[std::size_t(pos)] = a;
        enumerate_shell(dim, remaining - std::abs(a), k, pos + 1, visit);
    }
    k[std::size_t(pos)] = 0;
}

}  // namespace detail

/// Exhaustive Diophantine scan: minimizes |omega.k| |k|_1^gamma over
/// 0 < |k|_1 <= K_max, enumerating shells of increasing |k|_1 and the
/// canonical half (first nonzero component positive). An inner product below
/// 1e-14 is reported as an exact resonance (L_lower = 0).
inline DiophantineCertificate diophantine_scan(std::span<const double> omega, double gamma,
                                               int K_max) {
    if (K_max < 1) throw std::invalid_argument("diophantine_scan: K_max must be at least 1");
    if (omega.empty()) throw std::invalid_argument("diophantine_scan: empty frequency vector");
    const int n = int(omega.size());
    if (detail::ball_count(n, K_max) > 200'000'000L)
        throw std::invalid_argument("diophantine_scan: lattice ball too large for exhaustive scan");

    DiophantineCertificate cert;
    cert.gamma = gamma;
    cert.K_max = K_max;
    cert.L_lower = std::numeric_limits<double>::infinity();

    std::vector<int> k(std::size_t(n), 0);
    bool resonant = false;
    for (int shell = 1; shell <= K_max && !resonant; ++shell) {
        detail::enumerate_shell(n, shell, k, 0, [&](const std::vector<int>& kk) {
            if (resonant) return;
            // canonical representative: first nonzero component positive
            for (int v : kk) {
                if (v > 0) break;
                if (v < 0) return;
            }
            double dot = 0.0;
            for (int i = 0; i < n; ++i) dot += omega[std::size_t(i)] * double(kk[std::size_t(i)]);
            const double ad = std::abs(dot);
            if (ad < 1e-14) {
                cert.L_lower = 0.0;
                cert.worst_k = kk;
                resonant = true;
                return;
            }
            const double L = ad * std::pow(double(shell), gamma);
            if (L < cert.L_lower) {
                cert.L_lower = L;
                cert.worst_k = kk;
            }
        });
    }
    return cert;
}

}  // namespace bkam

#endif
