#ifndef BKAM_MATH_UTIL_HPP
#define BKAM_MATH_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace bkam {

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Reduce an angle to the unit torus [0,1).
inline double wrap_unit(double x) {
    double w = x - std::floor(x);
    if (w >= 1.0) w = 0.0;  // guard against floor rounding at the boundary
    return w;
}

/// Signed distance on the unit torus, in (-0.5, 0.5].
inline double wrap_centered(double x) {
    double w = x - std::round(x);
    if (w <= -0.5) w = 0.5;
    return w;
}

/// Max wrapped-angle distance between two angle vectors.
inline double torus_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(wrap_centered(a[i] - b[i])));
    return d;
}

inline double sup_abs_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

/// Least-squares slope of y against x.
inline double linear_fit_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit_slope: need two or more paired samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= double(x.size());
    my /= double(x.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit_slope: degenerate abscissae");
    return sxy / sxx;
}

/// Golden-section maximizer on [a,b]; f need only be unimodal near the peak.
template <class F>
double golden_section_max(F&& f, double a, double b, int iterations = 96) {
    const double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < iterations && (b - a) > 0.0; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

/// Deterministic uniform sampling; raw mt19937_64 output is scaled by hand so
/// the stream does not depend on library distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    int uniform_int(int a, int b) {  // inclusive bounds
        return a + int(gen_() % std::uint64_t(b - a + 1));
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace bkam

#endif
