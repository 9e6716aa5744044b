#ifndef BKAM_ODE_HPP
#define BKAM_ODE_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace bkam {

struct OdeConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double max_step = 0.0;      // 0 means unrestricted
    double initial_step = 0.0;  // 0 means estimate automatically
    long max_steps = 50'000'000;
};

enum class OdeStatus { done, halted, step_underflow, too_many_steps };

struct OdeStats {
    long steps = 0;
    long accepted = 0;
    long rejected = 0;
    long evals = 0;
};

/// Explicit Dormand-Prince 8(5,3) integrator after Hairer's DOP853, kept as a
/// resumable stepper so trajectory sampling reuses the step-size history.
/// The right-hand side is f(t, y, dydt) with fixed dimension.
class Dop853 {
public:
    using Rhs = std::function<void(double, const double*, double*)>;

    Dop853(Rhs f, std::size_t dim, OdeConfig cfg = {})
        : f_(std::move(f)), n_(dim), cfg_(cfg) {
        for (auto* v : {&y_, &ytmp_, &k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &k8_, &k9_, &k10_})
            v->assign(n_, 0.0);
    }

    void start(double t0, std::span<const double> y0) {
        if (y0.size() != n_) throw std::invalid_argument("Dop853: state dimension mismatch");
        t_ = t0;
        std::copy(y0.begin(), y0.end(), y_.begin());
        h_ = cfg_.initial_step;
        have_k1_ = false;
    }

    double t() const { return t_; }
    std::span<const double> y() const { return y_; }
    const OdeStats& stats() const { return stats_; }

    /// Advance to exactly t_target. The guard is evaluated after every
    /// accepted step; returning false stops the integration (status halted).
    template <class Guard>
    OdeStatus advance_to(double t_target, Guard&& guard) {
        if (t_target == t_) return OdeStatus::done;
        const double posneg = t_target > t_ ? 1.0 : -1.0;
        const double hmax = cfg_.max_step > 0 ? cfg_.max_step : std::abs(t_target - t_);

        if (!have_k1_) {
            f_(t_, y_.data(), k1_.data());
            ++stats_.evals;
            have_k1_ = true;
        }
        if (h_ == 0.0) h_ = estimate_initial_step(hmax, posneg);
        if (h_ * posneg < 0.0) h_ = -h_;
        if (std::abs(h_) > hmax) h_ = posneg * hmax;

        bool reject = false;
        while (true) {
            if (stats_.steps > cfg_.max_steps) return OdeStatus::too_many_steps;
            if (0.1 * std::abs(h_) <= std::abs(t_) * 2.3e-16) return OdeStatus::step_underflow;

            bool last = false;
            if ((t_ + 1.01 * h_ - t_target) * posneg > 0.0) {
                h_ = t_target - t_;
                last = true;
            }
            ++stats_.steps;
            step12();
            const double err = std::abs(h_) * error_norm();

            const double expo1 = 1.0 / 8.0;
            double fac11 = std::pow(err, expo1);
            double fac = fac11;  // no PI damping (beta = 0)
            fac = std::max(1.0 / 6.0, std::min(3.0, fac / 0.9));
            double hnew = h_ / fac;

            if (err <= 1.0) {
                ++stats_.accepted;
                f_(t_ + h_, k5_.data(), k4_.data());
                ++stats_.evals;
                std::swap(k1_, k4_);
                std::swap(y_, k5_);
                t_ += h_;
                if (!guard(t_, std::span<const double>(y_))) {
                    h_ = hnew;
                    return OdeStatus::halted;
                }
                if (last) {
                    h_ = posneg * std::min(std::abs(hnew), hmax);
                    return OdeStatus::done;
                }
                if (std::abs(hnew) > hmax) hnew = posneg * hmax;
                if (reject) hnew = posneg * std::min(std::abs(hnew), std::abs(h_));
                reject = false;
            } else {
                hnew = h_ / std::min(1.0 / 6.0, fac11 / 0.9);
                reject = true;
                if (stats_.accepted >= 1) ++stats_.rejected;
            }
            h_ = hnew;
        }
    }

    OdeStatus advance_to(double t_target) {
        return advance_to(t_target, [](double, std::span<const double>) { return true; });
    }

private:
    // One 12-stage step of size h_: k5_ receives y(t+h), k4_ the blended slope.
    void step12() {
        const double c2 = 0.526001519587677318785587544488e-1,
                     c3 = 0.789002279381515978178381316732e-1,
                     c4 = 0.118350341907227396726757197510,
                     c5 = 0.281649658092772603273242802490,
                     c6 = 0.333333333333333333333333333333,
                     c7 = 0.25,
                     c8 = 0.307692307692307692307692307692,
                     c9 = 0.651282051282051282051282051282,
                     c10 = 0.6,
                     c11 = 0.857142857142857142857142857142;
        const double b1 = 5.42937341165687622380535766363e-2,
                     b6 = 4.45031289275240888144113950566,
                     b7 = 1.89151789931450038304281599044,
                     b8 = -5.8012039600105847814672114227,
                     b9 = 3.1116436695781989440891606237e-1,
                     b10 = -1.52160949662516078556178806805e-1,
                     b11 = 2.01365400804030348374776537501e-1,
                     b12 = 4.47106157277725905176885569043e-2;
        const double a21 = 5.26001519587677318785587544488e-2,
                     a31 = 1.97250569845378994544595329183e-2,
                     a32 = 5.91751709536136983633785987549e-2,
                     a41 = 2.95875854768068491816892993775e-2,
                     a43 = 8.87627564304205475450678981324e-2,
                     a51 = 2.41365134159266685502369798665e-1,
                     a53 = -8.84549479328286085344864962717e-1,
                     a54 = 9.24834003261792003115737966543e-1,
                     a61 = 3.7037037037037037037037037037e-2,
                     a64 = 1.70828608729473871279604482173e-1,
                     a65 = 1.25467687566822425016691814123e-1,
                     a71 = 3.7109375e-2,
                     a74 = 1.70252211019544039314978060272e-1,
                     a75 = 6.02165389804559606850219397283e-2,
                     a76 = -1.7578125e-2,
                     a81 = 3.70920001185047927108779319836e-2,
                     a84 = 1.70383925712239993810214054705e-1,
                     a85 = 1.07262030446373284651809199168e-1,
                     a86 = -1.53194377486244017527936158236e-2,
                     a87 = 8.27378916381402288758473766002e-3,
                     a91 = 6.24110958716075717114429577812e-1,
                     a94 = -3.36089262944694129406857109825,
                     a95 = -8.68219346841726006818189891453e-1,
                     a96 = 2.75920996994467083049415600797e1,
                     a97 = 2.01540675504778934086186788979e1,
                     a98 = -4.34898841810699588477366255144e1,
                     a101 = 4.77662536438264365890433908527e-1,
                     a104 = -2.48811461997166764192642586468,
                     a105 = -5.90290826836842996371446475743e-1,
                     a106 = 2.12300514481811942347288949897e1,
                     a107 = 1.52792336328824235832596922938e1,
                     a108 = -3.32882109689848629194453265587e1,
                     a109 = -2.03312017085086261358222928593e-2,
                     a111 = -9.3714243008598732571704021658e-1,
                     a114 = 5.18637242884406370830023853209,
                     a115 = 1.09143734899672957818500254654,
                     a116 = -8.14978701074692612513997267357,
                     a117 = -1.85200656599969598641566180701e1,
                     a118 = 2.27394870993505042818970056734e1,
                     a119 = 2.49360555267965238987089396762,
                     a1110 = -3.0467644718982195003823669022,
                     a121 = 2.27331014751653820792359768449,
                     a124 = -1.05344954667372501984066689879e1,
                     a125 = -2.00087205822486249909675718444,
                     a126 = -1.79589318631187989172765950534e1,
                     a127 = 2.79488845294199600508499808837e1,
                     a128 = -2.85899827713502369474065508674,
                     a129 = -8.87285693353062954433549289258,
                     a1210 = 1.23605671757943030647266201528e1,
                     a1211 = 6.43392746015763530355970484046e-1;

        const std::size_t n = n_;
        const double h = h_, t = t_;
        const double* y = y_.data();
        auto eval = [&](double ts, std::vector<double>& out) {
            f_(ts, ytmp_.data(), out.data());
            ++stats_.evals;
        };

        for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y[i] + h * a21 * k1_[i];
        eval(t + c2 * h, k2_);
        for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        eval(t + c3 * h, k3_);
        for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y[i] + h * (a41 * k1_[i] + a43 * k3_[i]);
        eval(t + c4 * h, k4_);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y[i] + h * (a51 * k1_[i] + a53 * k3_[i] + a54 * k4_[i]);
        eval(t + c5 * h, k5_);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y[i] + h * (a61 * k1_[i] + a64 * k4_[i] + a65 * k5_[i]);
        eval(t + c6 * h, k6_);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y[i] + h * (a71 * k1_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
        eval(t + c7 * h, k7_);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y[i] + h * (a81 * k1_[i] + a84 * k4_[i] + a85 * k5_[i] + a86 * k6_[i] +
                                   a87 * k7_[i]);
        eval(t + c8 * h, k8_);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y[i] + h * (a91 * k1_[i] + a94 * k4_[i] + a95 * k5_[i] + a96 * k6_[i] +
                                   a97 * k7_[i] + a98 * k8_[i]);
        eval(t + c9 * h, k9_);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y[i] + h * (a101 * k1_[i] + a104 * k4_[i] + a105 * k5_[i] + a106 * k6_[i] +
                                   a107 * k7_[i] + a108 * k8_[i] + a109 * k9_[i]);
        eval(t + c10 * h, k10_);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y[i] + h * (a111 * k1_[i] + a114 * k4_[i] + a115 * k5_[i] + a116 * k6_[i] +
                                   a117 * k7_[i] + a118 * k8_[i] + a119 * k9_[i] + a1110 * k10_[i]);
        eval(t + c11 * h, k2_);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y[i] + h * (a121 * k1_[i] + a124 * k4_[i] + a125 * k5_[i] + a126 * k6_[i] +
                                   a127 * k7_[i] + a128 * k8_[i] + a129 * k9_[i] + a1210 * k10_[i] +
                                   a1211 * k2_[i]);
        eval(t + h, k3_);

        for (std::size_t i = 0; i < n; ++i) {
            k4_[i] = b1 * k1_[i] + b6 * k6_[i] + b7 * k7_[i] + b8 * k8_[i] + b9 * k9_[i] +
                     b10 * k10_[i] + b11 * k2_[i] + b12 * k3_[i];
            k5_[i] = y[i] + h * k4_[i];
        }
    }

    // Combined 5th/3rd order error estimate of the last step12().
    double error_norm() const {
        const double bhh1 = 0.244094488188976377952755905512,
                     bhh2 = 0.733846688281611857341361741547,
                     bhh3 = 0.220588235294117647058823529412e-1;
        const double er1 = 0.1312004499419488073250102996e-1,
                     er6 = -0.1225156446376204440720569753e1,
                     er7 = -0.4957589496572501915214079952,
                     er8 = 0.1664377182454986536961530415e1,
                     er9 = -0.3503288487499736816886487290,
                     er10 = 0.3341791187130174790297318841,
                     er11 = 0.8192320648511571246570742613e-1,
                     er12 = -0.2235530786388629525884427845e-1;
        double err = 0.0, err2 = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double sk =
                1.0 / (cfg_.abs_tol +
                       cfg_.rel_tol * std::max(std::abs(y_[i]), std::abs(k5_[i])));
            double sqr = k4_[i] - bhh1 * k1_[i] - bhh2 * k9_[i] - bhh3 * k3_[i];
            sqr *= sk;
            err2 += sqr * sqr;
            sqr = er1 * k1_[i] + er6 * k6_[i] + er7 * k7_[i] + er8 * k8_[i] + er9 * k9_[i] +
                  er10 * k10_[i] + er11 * k2_[i] + er12 * k3_[i];
            sqr *= sk;
            err += sqr * sqr;
        }
        double deno = err + 0.01 * err2;
        if (deno <= 0.0) deno = double(n_);
        return err * std::sqrt(1.0 / (deno * double(n_)));
    }

    double estimate_initial_step(double hmax, double posneg) {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y_[i]);
            double sqr = k1_[i] / sk;
            dnf += sqr * sqr;
            sqr = y_[i] / sk;
            dny += sqr * sqr;
        }
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, hmax) * posneg;

        for (std::size_t i = 0; i < n_; ++i) ytmp_[i] = y_[i] + h * k1_[i];
        f_(t_ + h, ytmp_.data(), k2_.data());
        ++stats_.evals;

        double der2 = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y_[i]);
            const double sqr = (k2_[i] - k1_[i]) / sk;
            der2 += sqr * sqr;
        }
        der2 = std::sqrt(der2) / h;

        const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3)
                                         : std::pow(0.01 / der12, 0.125);
        return std::min(100.0 * std::abs(h), std::min(h1, hmax)) * posneg;
    }

    Rhs f_;
    std::size_t n_;
    OdeConfig cfg_;
    double t_ = 0.0, h_ = 0.0;
    bool have_k1_ = false;
    OdeStats stats_;
    std::vector<double> y_, ytmp_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, k8_, k9_, k10_;
};

}  // namespace bkam

#endif
