#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "memres/errors.hpp"
#include "memres/kernel.hpp"
#include "memres/spectral.hpp"

namespace memres {

// Scalar resolvent s_mu on a time grid, s_mu(0) = 1.
struct ScalarResolventTable {
    double mu = 0.0;
    std::vector<double> t;
    std::vector<double> s;
    std::string method;           // "volterra" | "talbot" | "profile"
    double error_estimate = 0.0;  // Richardson estimate where available
};

struct ResolventConstants {
    double M = 1.0;
    double omega = 0.0;
    double zeta_g = 1.0;
    double t_min = 0.0, t_max = 0.0;
};

namespace detail {

inline bool grid_is_uniform(const std::vector<double>& t) {
    if (t.size() < 3) return true;
    const double h = t[1] - t[0];
    for (std::size_t j = 1; j + 1 < t.size(); ++j)
        if (std::abs((t[j + 1] - t[j]) - h) > 1e-12 * (1.0 + h)) return false;
    return true;
}

} // namespace detail

// Product-trapezoidal weights for the convolution with a = 1*g on a fixed
// grid: the solution is piecewise linear, the kernel is integrated exactly
// through its closed-form cell moments.  Weights are kernel-level and shared
// across eigenvalues.
class VolterraEngine {
public:
    VolterraEngine(const MaterialKernel& kernel, std::vector<double> grid,
                   double overflow_cap = 1e15)
        : kernel_(kernel), t_(std::move(grid)), cap_(overflow_cap) {
        if (t_.size() < 2 || t_[0] != 0.0)
            throw config_error("VolterraEngine: grid must start at 0 with >= 2 nodes");
        for (std::size_t j = 1; j < t_.size(); ++j)
            if (!(t_[j] > t_[j - 1])) throw config_error("VolterraEngine: grid not increasing");
        const std::size_t J = t_.size() - 1;
        uniform_ = detail::grid_is_uniform(t_);
        if (uniform_) {
            const double h = t_[1] - t_[0];
            A1_.resize(J + 1);
            B1_.resize(J + 1);
            for (std::size_t k = 0; k <= J; ++k) {
                A1_[k] = kernel.primitive_a(k * h);
                B1_[k] = kernel.moment_a(k * h);
            }
        } else {
            if (J > 4000)
                throw config_error("VolterraEngine: nonuniform grid too large (> 4000 steps)");
            // triangular (j,i) tables, j = 1..J, i = 0..j-1
            m0_.resize(J * (J + 1) / 2);
            m1_.resize(m0_.size());
            for (std::size_t j = 1; j <= J; ++j) {
                const std::size_t base = (j - 1) * j / 2;
                for (std::size_t i = 0; i < j; ++i) {
                    const double u = t_[j] - t_[i + 1];
                    const double v = t_[j] - t_[i];
                    const double M0 = kernel.primitive_a(v) - kernel.primitive_a(u);
                    const double M1 = v * M0 - (kernel.moment_a(v) - kernel.moment_a(u));
                    m0_[base + i] = M0;
                    m1_[base + i] = M1;
                }
            }
        }
    }

    const std::vector<double>& grid() const { return t_; }
    const MaterialKernel& kernel() const { return kernel_; }

    // s(t) = 1 - mu * int_0^t a(t - sigma) s(sigma) dsigma
    std::vector<double> solve(double mu) const {
        if (mu < 0.0) throw std::domain_error("VolterraEngine: requires mu >= 0");
        const std::size_t J = t_.size() - 1;
        std::vector<double> s(J + 1);
        s[0] = 1.0;
        for (std::size_t j = 1; j <= J; ++j) {
            double acc = 0.0;     // known part of the convolution
            double w_diag = 0.0;  // coefficient of the unknown s_j
            if (uniform_) {
                for (std::size_t i = 0; i < j; ++i) {
                    const std::size_t k = j - i;
                    const double M0 = A1_[k] - A1_[k - 1];
                    const double hi = t_[i + 1] - t_[i];
                    const double M1 = t_[k] * M0 - (B1_[k] - B1_[k - 1]);
                    const double w1 = M1 / hi;
                    acc += s[i] * (M0 - w1);
                    if (i + 1 == j)
                        w_diag = w1;
                    else
                        acc += s[i + 1] * w1;
                }
            } else {
                const std::size_t base = (j - 1) * j / 2;
                for (std::size_t i = 0; i < j; ++i) {
                    const double hi = t_[i + 1] - t_[i];
                    const double w1 = m1_[base + i] / hi;
                    acc += s[i] * (m0_[base + i] - w1);
                    if (i + 1 == j)
                        w_diag = w1;
                    else
                        acc += s[i + 1] * w1;
                }
            }
            s[j] = (1.0 - mu * acc) / (1.0 + mu * w_diag);
            if (!(std::abs(s[j]) <= cap_))
                throw accuracy_error("VolterraEngine: |s| overflow at t = " +
                                     std::to_string(t_[j]));
        }
        return s;
    }

private:
    MaterialKernel kernel_;
    std::vector<double> t_;
    double cap_;
    bool uniform_ = false;
    std::vector<double> A1_, B1_;   // uniform fast path, indexed by k = j - i
    std::vector<double> m0_, m1_;   // nonuniform triangular tables
};

// Uniform-grid product-trapezoidal solve with a step-halving Richardson
// error estimate.
inline ScalarResolventTable scalar_resolvent_volterra(const MaterialKernel& kernel, double mu,
                                                      double h, double T,
                                                      bool estimate_error = true) {
    if (!(h > 0.0) || !(T > 0.0)) throw std::domain_error("scalar_resolvent_volterra: h, T > 0");
    const std::size_t J = static_cast<std::size_t>(std::llround(T / h));
    if (J < 1 || J > 1000000)
        throw config_error("scalar_resolvent_volterra: T/h out of range");
    std::vector<double> grid(J + 1);
    for (std::size_t j = 0; j <= J; ++j) grid[j] = T * static_cast<double>(j) / J;
    VolterraEngine eng(kernel, grid);
    ScalarResolventTable tab;
    tab.mu = mu;
    tab.t = std::move(grid);
    tab.s = eng.solve(mu);
    tab.method = "volterra";
    if (estimate_error && J >= 4) {
        std::vector<double> coarse(J / 2 + 1);
        for (std::size_t j = 0; j < coarse.size(); ++j) coarse[j] = tab.t[2 * j];
        VolterraEngine eng2(kernel, coarse);
        const auto s2 = eng2.solve(mu);
        double d = 0.0;
        for (std::size_t j = 0; j < s2.size(); ++j)
            d = std::max(d, std::abs(s2[j] - tab.s[2 * j]));
        tab.error_estimate = d / 3.0; // second-order Richardson
    }
    return tab;
}

// Characteristic frequency of the mode: the positive root of r = mu |ghat(r)|,
// the scale at which the resolvent symbol turns over.
inline double characteristic_rate(const MaterialKernel& kernel, double mu) {
    if (mu <= 0.0) return 0.0;
    const double w0 = kernel.omega0();
    auto excess = [&](double r) {
        // probe on the real ray right of all poles
        return std::log(r) - std::log(mu * std::abs(kernel.laplace_g(
                                 std::complex<double>(w0 + r, 0.0))));
    };
    double lo = 1e-8, hi = 1e8;
    if (excess(lo) > 0.0) return lo;
    if (excess(hi) < 0.0) return hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        (excess(mid) > 0.0 ? hi : lo) = mid;
        if (hi / lo < 1.0 + 1e-12) break;
    }
    return std::sqrt(lo * hi);
}

struct TalbotResult {
    double value = 0.0;
    double imag_residual = 0.0;
    int nodes = 0;
};

struct TalbotOptions {
    int n_nodes = 32;        // starting node count, doubled until agreement
    double tol = 1e-8;
    int max_doublings = 7;
    double shift = -1.0;     // contour vertex; < 0 means omega0 of the kernel
};

namespace detail {

// One trapezoidal pass over the modified Talbot contour
// lambda = shift + (N/t)(0.5017 th cot(0.6407 th) - 0.6122 + 0.2645 i th).
inline std::complex<double> talbot_pass(const MaterialKernel& kernel, double mu, double t,
                                        double shift, int N) {
    const double a1 = 0.5017, a2 = 0.6407, a3 = 0.6122, a4 = 0.2645;
    const double scale = N / t;
    std::complex<double> sum = 0.0;
    for (int k = 0; k < N; ++k) {
        const double th = -M_PI + (k + 0.5) * (2.0 * M_PI / N);
        const double x = a2 * th;
        const double cot = std::cos(x) / std::sin(x);
        const std::complex<double> lam =
            shift + scale * std::complex<double>(a1 * th * cot - a3, a4 * th);
        const std::complex<double> dlam =
            scale * std::complex<double>(a1 * (cot - x / (std::sin(x) * std::sin(x))), a4);
        const std::complex<double> denom = lam + mu * kernel.laplace_g(lam);
        if (std::abs(denom) < 1e-10 * (1.0 + std::abs(lam)))
            throw contour_error("talbot: contour node near a zero of lambda + mu ghat");
        sum += std::exp(lam * t) / denom * dlam;
    }
    return sum * std::complex<double>(0.0, -1.0) / static_cast<double>(N);
}

} // namespace detail

// Bromwich inversion of shat(lambda) = 1/(lambda + mu ghat(lambda)) on a
// modified Talbot contour right of omega0, node-doubling until agreement.
inline TalbotResult scalar_resolvent_talbot(const MaterialKernel& kernel, double mu, double t,
                                            TalbotOptions opts = {}) {
    if (!(t > 0.0)) throw std::domain_error("scalar_resolvent_talbot: requires t > 0");
    if (mu < 0.0) throw std::domain_error("scalar_resolvent_talbot: requires mu >= 0");
    if (opts.n_nodes < 16) throw config_error("scalar_resolvent_talbot: n_nodes >= 16");
    const double shift = opts.shift >= 0.0 ? opts.shift : kernel.omega0();

    // the contour's horizontal asymptote (|Im| ~ 0.831 N / t) must clear the
    // characteristic frequency, otherwise singularities leak outside
    int N = opts.n_nodes;
    const double rate = characteristic_rate(kernel, mu);
    while (0.831 * N / t < 1.3 * rate && N < (1 << 18)) N *= 2;
    if (0.831 * N / t < 1.3 * rate)
        throw accuracy_error("talbot: mode frequency too high for the contour budget");

    std::complex<double> prev;
    try {
        prev = detail::talbot_pass(kernel, mu, t, shift, N);
    } catch (const std::domain_error& e) {
        throw contour_error(std::string("talbot: ") + e.what());
    }
    for (int d = 0; d < opts.max_doublings; ++d) {
        N *= 2;
        std::complex<double> cur;
        try {
            cur = detail::talbot_pass(kernel, mu, t, shift, N);
        } catch (const std::domain_error& e) {
            throw contour_error(std::string("talbot: ") + e.what());
        }
        if (std::abs(cur - prev) <= opts.tol * (1.0 + std::abs(cur))) {
            TalbotResult r;
            r.value = cur.real();
            r.imag_residual = std::abs(cur.imag());
            r.nodes = N;
            return r;
        }
        prev = cur;
    }
    throw accuracy_error("talbot: node doubling did not reach tolerance");
}

// Universal profile phi for single-power-term kernels with c = 0:
// s_mu(t) = phi(rate(mu) t), rate(mu) = (mu k Gamma(alpha))^{1/zeta_g}.
// Built once per kernel by a graded-grid Volterra solve; the tail is only
// meaningful when the oscillatory part decays (zeta_g < 1.9).
class ScalingProfile {
public:
    ScalingProfile(const MaterialKernel& kernel, double x_max) {
        if (!kernel.is_scaling())
            throw config_error("ScalingProfile: kernel is not a single power term");
        const auto& tm = kernel.terms()[0];
        zeta_ = 1.0 + tm.alpha;
        lead_ = tm.k * gamma_fn(tm.alpha);
        x_max_ = std::max(x_max, 1.0);

        // the grid is only solved out to x_solve; past that point the
        // oscillatory part has died off and the algebraic tail C x^{-zeta}
        // carries the extrapolation, so huge x_max costs nothing
        const double dx = 0.02;
        const double x_solve = std::min(x_max_, 120.0);
        const double x_knee = std::min(40.0, x_solve);
        if (zeta_ >= 1.9 && x_max_ > 400.0)
            throw accuracy_error("ScalingProfile: undamped oscillation, tail grid unaffordable");
        std::vector<double> grid;
        grid.push_back(0.0);
        for (double x = dx; x <= x_knee + 2.5 * dx; x += dx) grid.push_back(x);
        if (x_solve > x_knee) {
            double x = grid.back();
            while (x < x_solve) {
                x *= 1.02;
                grid.push_back(std::min(x, x_solve * 1.02));
            }
        }
        // normalized kernel: rate = 1  <=>  mu = 1 / (k Gamma(alpha))
        VolterraEngine eng(kernel, grid);
        x_ = eng.grid();
        phi_ = eng.solve(1.0 / lead_);
    }

    double zeta() const { return zeta_; }
    double x_max() const { return x_max_; }
    double rate(double mu) const { return std::pow(mu * lead_, 1.0 / zeta_); }

    double operator()(double x) const {
        if (x <= 0.0) return 1.0;
        if (x >= x_.back()) {
            // algebraic tail phi ~ C / x^zeta continued from the last nodes
            const double ref = phi_.back();
            return ref * std::pow(x_.back() / x, zeta_);
        }
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
        const double w = (x - x_[i]) / (x_[i + 1] - x_[i]);
        return (1.0 - w) * phi_[i] + w * phi_[i + 1];
    }

    double value(double mu, double t) const { return (*this)(rate(mu) * t); }

private:
    double zeta_ = 0.0, lead_ = 0.0, x_max_ = 0.0;
    std::vector<double> x_, phi_;
};

// Per-mode scalar resolvent values on a common sample grid.
struct ModeTableSet {
    std::vector<double> grid; // sample times, ascending, > 0 allowed at front
    std::vector<double> mus;
    std::vector<std::vector<double>> s; // [mode][time]
    std::string method;
};

// Build tables for many eigenvalues at once.  Scaling kernels go through the
// universal profile; generic kernels get a per-mode uniform Volterra solve
// with a frequency-resolved step.
inline ModeTableSet build_mode_tables(const MaterialKernel& kernel,
                                      const std::vector<double>& mus,
                                      const std::vector<double>& sample_times) {
    if (sample_times.empty()) throw config_error("build_mode_tables: empty sample grid");
    for (std::size_t i = 0; i + 1 < sample_times.size(); ++i)
        if (!(sample_times[i] < sample_times[i + 1]))
            throw config_error("build_mode_tables: sample grid not increasing");
    ModeTableSet set;
    set.grid = sample_times;
    set.mus = mus;
    set.s.assign(mus.size(), std::vector<double>(sample_times.size()));
    const double t_max = sample_times.back();

    if (kernel.is_scaling()) {
        double mu_max = 0.0;
        for (double m : mus) mu_max = std::max(mu_max, m);
        ScalingProfile profile(kernel, std::max(1.0, characteristic_rate(kernel, mu_max) * t_max));
        for (std::size_t m = 0; m < mus.size(); ++m)
            for (std::size_t j = 0; j < sample_times.size(); ++j)
                set.s[m][j] = profile.value(mus[m], sample_times[j]);
        set.method = "profile";
        return set;
    }

    for (std::size_t m = 0; m < mus.size(); ++m) {
        const double rate = characteristic_rate(kernel, mus[m]);
        double h = std::min(sample_times.front() / 30.0, t_max / 200.0);
        if (rate > 0.0) h = std::min(h, 0.05 / rate);
        const std::size_t J = static_cast<std::size_t>(std::ceil(t_max / h));
        if (J > 200000)
            throw accuracy_error("build_mode_tables: generic kernel needs too fine a grid; "
                                 "mode frequency out of reach");
        const auto tab = scalar_resolvent_volterra(kernel, mus[m], t_max / J, t_max, false);
        // sample by linear interpolation on the uniform table
        for (std::size_t j = 0; j < sample_times.size(); ++j) {
            const double tj = sample_times[j];
            const double pos = tj / (t_max / J);
            const std::size_t i = std::min(static_cast<std::size_t>(pos), J - 1);
            const double w = pos - i;
            set.s[m][j] = (1.0 - w) * tab.s[i] + w * tab.s[i + 1];
        }
    }
    set.method = "volterra";
    return set;
}

// Exact X_gamma -> X_{1+theta} operator norm of the diagonal resolvent:
// sup_m (1+mu_m)^{(1+theta)-gamma} |s_m(t)|.
inline double operator_smoothing_norm(const ModeTableSet& tables, std::size_t t_index,
                                      double gamma, double theta) {
    if (t_index >= tables.grid.size())
        throw config_error("operator_smoothing_norm: t not on the table grid");
    if (!(theta >= 0.0) || !(theta <= gamma) || !(gamma <= 1.0))
        throw std::domain_error("operator_smoothing_norm: requires 0 <= theta <= gamma <= 1");
    const double e = (1.0 + theta) - gamma;
    double sup = 0.0;
    for (std::size_t m = 0; m < tables.mus.size(); ++m)
        sup = std::max(sup, std::pow(1.0 + tables.mus[m], e) * std::abs(tables.s[m][t_index]));
    return sup;
}

struct SmoothingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    std::vector<double> t, norm;
};

// Least-squares slope of log ||S(t)||_{gamma -> 1+theta} against log t on a
// geometric grid; the theoretical target is -zeta_g (1 + theta - gamma).
inline SmoothingFit fit_smoothing_rate(const SpectralOperator& op, const MaterialKernel& kernel,
                                       double gamma, double theta, double t_min, double t_max,
                                       int n_samples) {
    if (!(t_min > 0.0) || !(t_min < t_max))
        throw std::domain_error("fit_smoothing_rate: requires 0 < t_min < t_max");
    if (n_samples < 4) throw config_error("fit_smoothing_rate: n_samples >= 4");
    const double zeta = kernel.zeta_g();
    const double e = 1.0 + theta - gamma;
    if (e > 0.0 && std::pow(1.0 + op.mu_max(), e) < 10.0 * std::pow(t_min, -zeta * e))
        throw accuracy_error("fit_smoothing_rate: truncated spectrum cannot exhibit the rate "
                             "(resolution guard)");
    std::vector<double> grid(n_samples);
    for (int i = 0; i < n_samples; ++i)
        grid[i] = t_min * std::pow(t_max / t_min, i / (n_samples - 1.0));
    const auto tables = build_mode_tables(kernel, op.eigenvalues(), grid);

    SmoothingFit fit;
    fit.t = grid;
    fit.norm.resize(grid.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        fit.norm[i] = operator_smoothing_norm(tables, i, gamma, theta);
        const double x = std::log(grid[i]);
        const double y = std::log(fit.norm[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(grid.size());
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = std::log(fit.norm[i]) - (fit.intercept + fit.slope * std::log(grid[i]));
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / n);
    return fit;
}

// Empirical exponential-bound constants for a computed table.
inline ResolventConstants fit_resolvent_constants(const ScalarResolventTable& table,
                                                  const MaterialKernel& kernel) {
    ResolventConstants rc;
    rc.omega = kernel.omega0();
    rc.zeta_g = kernel.zeta_g();
    rc.t_min = table.t.front();
    rc.t_max = table.t.back();
    double m = 1.0;
    for (std::size_t j = 0; j < table.s.size(); ++j)
        m = std::max(m, std::abs(table.s[j]) * std::exp(-rc.omega * table.t[j]));
    rc.M = m;
    return rc;
}

inline void export_table_csv(std::ostream& os, const ScalarResolventTable& table,
                             const std::string& kernel_id) {
    os << "# schema=1\n";
    os << "t,s_mu,method,mu,kernel_id\n";
    os.precision(17);
    for (std::size_t j = 0; j < table.t.size(); ++j)
        os << table.t[j] << ',' << table.s[j] << ',' << table.method << ',' << table.mu << ','
           << kernel_id << '\n';
}

} // namespace memres
