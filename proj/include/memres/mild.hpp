#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "memres/errors.hpp"
#include "memres/kernel.hpp"
#include "memres/resolvent.hpp"
#include "memres/spectral.hpp"
#include "memres/specfun.hpp"

namespace memres {

struct NonlinearitySpec {
    enum class Kind { zero, power, gradient, forced_linear };
    Kind kind = Kind::zero;
    double c0 = 0.0;
    double rho = 2.0;                   // > 1 for power/gradient
    std::vector<double> forcing_coeffs; // forced_linear: constant coefficient vector

    void validate() const {
        if ((kind == Kind::power || kind == Kind::gradient) && !(rho > 1.0))
            throw config_error("NonlinearitySpec: rho must exceed 1");
    }
};

struct MildProblem {
    const SpectralOperator* op = nullptr;
    MaterialKernel kernel{{{1.0, 1.0, 0.0}}};
    std::vector<double> u0; // coefficients, finite X_1 norm
    NonlinearitySpec f;
    double T = 1.0;
    double h = 1e-3;
    double inner_tol = 1e-10;
    int max_inner = 50;
    double blowup_threshold = 1e8;
    double eps = 0.2;               // diagnostic scale offset
    bool oversample_small_t = false;

    void validate() const {
        if (!op) throw config_error("MildProblem: missing operator");
        if (u0.size() != op->total_modes()) throw config_error("MildProblem: u0 size mismatch");
        if (!(T > 0.0) || !(h > 0.0) || !(h < T)) throw config_error("MildProblem: bad T or h");
        if (!(blowup_threshold > 0.0)) throw config_error("MildProblem: bad threshold");
        f.validate();
        for (double v : u0)
            if (!std::isfinite(v)) throw config_error("MildProblem: non-finite datum");
    }
};

enum class SolveStatus { completed, blowup, inner_divergence };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::completed: return "completed";
        case SolveStatus::blowup: return "blowup";
        default: return "inner-divergence";
    }
}

struct MildSolution {
    std::vector<double> t;
    std::vector<std::vector<double>> states; // [time][mode]
    SolveStatus status = SolveStatus::completed;
    double tau_estimate = -1.0; // blow-up time estimate when status == blowup
    std::string status_detail;
    std::vector<double> norm_x1, norm_x1pe, weighted_profile;
    double eps = 0.0;
    double zeta_g = 0.0;
};

namespace detail {

// d/dx values of a sine-coefficient vector on the refined (2n) grid:
// u_x(x_j) = sum_m c_m sqrt(2/L) (m pi / L) cos(m pi x_j / L).
inline std::vector<double> gradient_on_refined_grid(const SpectralOperator& op,
                                                    const std::vector<double>& coeffs) {
    const auto& cfg = op.config();
    if (cfg.dimension != 1)
        throw config_error("gradient nonlinearity: 1D operators only");
    const int n = cfg.n_modes[0];
    const int N = 2 * n; // refined grid
    const double L = cfg.lengths[0];
    struct CosTable {
        std::vector<double> mat; // m-by-j
    };
    static std::map<std::pair<int, double>, CosTable> cache;
    static std::mutex mx;
    const double* mat;
    {
        std::lock_guard<std::mutex> lock(mx);
        auto key = std::make_pair(n, L);
        auto it = cache.find(key);
        if (it == cache.end()) {
            CosTable tb;
            tb.mat.resize(static_cast<std::size_t>(n) * N);
            for (int m = 1; m <= n; ++m)
                for (int j = 1; j <= N; ++j)
                    tb.mat[static_cast<std::size_t>(m - 1) * N + (j - 1)] =
                        std::sqrt(2.0 / L) * (m * M_PI / L) *
                        std::cos(m * M_PI * j / (N + 1.0));
            it = cache.emplace(key, std::move(tb)).first;
        }
        mat = it->second.mat.data();
    }
    std::vector<double> ux(N, 0.0);
    for (int m = 0; m < n; ++m) {
        const double c = coeffs[m];
        if (c == 0.0) continue;
        const double* row = mat + static_cast<std::size_t>(m) * N;
        for (int j = 0; j < N; ++j) ux[j] += c * row[j];
    }
    return ux;
}

} // namespace detail

// f(u) in coefficient space, pseudo-spectral with 2x dealiasing.
inline std::vector<double> eval_nonlinearity(const SpectralOperator& op,
                                             const NonlinearitySpec& f,
                                             const std::vector<double>& coeffs) {
    switch (f.kind) {
        case NonlinearitySpec::Kind::zero:
            return std::vector<double>(coeffs.size(), 0.0);
        case NonlinearitySpec::Kind::forced_linear: {
            std::vector<double> out(coeffs.size(), 0.0);
            for (std::size_t m = 0; m < out.size() && m < f.forcing_coeffs.size(); ++m)
                out[m] = f.c0 * f.forcing_coeffs[m];
            return out;
        }
        case NonlinearitySpec::Kind::power: {
            const double c0 = f.c0, rho = f.rho;
            return apply_pointwise_dealiased(op, coeffs, [c0, rho](double u) {
                return c0 * std::pow(std::abs(u), rho - 1.0) * u;
            });
        }
        case NonlinearitySpec::Kind::gradient: {
            auto fine = op.refined();
            std::vector<double> ux = detail::gradient_on_refined_grid(op, coeffs);
            for (auto& v : ux) v = f.c0 * std::pow(std::abs(v), f.rho);
            std::vector<double> c = forward_transform(*fine, ux);
            return std::vector<double>(c.begin(), c.begin() + coeffs.size());
        }
    }
    throw config_error("eval_nonlinearity: unknown kind");
}

namespace detail {

inline std::vector<double> mild_grid(const MildProblem& p) {
    const std::size_t J = static_cast<std::size_t>(std::llround(p.T / p.h));
    if (J < 2 || J > 200000) throw config_error("mild solver: T/h out of range");
    std::vector<double> grid;
    if (p.oversample_small_t) {
        // 12 points per decade from 1e-6 T up to the first uniform node
        const double lo = 1e-6 * p.T;
        for (double t = lo; t < p.h * 0.999; t *= std::pow(10.0, 1.0 / 12.0))
            grid.push_back(t);
    }
    for (std::size_t j = 0; j <= J; ++j)
        grid.push_back(p.T * static_cast<double>(j) / static_cast<double>(J));
    grid.erase(std::remove_if(grid.begin(), grid.end(),
                              [](double v) { return v < 0.0; }),
               grid.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-15; }),
               grid.end());
    if (grid.front() != 0.0) grid.insert(grid.begin(), 0.0);
    return grid;
}

} // namespace detail

// Discrete variation of constants on an arbitrary increasing grid:
// u_m(t_j) = s_m(t_j) u0_m + trapezoid_i s_m(t_j - t_i) f_m(t_i),
// endpoint f(t_j) resolved by Picard iteration.
inline MildSolution solve_mild_on_grid(const MildProblem& p, const std::vector<double>& grid) {
    p.validate();
    const SpectralOperator& op = *p.op;
    const std::size_t n = op.total_modes();
    const std::size_t J = grid.size() - 1;
    const auto& mu = op.mu_flat();

    // per-mode scalar resolvent on the solver grid, shared quadrature weights
    VolterraEngine engine(p.kernel, grid);
    std::vector<std::vector<double>> s_tab(n);
    for (std::size_t m = 0; m < n; ++m) s_tab[m] = engine.solve(mu[m]);

    MildSolution sol;
    sol.t = grid;
    sol.eps = p.eps;
    sol.zeta_g = p.kernel.zeta_g();
    sol.states.assign(J + 1, std::vector<double>());
    sol.states[0] = p.u0;
    sol.norm_x1.resize(J + 1);
    sol.norm_x1pe.resize(J + 1);
    sol.weighted_profile.resize(J + 1);

    auto record = [&](std::size_t j) {
        ScaleVector v{sol.states[j], &op};
        sol.norm_x1[j] = scale_norm(v, 1.0);
        sol.norm_x1pe[j] = scale_norm(v, 1.0 + p.eps);
        sol.weighted_profile[j] =
            std::pow(sol.t[j], sol.zeta_g * p.eps) * sol.norm_x1pe[j];
    };
    record(0);

    const bool linear = p.f.kind == NonlinearitySpec::Kind::zero ||
                        p.f.kind == NonlinearitySpec::Kind::forced_linear;
    std::vector<std::vector<double>> fhat(J + 1);
    fhat[0] = eval_nonlinearity(op, p.f, p.u0);

    // interpolation stencil for s_m(t_j - t_i) on the solver grid
    std::vector<std::size_t> ilo(J + 1);
    std::vector<double> iw(J + 1);

    for (std::size_t j = 1; j <= J; ++j) {
        // trapezoid weights over sigma
        // stencil for tau = t_j - t_i
        for (std::size_t i = 0; i <= j; ++i) {
            const double tau = grid[j] - grid[i];
            const auto it = std::upper_bound(grid.begin(), grid.end(), tau);
            std::size_t lo = static_cast<std::size_t>(it - grid.begin());
            lo = (lo == 0) ? 0 : lo - 1;
            if (lo >= J) lo = J - 1;
            ilo[i] = lo;
            iw[i] = (tau - grid[lo]) / (grid[lo + 1] - grid[lo]);
        }
        std::vector<double> known(n, 0.0);
        for (std::size_t m = 0; m < n; ++m) {
            const auto& sm = s_tab[m];
            double acc = 0.0;
            for (std::size_t i = 0; i < j; ++i) {
                const double w =
                    0.5 * ((i == 0 ? grid[1] - grid[0] : grid[i + 1] - grid[i - 1]));
                const double sv = (1.0 - iw[i]) * sm[ilo[i]] + iw[i] * sm[ilo[i] + 1];
                acc += w * sv * fhat[i][m];
            }
            known[m] = sm[j] * p.u0[m] + acc;
        }
        const double w_end = 0.5 * (grid[j] - grid[j - 1]); // s(0) = 1 at the endpoint

        std::vector<double> u = sol.states[j - 1];
        std::vector<double> fj = fhat[j - 1];
        bool converged = linear;
        if (linear) {
            fj = eval_nonlinearity(op, p.f, u);
            for (std::size_t m = 0; m < n; ++m) u[m] = known[m] + w_end * fj[m];
        } else {
            for (int it = 0; it < p.max_inner; ++it) {
                std::vector<double> u_new(n);
                for (std::size_t m = 0; m < n; ++m) u_new[m] = known[m] + w_end * fj[m];
                double diff = 0.0, scale = 0.0;
                {
                    std::vector<double> d(n);
                    for (std::size_t m = 0; m < n; ++m) d[m] = u_new[m] - u[m];
                    ScaleVector dv{d, &op};
                    diff = scale_norm(dv, 1.0);
                    ScaleVector uv{u_new, &op};
                    scale = scale_norm(uv, 1.0);
                }
                u = std::move(u_new);
                if (!std::isfinite(diff) || !std::isfinite(scale)) break;
                if (diff <= p.inner_tol * (1.0 + scale)) {
                    converged = true;
                    break;
                }
                fj = eval_nonlinearity(op, p.f, u);
            }
        }

        sol.states[j] = u;
        fhat[j] = linear ? fj : eval_nonlinearity(op, p.f, u);
        record(j);

        const bool escaped = !(sol.norm_x1pe[j] <= p.blowup_threshold) ||
                             !std::isfinite(sol.norm_x1[j]);
        if (escaped || !converged) {
            // blow-up requires monotone norm growth over the final 5 steps
            bool monotone = j >= 5;
            for (std::size_t k = j; monotone && k + 1 > j - 4 && k > 0; --k)
                if (!(sol.norm_x1pe[k] > sol.norm_x1pe[k - 1])) monotone = false;
            sol.t.resize(j + 1);
            sol.states.resize(j + 1);
            sol.norm_x1.resize(j + 1);
            sol.norm_x1pe.resize(j + 1);
            sol.weighted_profile.resize(j + 1);
            if (escaped && monotone) {
                sol.status = SolveStatus::blowup;
                // log-norm interpolation of the threshold crossing
                const double n0 = sol.norm_x1pe[j - 1], n1 = sol.norm_x1pe[j];
                double w = 1.0;
                if (n1 > n0 && n0 > 0.0 && std::isfinite(n1))
                    w = (std::log(p.blowup_threshold) - std::log(n0)) /
                        (std::log(n1) - std::log(n0));
                w = std::clamp(w, 0.0, 1.0);
                sol.tau_estimate = grid[j - 1] + w * (grid[j] - grid[j - 1]);
                sol.status_detail = "norm escaped threshold";
            } else {
                sol.status = SolveStatus::inner_divergence;
                sol.status_detail = !converged
                                        ? ("Picard iteration failed to contract at t = " +
                                           std::to_string(grid[j]))
                                        : "norm escape without monotone growth";
            }
            return sol;
        }
    }
    sol.status = SolveStatus::completed;
    return sol;
}

inline MildSolution solve_mild(const MildProblem& p) {
    return solve_mild_on_grid(p, detail::mild_grid(p));
}

// Extension retaining the full convolution history; the restriction to the
// original grid reproduces the same discrete operations bitwise.
inline MildSolution continue_mild(const MildSolution& sol, const MildProblem& p, double T2) {
    if (sol.status != SolveStatus::completed)
        throw config_error("continue_mild: can only continue a completed solution");
    if (!(T2 > p.T)) throw config_error("continue_mild: requires T2 > T");
    std::vector<double> grid = sol.t;
    const std::size_t extra = static_cast<std::size_t>(std::ceil((T2 - p.T) / p.h - 1e-9));
    for (std::size_t j = 1; j <= extra; ++j) grid.push_back(std::min(p.T + j * p.h, T2));
    MildProblem p2 = p;
    p2.T = T2;
    return solve_mild_on_grid(p2, grid);
}

// Refine the blow-up time by step halving until 1% stability.
inline double estimate_blowup_time(const MildProblem& p, int max_halvings = 4) {
    MildProblem q = p;
    MildSolution s = solve_mild(q);
    if (s.status != SolveStatus::blowup)
        throw accuracy_error("estimate_blowup_time: run did not blow up");
    double tau = s.tau_estimate;
    for (int k = 0; k < max_halvings; ++k) {
        q.h *= 0.5;
        MildSolution s2 = solve_mild(q);
        if (s2.status != SolveStatus::blowup)
            throw accuracy_error("estimate_blowup_time: status flipped under refinement");
        const double change = std::abs(s2.tau_estimate - tau) / tau;
        tau = s2.tau_estimate;
        if (change < 0.01) break;
    }
    return tau;
}

struct WellPosednessBudget {
    double M = 1.0;      // resolvent bound
    double c = 1.0;      // Lipschitz constant of f
    double rho = 2.0;
    double gamma0 = 0.8; // subcritical index
    double zeta_g = 1.5;
    double x0_norm = 1.0;
    double mu = 1.0;     // smallness parameter in (0, 1]
};

struct ExistenceCertificate {
    double tau = 0.0;
    double r = 0.0;
};

// Certified existence time from the subcritical contraction constants.
inline ExistenceCertificate certified_existence_time(
    const WellPosednessBudget& b, double tau_probe = std::numeric_limits<double>::infinity()) {
    if (!(b.zeta_g > 1.0)) throw std::domain_error("certified_existence_time: zeta_g > 1");
    if (!(b.mu > 0.0) || !(b.mu <= 1.0))
        throw std::domain_error("certified_existence_time: mu in (0,1]");
    const double expo = 1.0 - b.zeta_g * (1.0 - b.gamma0);
    if (!(expo > 0.0))
        throw std::domain_error(
            "certified_existence_time: critical regime gamma0 <= 1 - 1/zeta_g");
    const double R = std::max(2.0 * std::pow(b.x0_norm + b.mu, b.rho - 1.0) + 1.0,
                              std::pow(b.x0_norm + 1.0, b.rho) + 1.0);
    const double B = beta(1.0, expo);
    ExistenceCertificate cert;
    cert.tau = std::min(tau_probe, std::pow(b.mu / (4.0 * b.M * R * b.c * B), 1.0 / expo));
    cert.r = b.mu / (2.0 * b.M);
    return cert;
}

// Largest tau with ||S(t) x0 - x0||_{X_1} <= bound on (0, tau], sampled on a
// geometric grid.
inline double resolvent_probe_time(const SpectralOperator& op, const MaterialKernel& kernel,
                                   const std::vector<double>& x0, double bound,
                                   double t_hi = 1.0, int n_samples = 60) {
    std::vector<double> grid(n_samples);
    const double t_lo = t_hi * 1e-6;
    for (int i = 0; i < n_samples; ++i)
        grid[i] = t_lo * std::pow(t_hi / t_lo, i / (n_samples - 1.0));
    const auto tables = build_mode_tables(kernel, op.mu_flat(), grid);
    const auto& mu = op.mu_flat();
    for (int i = 0; i < n_samples; ++i) {
        double acc = 0.0;
        for (std::size_t m = 0; m < mu.size(); ++m) {
            const double d = (tables.s[m][i] - 1.0) * x0[m];
            const double w = std::pow(1.0 + mu[m], 1.0 - op.delta());
            acc += w * w * d * d;
        }
        if (std::sqrt(acc) > bound) return i == 0 ? t_lo : grid[i - 1];
    }
    return grid.back();
}

struct EpsProfile {
    std::vector<double> t, profile;
    bool pass = false;
};

// Weighted small-time profile t^{zeta eps} ||u(t)||_{X_{1+eps}}; PASS when
// the smallest sampled value sits below 5% of the value near t = 0.1 T.
inline EpsProfile eps_regular_profile(const SpectralOperator& op, const MildSolution& sol,
                                      double eps, double zeta_g) {
    if (sol.t.size() < 3) throw config_error("eps_regular_profile: too few samples");
    if (sol.t[1] > 1e-3 * sol.t.back())
        throw config_error("eps_regular_profile: no small-t refinement present");
    EpsProfile out;
    out.t.reserve(sol.t.size() - 1);
    out.profile.reserve(sol.t.size() - 1);
    for (std::size_t j = 1; j < sol.t.size(); ++j) {
        ScaleVector v{sol.states[j], &op};
        out.t.push_back(sol.t[j]);
        out.profile.push_back(std::pow(sol.t[j], zeta_g * eps) * scale_norm(v, 1.0 + eps));
    }
    const double t_ref = 0.1 * sol.t.back();
    std::size_t j_ref = 0;
    for (std::size_t j = 1; j < out.t.size(); ++j)
        if (std::abs(out.t[j] - t_ref) < std::abs(out.t[j_ref] - t_ref)) j_ref = j;
    out.pass = out.profile.front() <= 0.05 * out.profile[j_ref];
    return out;
}

struct LipschitzReport {
    double ratio_max = 0.0;
    bool warned = false; // theta beyond the admissible window
};

// sup over t > 0 of t^{zeta theta} ||u(t;x0) - u(t;x1)||_{X_{1+theta}} /
// ||x0 - x1||_{X_1}.
inline LipschitzReport lipschitz_dependence(
    const MildProblem& base, const std::vector<double>& x0, const std::vector<double>& x1,
    double theta, double theta_sup = std::numeric_limits<double>::infinity()) {
    MildProblem p0 = base, p1 = base;
    p0.u0 = x0;
    p1.u0 = x1;
    MildSolution s0 = solve_mild(p0), s1 = solve_mild(p1);
    if (s0.status != SolveStatus::completed || s1.status != SolveStatus::completed)
        throw accuracy_error("lipschitz_dependence: a run did not complete");
    const SpectralOperator& op = *base.op;
    std::vector<double> d0(x0.size());
    for (std::size_t m = 0; m < x0.size(); ++m) d0[m] = x0[m] - x1[m];
    ScaleVector dv{d0, &op};
    const double denom = scale_norm(dv, 1.0);
    if (!(denom > 0.0)) throw config_error("lipschitz_dependence: identical data");
    const double zeta = base.kernel.zeta_g();
    LipschitzReport rep;
    rep.warned = theta >= theta_sup;
    for (std::size_t j = 1; j < s0.t.size(); ++j) {
        std::vector<double> d(x0.size());
        for (std::size_t m = 0; m < x0.size(); ++m)
            d[m] = s0.states[j][m] - s1.states[j][m];
        ScaleVector v{d, &op};
        const double r = std::pow(s0.t[j], zeta * theta) * scale_norm(v, 1.0 + theta) / denom;
        rep.ratio_max = std::max(rep.ratio_max, r);
    }
    return rep;
}

// Solution CSV: one row per retained time node.
inline void export_solution_csv(std::ostream& os, const MildSolution& sol) {
    os << "# schema=1\n";
    os << "t,norm_X1,norm_X1pe,weighted_profile,status\n";
    for (std::size_t j = 0; j < sol.t.size(); ++j)
        os << sol.t[j] << ',' << sol.norm_x1[j] << ',' << sol.norm_x1pe[j] << ','
           << sol.weighted_profile[j] << ',' << to_string(sol.status) << '\n';
}

// Coefficient dump: NPY version 1.0, little-endian float64, C order,
// shape (n_modes, n_times) -- modes major, time minor.
inline void export_solution_npy(std::ostream& os, const MildSolution& sol) {
    const std::size_t n_t = sol.t.size();
    const std::size_t n_m = sol.states.empty() ? 0 : sol.states[0].size();
    std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(n_m) + ", " + std::to_string(n_t) + "), }";
    const std::size_t header = 10 + dict.size() + 1;
    const std::size_t pad = (64 - header % 64) % 64;
    dict.append(pad, ' ');
    dict.push_back('\n');
    const std::uint16_t hlen = static_cast<std::uint16_t>(dict.size());
    os.write("\x93NUMPY\x01\x00", 8);
    os.put(static_cast<char>(hlen & 0xff));
    os.put(static_cast<char>(hlen >> 8));
    os.write(dict.data(), static_cast<std::streamsize>(dict.size()));
    for (std::size_t m = 0; m < n_m; ++m)
        for (std::size_t j = 0; j < n_t; ++j) {
            const double v = sol.states[j][m];
            os.write(reinterpret_cast<const char*>(&v), sizeof(double));
        }
}

} // namespace memres
