// End-to-end acceptance checks; one line per criterion, nonzero exit on any
// failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "memres/exponents.hpp"
#include "memres/kernel.hpp"
#include "memres/mild.hpp"
#include "memres/resolvent.hpp"
#include "memres/specfun.hpp"
#include "memres/spectral.hpp"

using namespace memres;

namespace {

int failures = 0;

void report(int idx, const char* name, bool ok, double seconds) {
    std::printf("criterion %2d (%s): %s  [%.1fs]\n", idx, name, ok ? "PASS" : "FAIL", seconds);
    if (!ok) ++failures;
}

void run(int idx, const char* name, const std::function<bool()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = body();
    } catch (const std::exception& e) {
        std::printf("  exception: %s\n", e.what());
        ok = false;
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(idx, name, ok, dt);
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

SpectralOperator op1d(int n, double L) {
    OperatorConfig c;
    c.dimension = 1;
    c.lengths[0] = L;
    c.n_modes[0] = n;
    return SpectralOperator(c);
}

// --- criterion bodies -------------------------------------------------------

bool kernel_class_fidelity() {
    bool ok = true;
    struct Case {
        const char* spec;
        double zeta, omega0;
        HypothesisStatus want;
    };
    const Case cases[] = {
        {"hookean", 2.0, 0.0, HypothesisStatus::DEGENERATE},
        {"maxwell", 2.0, 0.0, HypothesisStatus::DEGENERATE},
        {"sum:[{1,1,-1},{0.5,0.5,0}]", 1.5, 0.0, HypothesisStatus::DEGENERATE},
        {"power:alpha=0.25", 1.25, 0.0, HypothesisStatus::PASS},
        {"power:alpha=0.5", 1.5, 0.0, HypothesisStatus::PASS},
    };
    for (const auto& c : cases) {
        MaterialKernel k = parse_kernel(c.spec);
        SectorReport rep = check_hypotheses(k, 0.0);
        const double eta_want =
            ((1.0 - k.alpha_max()) * M_PI / 2.0 - 0.0) / (1.0 + k.alpha_max());
        ok = ok && rep.zeta_g == c.zeta && rep.omega0 == c.omega0 &&
             close(rep.eta0, eta_want, 1e-15) && rep.status == c.want;
    }
    ok = ok && check_hypotheses(parse_kernel("power:alpha=1.2"), 0.0).status ==
                   HypothesisStatus::FAIL;
    return ok;
}

bool cosine_oracle() {
    MaterialKernel hook = parse_kernel("hookean");
    bool ok = true;
    for (double mu : {1.0, 4.0, 25.0}) {
        ScalarResolventTable tab = scalar_resolvent_volterra(hook, mu, 1e-3, 1.0);
        double worst = 0.0;
        for (std::size_t j = 0; j < tab.t.size(); ++j)
            worst = std::max(worst, std::abs(tab.s[j] - std::cos(std::sqrt(mu) * tab.t[j])));
        ok = ok && worst <= 1e-5;
    }
    // convergence order from errors at h and h/2 against the oracle
    double errs[2];
    const double hs[2] = {2e-3, 1e-3};
    for (int i = 0; i < 2; ++i) {
        ScalarResolventTable tab = scalar_resolvent_volterra(hook, 4.0, hs[i], 1.0, false);
        double worst = 0.0;
        for (std::size_t j = 0; j < tab.t.size(); ++j)
            worst = std::max(worst, std::abs(tab.s[j] - std::cos(2.0 * tab.t[j])));
        errs[i] = worst;
    }
    const double order = std::log2(errs[0] / errs[1]);
    return ok && order >= 1.8 && order <= 2.2;
}

bool ml_oracle() {
    bool ok = true;
    for (double alpha : {0.25, 0.5, 0.75}) {
        MaterialKernel k = parse_kernel("power:alpha=" + std::to_string(alpha));
        const double zeta = 1.0 + alpha;
        for (double mu : {1.0, 10.0}) {
            ScalarResolventTable tab = scalar_resolvent_volterra(k, mu, 1e-3, 1.0);
            double worst = 0.0;
            for (std::size_t j = 0; j < tab.t.size(); ++j)
                worst = std::max(worst,
                                 std::abs(tab.s[j] -
                                          mittag_leffler(zeta, -mu * std::pow(tab.t[j], zeta))));
            ok = ok && worst <= 1e-5;
        }
    }
    return ok;
}

bool cross_method() {
    bool ok = true;
    for (const char* spec :
         {"power:alpha=0.25", "power:alpha=0.5", "power:alpha=0.75", "maxwell"}) {
        MaterialKernel k = parse_kernel(spec);
        for (double mu : {1.0, 10.0}) {
            ScalarResolventTable tab = scalar_resolvent_volterra(k, mu, 2e-4, 1.0);
            for (double t : {0.1, 0.5, 1.0}) {
                const std::size_t j = static_cast<std::size_t>(std::llround(t / 2e-4));
                const double tv = scalar_resolvent_talbot(k, mu, t).value;
                ok = ok && std::abs(tv - tab.s[j]) <= 1e-6;
            }
        }
    }
    return ok;
}

bool smoothing_rate() {
    SpectralOperator op = op1d(4096, M_PI);
    MaterialKernel k = parse_kernel("power:alpha=0.5");
    const struct {
        double gamma, theta, target;
    } cases[] = {{0.0, 0.0, -1.5}, {0.5, 0.0, -0.75}, {0.75, 0.25, -0.75}};
    bool ok = true;
    for (const auto& c : cases) {
        SmoothingFit fit = fit_smoothing_rate(op, k, c.gamma, c.theta, 1e-3, 1e-1, 25);
        ok = ok && close(fit.slope, c.target, 0.1);
    }
    return ok;
}

bool log_continuity() {
    MaterialKernel k = parse_kernel("power:alpha=0.5");
    const double gamma = 0.5, theta = 0.0, zeta = 1.5;
    std::vector<double> mus;
    for (int m = 1; m <= 128; ++m) mus.push_back(static_cast<double>(m) * m);
    std::vector<double> times;
    for (int i = 0; i <= 80; ++i) times.push_back(0.005 * std::pow(200.0, i / 80.0));
    ModeTableSet set = build_mode_tables(k, mus, times);
    std::mt19937 rng(1234);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(times.size()) - 1);
    double ratio_max = 0.0;
    int pairs = 0;
    while (pairs < 50) {
        int i0 = pick(rng), i1 = pick(rng);
        if (i0 == i1) continue;
        if (i0 > i1) std::swap(i0, i1);
        double diff = 0.0;
        for (std::size_t m = 0; m < mus.size(); ++m)
            diff = std::max(diff, std::pow(1.0 + mus[m], 1.0 + theta - gamma) *
                                      std::abs(set.s[m][i1] - set.s[m][i0]));
        const double bound = std::pow(std::log(times[i1] / times[i0]), gamma - theta) *
                             std::pow(times[i0], -zeta * (1.0 + theta - gamma));
        ratio_max = std::max(ratio_max, diff / bound);
        ++pairs;
    }
    return std::isfinite(ratio_max) && ratio_max < 50.0;
}

bool mild_consistency() {
    SpectralOperator op = op1d(16, M_PI);
    // f = 0 against the engine's own tables
    MildProblem p;
    p.op = &op;
    p.kernel = parse_kernel("power:alpha=0.5");
    p.u0.assign(16, 0.0);
    for (std::size_t m = 0; m < 16; ++m) p.u0[m] = 1.0 / (1.0 + m);
    p.T = 1.0;
    p.h = 1e-2;
    MildSolution sol = solve_mild(p);
    if (sol.status != SolveStatus::completed) return false;
    VolterraEngine engine(p.kernel, sol.t);
    double worst0 = 0.0;
    for (std::size_t m = 0; m < 16; ++m) {
        std::vector<double> s = engine.solve(op.mu_flat()[m]);
        for (std::size_t j = 0; j < sol.t.size(); ++j)
            worst0 = std::max(worst0, std::abs(sol.states[j][m] - s[j] * p.u0[m]));
    }
    bool ok = worst0 <= 1e-12;

    // forced linear vs the hookean closed form, 5 h^2
    {
        MildProblem f = p;
        f.kernel = parse_kernel("hookean");
        f.h = 2e-3;
        f.u0.assign(16, 0.0);
        f.u0[1] = 0.7;
        f.f.kind = NonlinearitySpec::Kind::forced_linear;
        f.f.c0 = 1.0;
        f.f.forcing_coeffs.assign(16, 0.0);
        f.f.forcing_coeffs[1] = 0.3;
        MildSolution fs = solve_mild(f);
        double worst = 0.0;
        for (std::size_t j = 0; j < fs.t.size(); ++j) {
            const double t = fs.t[j];
            const double exact = 0.7 * std::cos(2.0 * t) + 0.15 * std::sin(2.0 * t);
            worst = std::max(worst, std::abs(fs.states[j][1] - exact));
        }
        ok = ok && worst <= 5.0 * f.h * f.h;
    }

    // nonlinear step-halving order in the admissible region
    {
        MildProblem q = p;
        q.f.kind = NonlinearitySpec::Kind::power;
        q.f.c0 = 0.5;
        q.f.rho = 2.0;
        for (std::size_t m = 0; m < 16; ++m) q.u0[m] = 0.5 / std::pow(1.0 + m, 2.0);
        double end[3];
        const double hs[3] = {8e-3, 4e-3, 2e-3};
        for (int i = 0; i < 3; ++i) {
            MildProblem r = q;
            r.h = hs[i];
            MildSolution s = solve_mild(r);
            if (s.status != SolveStatus::completed) return false;
            end[i] = s.norm_x1.back();
        }
        const double order = std::log2(std::abs(end[0] - end[1]) / std::abs(end[1] - end[2]));
        ok = ok && order >= 1.8;
    }
    return ok;
}

bool eps_regular_decay() {
    SpectralOperator op = op1d(16, 12.0);
    MildProblem p;
    p.op = &op;
    p.kernel = parse_kernel("power:alpha=0.5");
    p.u0.resize(16);
    for (std::size_t m = 0; m < 16; ++m) p.u0[m] = std::pow(1.0 + op.mu_flat()[m], -1.1);
    p.T = 1.0;
    p.h = 1e-2;
    p.eps = 0.2;
    p.oversample_small_t = true;

    MildSolution lin = solve_mild(p);
    if (lin.status != SolveStatus::completed) return false;
    bool ok = eps_regular_profile(op, lin, 0.2, 1.5).pass;

    // subcritical nonlinear run
    MildProblem nl = p;
    nl.f.kind = NonlinearitySpec::Kind::power;
    nl.f.c0 = 0.5;
    nl.f.rho = 2.0;
    MildSolution sol = solve_mild(nl);
    if (sol.status != SolveStatus::completed) return false;
    return ok && eps_regular_profile(op, sol, 0.2, 1.5).pass;
}

bool blowup_alternative() {
    SpectralOperator op = op1d(16, 1.0);
    MildProblem p;
    p.op = &op;
    p.kernel = parse_kernel("power:alpha=0.5");
    p.u0.assign(16, 0.0);
    p.u0[0] = 50.0;
    p.f.kind = NonlinearitySpec::Kind::power;
    p.f.c0 = 1.0;
    p.f.rho = 2.0;
    p.T = 1.0;
    p.h = 2.5e-4;
    MildSolution sol = solve_mild(p);
    if (sol.status != SolveStatus::blowup) return false;
    MildProblem half = p;
    half.h = 1.25e-4;
    MildSolution sh = solve_mild(half);
    if (sh.status != SolveStatus::blowup) return false;
    bool ok = std::abs(sh.tau_estimate - sol.tau_estimate) / sol.tau_estimate < 0.05;

    MildProblem tiny = p;
    tiny.h = 2e-3;
    tiny.u0[0] = 0.01;
    return ok && solve_mild(tiny).status == SolveStatus::completed;
}

bool certified_window() {
    WellPosednessBudget b; // the worked-example budget
    ExistenceCertificate cert = certified_existence_time(b);
    bool ok = close(cert.tau, 8.3e-3, 2e-4) && cert.r == 0.5;

    SpectralOperator op = op1d(16, M_PI);
    // x0 with unit X_1 norm in the lowest mode (mu = 1)
    std::vector<double> x0(16, 0.0);
    x0[0] = 0.5;
    MildProblem p;
    p.op = &op;
    p.kernel = parse_kernel("power:alpha=0.5");
    p.f.kind = NonlinearitySpec::Kind::power;
    p.f.c0 = 1.0;
    p.f.rho = 2.0;
    p.T = cert.tau;
    p.h = cert.tau / 100.0;

    std::mt19937 rng(2024);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> d(16);
        double norm2 = 0.0;
        for (std::size_t m = 0; m < 16; ++m) {
            d[m] = gauss(rng);
            const double w = 1.0 + op.mu_flat()[m];
            norm2 += w * w * d[m] * d[m];
        }
        const double scale = 0.9 * cert.r / std::sqrt(norm2);
        p.u0 = x0;
        for (std::size_t m = 0; m < 16; ++m) p.u0[m] += scale * d[m];
        MildSolution sol = solve_mild(p);
        ok = ok && sol.status == SolveStatus::completed;
    }

    // Lipschitz dependence finite and stable under step halving
    std::vector<double> x1 = x0;
    x1[0] += 0.05;
    x1[1] += 0.02;
    p.u0 = x0;
    LipschitzReport r1 = lipschitz_dependence(p, x0, x1, 0.2);
    MildProblem ph = p;
    ph.h = p.h / 2.0;
    LipschitzReport r2 = lipschitz_dependence(ph, x0, x1, 0.2);
    ok = ok && std::isfinite(r1.ratio_max) && r1.ratio_max > 0.0 &&
         std::abs(r1.ratio_max - r2.ratio_max) / r1.ratio_max < 0.2;
    return ok;
}

bool exponent_arithmetic() {
    bool ok = close(subcritical_gap(1.5), 1.0 / 3.0, 1e-15) &&
              close(subcritical_gap(2.0), 0.5, 1e-15);
    EpsRegularParams rd = rd_wellposed_params(3, 3.0, 2.0, 1.5);
    ok = ok && rd.admissible && close(rd.eps_lo, 0.0, 1e-15) &&
         close(rd.eps_hi, 1.0 / 3.0, 1e-14);
    ok = ok && !rd_wellposed_params(1, 1.1, 2.0, 1.5).admissible;
    EpsRegularParams ns = ns_wellposed_params(3, 2.0, 1.25);
    ok = ok && ns.admissible && close(ns.eps_lo, 0.05, 1e-13) &&
         close(ns.eps_hi, 0.175, 1e-13);
    ok = ok && !ns_wellposed_params(3, 2.0, 1.7).admissible;
    EpsRegularParams hj = hj_wellposed_params(1, 2.0, 1.0, 1.5, 1.2);
    ok = ok && hj.admissible && close(hj.zeta_bound, 1.6, 1e-14);
    ok = ok && hj_wellposed_params(1, 4.0, 0.0, 1.5, 1.2).admissible;
    ok = ok && !hj_wellposed_params(1, 2.9, 0.0, 1.5, 1.2).admissible;
    // semigroup limit: zeta -> 1 recovers 1 < N(rho-1)/2 <= q
    ok = ok && rd_wellposed_params(3, 3.0, 2.0, 1.0 + 1e-9).admissible;
    // q below N(rho-1)/2 falls outside the domain: rho < 1 + 2q/N fails
    try {
        rd_wellposed_params(3, 1.49, 2.0, 1.0 + 1e-9);
        ok = false;
    } catch (const std::domain_error&) {
    }
    // windows shrink as zeta grows
    double prev = 1e9;
    for (double z : {1.05, 1.2, 1.35, 1.49}) {
        EpsRegularParams p = rd_wellposed_params(3, 3.0, 2.0, z);
        const double w = p.eps_hi - p.eps_lo;
        ok = ok && w < prev + 1e-15;
        prev = w;
    }
    return ok;
}

bool specfun_checks() {
    bool ok = close(i_kappa(1.0, 0.0, 0.0, 2.0), 2.0 * std::log(2.0), 1e-8);
    double prev = 1e300;
    for (double d = 0.5; d > 1e-4; d *= 0.5) {
        const double v = i_kappa(0.5, 0.3, 0.3, 1.0 + d);
        ok = ok && v < prev;
        prev = v;
    }
    ok = ok && prev < 0.3;
    ok = ok && close(beta(0.3, 1.7), 2.71825545421565, 1e-12);
    ok = ok && close(beta(2.0, 3.0), beta(3.0, 2.0), 1e-16);
    ok = ok && close(incomplete_beta(1.0, 0.7, 1.9), beta(0.7, 1.9), 1e-13);
    ok = ok && close(incomplete_beta(0.25, 0.5, 0.9), 1.00912237566278, 1e-12);
    return ok;
}

} // namespace

int main() {
    run(1, "kernel-class fidelity", kernel_class_fidelity);
    run(2, "cosine oracle", cosine_oracle);
    run(3, "mittag-leffler oracle", ml_oracle);
    run(4, "cross-method agreement", cross_method);
    run(5, "smoothing rate", smoothing_rate);
    run(6, "temporal log-continuity", log_continuity);
    run(7, "mild-solver consistency", mild_consistency);
    run(8, "eps-regular decay", eps_regular_decay);
    run(9, "blow-up alternative", blowup_alternative);
    run(10, "certified existence window", certified_window);
    run(11, "exponent arithmetic", exponent_arithmetic);
    run(12, "special functions", specfun_checks);
    std::printf("%s (%d criteria failed)\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
