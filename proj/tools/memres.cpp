#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "memres/exponents.hpp"
#include "memres/kernel.hpp"
#include "memres/mild.hpp"
#include "memres/resolvent.hpp"
#include "memres/spectral.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace memres;

namespace {

std::string fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct OutputDir {
    fs::path dir;
    std::string hash;

    // refuse to reuse a directory whose resolved config differs, unless forced
    OutputDir(const std::string& path, const json& resolved, bool force) : dir(path) {
        hash = fnv1a(resolved.dump());
        fs::create_directories(dir);
        const fs::path cfg = dir / "config.json";
        if (fs::exists(cfg) && !force) {
            std::ifstream in(cfg);
            json old;
            in >> old;
            if (old.value("config_hash", "") != hash)
                throw config_error("output directory holds a different config hash; "
                                   "use --force to overwrite");
        }
        json out = resolved;
        out["config_hash"] = hash;
        std::ofstream(cfg) << out.dump(2) << '\n';
    }

    std::ofstream open(const std::string& name) const {
        std::ofstream os(dir / name, std::ios::binary);
        if (!os) throw config_error("cannot open output file " + name);
        return os;
    }
};

int worker_count() {
    if (const char* env = std::getenv("MEMRES_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

json sector_report_json(const SectorReport& rep) {
    json verdicts = json::array();
    for (const auto& v : rep.verdicts)
        verdicts.push_back({{"name", v.name}, {"status", v.status}, {"detail", v.detail}});
    return {{"zeta_g", rep.zeta_g},       {"omega0", rep.omega0},
            {"eta0", rep.eta0},           {"psi0", rep.psi0},
            {"status", to_string(rep.status)},
            {"degenerate", rep.degenerate_warning},
            {"verdicts", verdicts}};
}

json eps_params_json(const EpsRegularParams& p, const json& inputs) {
    const std::string openness = std::string(p.lo_open ? "(" : "[") +
                                 (p.hi_open ? ")" : "]");
    return {{"application", p.application},
            {"inputs", inputs},
            {"admissible", p.admissible},
            {"eps_window", {p.eps_lo, p.eps_hi, openness}},
            {"gamma_slope", p.gamma_slope},
            {"gamma_offset", p.gamma_offset},
            {"zeta_bound", p.zeta_bound}};
}

SpectralOperator make_operator(int modes, double length, double delta) {
    OperatorConfig oc;
    oc.dimension = 1;
    oc.lengths[0] = length;
    oc.n_modes[0] = modes;
    oc.delta = delta;
    return SpectralOperator(oc);
}

// datum amplitude * lowest mode, or the rough datum (1+mu)^{-1-s0}
std::vector<double> make_datum(const SpectralOperator& op, const std::string& kind,
                               double amplitude, double s0) {
    std::vector<double> u(op.total_modes(), 0.0);
    if (kind == "mode1") {
        u[0] = amplitude;
    } else if (kind == "rough") {
        const auto& mu = op.mu_flat();
        for (std::size_t m = 0; m < u.size(); ++m)
            u[m] = amplitude * std::pow(1.0 + mu[m], -1.0 - s0);
    } else {
        throw config_error("unknown datum kind: " + kind);
    }
    return u;
}

struct MildRunFlags {
    std::string kernel = "power:alpha=0.5";
    int modes = 16;
    double length = 12.0;
    std::string datum = "mode1";
    double amplitude = 1.0;
    double s0 = 0.1;
    double rho = 2.0;
    double c0 = 1.0;
    double T = 1.0;
    double h = 1e-2;
    double eps = 0.2;
    double threshold = 1e8;
    bool oversample = false;
};

void add_mild_flags(CLI::App* cmd, MildRunFlags& f) {
    cmd->set_help_flag("--help", "print help");
    cmd->add_option("--kernel", f.kernel);
    cmd->add_option("--modes", f.modes);
    cmd->add_option("--length", f.length);
    cmd->add_option("--datum", f.datum)->description("mode1 | rough");
    cmd->add_option("--amplitude", f.amplitude);
    cmd->add_option("--s0", f.s0);
    cmd->add_option("--rho", f.rho);
    cmd->add_option("--c0", f.c0);
    cmd->add_option("--T", f.T);
    cmd->add_option("--h", f.h);
    cmd->add_option("--eps", f.eps);
    cmd->add_option("--threshold", f.threshold);
    cmd->add_flag("--oversample", f.oversample);
}

json mild_flags_json(const MildRunFlags& f) {
    return {{"kernel", f.kernel},   {"modes", f.modes},     {"length", f.length},
            {"datum", f.datum},     {"amplitude", f.amplitude}, {"s0", f.s0},
            {"rho", f.rho},         {"c0", f.c0},           {"T", f.T},
            {"h", f.h},             {"eps", f.eps},         {"threshold", f.threshold},
            {"oversample", f.oversample}};
}

MildSolution run_mild(const MildRunFlags& f, NonlinearitySpec::Kind kind,
                      const SpectralOperator& op) {
    MildProblem p;
    p.op = &op;
    p.kernel = parse_kernel(f.kernel);
    p.u0 = make_datum(op, f.datum, f.amplitude, f.s0);
    p.f.kind = kind;
    p.f.c0 = f.c0;
    p.f.rho = f.rho;
    p.T = f.T;
    p.h = f.h;
    p.eps = f.eps;
    p.blowup_threshold = f.threshold;
    p.oversample_small_t = f.oversample;
    return solve_mild(p);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"resolvent-family toolkit for integrodifferential evolution equations"};
    app.require_subcommand(1);
    // free the short -h for the step-size option on the run subcommands
    app.set_help_flag("--help", "print help");

    std::string out_dir = "out";
    bool force = false, fail_on_blowup = false;
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_flag("--force", force, "overwrite outputs with a different config hash");
    app.add_flag("--fail-on-blowup", fail_on_blowup, "exit 4 when a run blows up");

    // kernel-check
    auto* kc = app.add_subcommand("kernel-check", "verify the sector hypotheses of a kernel");
    std::string kc_kernel = "power:alpha=0.5";
    double kc_psi0 = 0.0;
    kc->add_option("--kernel", kc_kernel)->required();
    kc->add_option("--psi0", kc_psi0);

    // resolvent-probe
    auto* rp = app.add_subcommand("resolvent-probe", "tabulate a scalar resolvent");
    std::string rp_kernel = "hookean";
    double rp_mu = 1.0, rp_T = 1.0, rp_h = 1e-3, rp_agree = 1e-6;
    rp->set_help_flag("--help", "print help");
    rp->add_option("--kernel", rp_kernel)->required();
    rp->add_option("--mu", rp_mu)->required();
    rp->add_option("--T", rp_T);
    rp->add_option("--h", rp_h);
    rp->add_option("--agree-tol", rp_agree);

    // smoothing-fit
    auto* sf = app.add_subcommand("smoothing-fit", "fit the operator smoothing rate");
    std::string sf_kernel = "power:alpha=0.5";
    double sf_gamma = 0.0, sf_theta = 0.0, sf_tmin = 1e-3, sf_tmax = 1e-1, sf_length = M_PI;
    int sf_samples = 25, sf_modes = 256;
    sf->add_option("--kernel", sf_kernel)->required();
    sf->add_option("--gamma", sf_gamma);
    sf->add_option("--theta", sf_theta);
    sf->add_option("--t-min", sf_tmin);
    sf->add_option("--t-max", sf_tmax);
    sf->add_option("--n-samples", sf_samples);
    sf->add_option("--modes", sf_modes);
    sf->add_option("--length", sf_length);

    // rd-run / hj-run
    auto* rd = app.add_subcommand("rd-run", "power-nonlinearity mild solve");
    MildRunFlags rd_flags;
    add_mild_flags(rd, rd_flags);
    auto* hj = app.add_subcommand("hj-run", "gradient-nonlinearity mild solve");
    MildRunFlags hj_flags;
    hj_flags.rho = 1.5;
    add_mild_flags(hj, hj_flags);

    // rd-sweep
    auto* sw = app.add_subcommand("rd-sweep", "sweep (rho, amplitude, q)");
    MildRunFlags sw_flags;
    std::vector<double> sw_rhos{2.0}, sw_amps{1.0}, sw_qs{2.0};
    int sw_N = 1;
    add_mild_flags(sw, sw_flags);
    sw->add_option("--rho-grid", sw_rhos)->delimiter(',');
    sw->add_option("--amplitude-grid", sw_amps)->delimiter(',');
    sw->add_option("--q-grid", sw_qs)->delimiter(',');
    sw->add_option("--N", sw_N);

    // exponents
    auto* ex = app.add_subcommand("exponents", "admissibility window arithmetic");
    std::string ex_app = "rd";
    int ex_N = 3;
    double ex_q = 3.0, ex_rho = 2.0, ex_zeta = 1.5, ex_p = 2.0, ex_s = 1.0;
    ex->add_option("--app", ex_app)->check(CLI::IsMember({"rd", "ns", "hj"}));
    ex->add_option("--N", ex_N);
    ex->add_option("--q", ex_q);
    ex->add_option("--rho", ex_rho);
    ex->add_option("--zeta", ex_zeta);
    ex->add_option("--p", ex_p);
    ex->add_option("--s", ex_s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }

    try {
        if (kc->parsed()) {
            json cfg{{"command", "kernel-check"}, {"kernel", kc_kernel}, {"psi0", kc_psi0}};
            OutputDir out(out_dir, cfg, force);
            MaterialKernel k = parse_kernel(kc_kernel);
            SectorReport rep = check_hypotheses(k, kc_psi0);
            json j = sector_report_json(rep);
            j["config_hash"] = out.hash;
            out.open("kernel_check.json") << j.dump(2) << '\n';
            std::cout << j.dump(2) << '\n';
            return rep.status == HypothesisStatus::FAIL ? 3 : 0;
        }

        if (rp->parsed()) {
            json cfg{{"command", "resolvent-probe"}, {"kernel", rp_kernel}, {"mu", rp_mu},
                     {"T", rp_T},                    {"h", rp_h},          {"agree_tol", rp_agree}};
            OutputDir out(out_dir, cfg, force);
            MaterialKernel k = parse_kernel(rp_kernel);
            ScalarResolventTable tab = scalar_resolvent_volterra(k, rp_mu, rp_h, rp_T);
            {
                auto os = out.open("resolvent.csv");
                os << "# config_hash=" << out.hash << '\n';
                export_table_csv(os, tab, k.id());
            }
            json agree = json::array();
            double worst = 0.0;
            for (double frac : {0.1, 0.5, 1.0}) {
                const double t = frac * rp_T;
                const double tv = scalar_resolvent_talbot(k, rp_mu, t).value;
                const std::size_t j = static_cast<std::size_t>(std::llround(t / rp_h));
                const double d = std::abs(tv - tab.s[j]);
                worst = std::max(worst, d);
                agree.push_back({{"t", t}, {"volterra", tab.s[j]}, {"talbot", tv}, {"diff", d}});
            }
            json rep{{"config_hash", out.hash}, {"agreement", agree}, {"worst_diff", worst},
                     {"tol", rp_agree}};
            out.open("agreement.json") << rep.dump(2) << '\n';
            std::cout << rep.dump(2) << '\n';
            if (worst > rp_agree)
                throw accuracy_error("cross-method disagreement " + std::to_string(worst));
            return 0;
        }

        if (sf->parsed()) {
            json cfg{{"command", "smoothing-fit"}, {"kernel", sf_kernel}, {"gamma", sf_gamma},
                     {"theta", sf_theta},          {"t_min", sf_tmin},    {"t_max", sf_tmax},
                     {"n_samples", sf_samples},    {"modes", sf_modes},   {"length", sf_length}};
            OutputDir out(out_dir, cfg, force);
            MaterialKernel k = parse_kernel(sf_kernel);
            SpectralOperator op = make_operator(sf_modes, sf_length, 0.0);
            SmoothingFit fit =
                fit_smoothing_rate(op, k, sf_gamma, sf_theta, sf_tmin, sf_tmax, sf_samples);
            {
                auto os = out.open("smoothing.csv");
                os << "# schema=1\n# config_hash=" << out.hash << "\nt,norm\n";
                for (std::size_t i = 0; i < fit.t.size(); ++i)
                    os << fit.t[i] << ',' << fit.norm[i] << '\n';
            }
            const double target = -k.zeta_g() * (1.0 + sf_theta - sf_gamma);
            json rep{{"config_hash", out.hash}, {"slope", fit.slope},
                     {"intercept", fit.intercept}, {"residual", fit.residual},
                     {"target", target}};
            out.open("smoothing.json") << rep.dump(2) << '\n';
            std::cout << rep.dump(2) << '\n';
            return 0;
        }

        if (rd->parsed() || hj->parsed()) {
            const bool is_rd = rd->parsed();
            const MildRunFlags& f = is_rd ? rd_flags : hj_flags;
            json cfg = mild_flags_json(f);
            cfg["command"] = is_rd ? "rd-run" : "hj-run";
            OutputDir out(out_dir, cfg, force);
            SpectralOperator op = make_operator(f.modes, f.length, 0.0);
            MildSolution sol = run_mild(
                f, is_rd ? NonlinearitySpec::Kind::power : NonlinearitySpec::Kind::gradient, op);
            {
                auto os = out.open("solution.csv");
                os << "# config_hash=" << out.hash << '\n';
                export_solution_csv(os, sol);
            }
            {
                auto os = out.open("coefficients.npy");
                export_solution_npy(os, sol);
            }
            json rep{{"config_hash", out.hash},
                     {"status", to_string(sol.status)},
                     {"t_end", sol.t.back()},
                     {"tau_estimate", sol.tau_estimate}};
            out.open("status.json") << rep.dump(2) << '\n';
            std::cout << rep.dump(2) << '\n';
            if (sol.status == SolveStatus::inner_divergence)
                throw accuracy_error("inner iteration diverged: " + sol.status_detail);
            if (sol.status == SolveStatus::blowup && fail_on_blowup) return 4;
            return 0;
        }

        if (sw->parsed()) {
            json cfg = mild_flags_json(sw_flags);
            cfg["command"] = "rd-sweep";
            cfg["rho_grid"] = sw_rhos;
            cfg["amplitude_grid"] = sw_amps;
            cfg["q_grid"] = sw_qs;
            cfg["N"] = sw_N;
            OutputDir out(out_dir, cfg, force);
            SpectralOperator op = make_operator(sw_flags.modes, sw_flags.length, 0.0);

            struct Row {
                double rho, amp, q;
                std::string status;
                double tau;
                bool admissible;
            };
            std::vector<Row> rows;
            for (double r : sw_rhos)
                for (double a : sw_amps)
                    for (double q : sw_qs) rows.push_back({r, a, q, "", -1.0, false});

            const double zeta = parse_kernel(sw_flags.kernel).zeta_g();
            std::atomic<std::size_t> next{0};
            auto work = [&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= rows.size()) return;
                    Row& row = rows[i];
                    MildRunFlags f = sw_flags;
                    f.rho = row.rho;
                    f.amplitude = row.amp;
                    MildSolution s = run_mild(f, NonlinearitySpec::Kind::power, op);
                    row.status = to_string(s.status);
                    row.tau = s.tau_estimate;
                    try {
                        row.admissible =
                            rd_wellposed_params(sw_N, row.q, row.rho, zeta).admissible;
                    } catch (const std::domain_error&) {
                        row.admissible = false;
                    }
                }
            };
            const int workers = std::min<int>(worker_count(), static_cast<int>(rows.size()));
            std::vector<std::thread> pool;
            for (int w = 1; w < workers; ++w) pool.emplace_back(work);
            work();
            for (auto& th : pool) th.join();

            bool any_blowup = false;
            {
                auto os = out.open("sweep.csv");
                os << "# schema=1\n# config_hash=" << out.hash
                   << "\nrho,amplitude,q,status,tau_estimate,admissible\n";
                for (const auto& row : rows) {
                    os << row.rho << ',' << row.amp << ',' << row.q << ',' << row.status
                       << ',' << row.tau << ',' << (row.admissible ? 1 : 0) << '\n';
                    any_blowup = any_blowup || row.status == "blowup";
                }
            }
            std::cout << json{{"config_hash", out.hash}, {"rows", rows.size()}}.dump() << '\n';
            return (any_blowup && fail_on_blowup) ? 4 : 0;
        }

        if (ex->parsed()) {
            json cfg{{"command", "exponents"}, {"app", ex_app}, {"N", ex_N}, {"q", ex_q},
                     {"rho", ex_rho},          {"zeta", ex_zeta}, {"p", ex_p}, {"s", ex_s}};
            OutputDir out(out_dir, cfg, force);
            EpsRegularParams params;
            json inputs;
            if (ex_app == "rd") {
                params = rd_wellposed_params(ex_N, ex_q, ex_rho, ex_zeta);
                inputs = {{"N", ex_N}, {"q", ex_q}, {"rho", ex_rho}, {"zeta_g", ex_zeta}};
            } else if (ex_app == "ns") {
                params = ns_wellposed_params(ex_N, ex_q, ex_zeta);
                inputs = {{"N", ex_N}, {"q", ex_q}, {"zeta_g", ex_zeta}};
            } else {
                params = hj_wellposed_params(ex_N, ex_p, ex_s, ex_rho, ex_zeta);
                inputs = {{"N", ex_N}, {"p", ex_p},   {"s", ex_s},
                          {"rho", ex_rho}, {"zeta_g", ex_zeta}};
            }
            json j = eps_params_json(params, inputs);
            j["config_hash"] = out.hash;
            out.open("exponents.json") << j.dump(2) << '\n';
            std::cout << j.dump(2) << '\n';
            return 0;
        }
    } catch (const config_error& e) {
        std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const accuracy_error& e) {
        std::cerr << json{{"error", "accuracy"}, {"message", e.what()}}.dump() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
        return 3;
    }
    return 0;
}
