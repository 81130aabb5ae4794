#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "memres/errors.hpp"
#include "memres/specfun.hpp"

namespace memres {

// Material function g(t) = sum_i k_i t^{alpha_i - 1} e^{c_i t}.
// Immutable after construction.
class MaterialKernel {
public:
    struct Term {
        double k;     // k_i > 0
        double alpha; // alpha_i > 0
        double c;     // c_i real
    };

    explicit MaterialKernel(std::vector<Term> terms) : terms_(std::move(terms)) {
        if (terms_.empty()) throw std::invalid_argument("MaterialKernel: empty term list");
        for (const auto& t : terms_) {
            if (!(t.k > 0.0)) throw std::invalid_argument("MaterialKernel: requires k > 0");
            if (!(t.alpha > 0.0)) throw std::invalid_argument("MaterialKernel: requires alpha > 0");
            if (!std::isfinite(t.c)) throw std::invalid_argument("MaterialKernel: non-finite c");
        }
    }

    const std::vector<Term>& terms() const { return terms_; }

    double alpha_min() const {
        double m = terms_[0].alpha;
        for (const auto& t : terms_) m = std::min(m, t.alpha);
        return m;
    }
    double alpha_max() const {
        double m = terms_[0].alpha;
        for (const auto& t : terms_) m = std::max(m, t.alpha);
        return m;
    }
    double zeta_g() const { return 1.0 + alpha_min(); }
    double omega0() const {
        double m = 0.0;
        for (const auto& t : terms_) m = std::max(m, t.c);
        return m;
    }

    // Single power term with c = 0: the scalar resolvent obeys the exact
    // scaling s_mu(t) = phi((mu k Gamma(alpha))^{1/zeta} t).
    bool is_scaling() const { return terms_.size() == 1 && terms_[0].c == 0.0; }

    // g(t), t > 0
    double eval_g(double t) const {
        if (!(t > 0.0)) throw std::domain_error("eval_g: requires t > 0");
        double s = 0.0;
        for (const auto& term : terms_)
            s += term.k * std::pow(t, term.alpha - 1.0) * std::exp(term.c * t);
        return s;
    }

    // a(t) = (1*g)(t); closed forms per term (power / incomplete gamma / series).
    double eval_a(double t) const {
        if (t < 0.0) throw std::domain_error("eval_a: requires t >= 0");
        if (t == 0.0) return 0.0;
        double s = 0.0;
        for (const auto& term : terms_) s += term_a(term, t);
        return s;
    }

    // A1(t) = int_0^t a
    double primitive_a(double t) const {
        if (t < 0.0) throw std::domain_error("primitive_a: requires t >= 0");
        if (t == 0.0) return 0.0;
        double s = 0.0;
        for (const auto& term : terms_) s += term_A1(term, t);
        return s;
    }

    // B1(t) = int_0^t tau a(tau) dtau
    double moment_a(double t) const {
        if (t < 0.0) throw std::domain_error("moment_a: requires t >= 0");
        if (t == 0.0) return 0.0;
        double s = 0.0;
        for (const auto& term : terms_) s += term_B1(term, t);
        return s;
    }

    // ghat(lambda) = sum_i k_i Gamma(alpha_i) (lambda - c_i)^{-alpha_i},
    // principal branch with cut on c_i + R_-.
    std::complex<double> laplace_g(std::complex<double> lambda) const {
        std::complex<double> s = 0.0;
        for (const auto& term : terms_) {
            const std::complex<double> z = lambda - term.c;
            if (std::abs(z) < 1e-14 * (1.0 + std::abs(lambda)))
                throw std::domain_error("laplace_g: lambda at a pole c_i");
            if (z.real() < 0.0 && std::abs(z.imag()) < 1e-14 * std::abs(z.real()))
                throw std::domain_error("laplace_g: lambda on the branch cut c_i + R_-");
            s += term.k * gamma_fn(term.alpha) * std::pow(z, -term.alpha);
        }
        return s;
    }

    std::string id() const {
        std::ostringstream os;
        os << "sum:[";
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            if (i) os << ",";
            os << "{" << terms_[i].k << "," << terms_[i].alpha << "," << terms_[i].c << "}";
        }
        os << "]";
        return os.str();
    }

private:
    static double term_a(const Term& tm, double t) {
        if (tm.c == 0.0) return tm.k * std::pow(t, tm.alpha) / tm.alpha;
        if (tm.c < 0.0) {
            const double X = -tm.c * t;
            return tm.k * std::pow(-tm.c, -tm.alpha) * lower_gamma(tm.alpha, X);
        }
        return tm.k * series_sum(tm.alpha, tm.c, t, 0);
    }
    static double term_A1(const Term& tm, double t) {
        const double a = tm.alpha;
        if (tm.c == 0.0) return tm.k * std::pow(t, a + 1.0) / (a * (a + 1.0));
        if (tm.c < 0.0) {
            const double X = -tm.c * t;
            // int_0^X gamma(a,x) dx = X gamma(a,X) - gamma(a+1,X)
            return tm.k * std::pow(-tm.c, -a) / (-tm.c) *
                   (X * lower_gamma(a, X) - lower_gamma(a + 1.0, X));
        }
        return tm.k * series_sum(a, tm.c, t, 1);
    }
    static double term_B1(const Term& tm, double t) {
        const double a = tm.alpha;
        if (tm.c == 0.0) return tm.k * std::pow(t, a + 2.0) / (a * (a + 2.0));
        if (tm.c < 0.0) {
            const double X = -tm.c * t;
            // int_0^X x gamma(a,x) dx = X^2/2 gamma(a,X) - gamma(a+2,X)/2
            return tm.k * std::pow(-tm.c, -a) / (tm.c * tm.c) *
                   (0.5 * X * X * lower_gamma(a, X) - 0.5 * lower_gamma(a + 2.0, X));
        }
        return tm.k * series_sum(a, tm.c, t, 2);
    }

    // sum_n c^n t^{a+n+p} / (n! (a+n) (a+n+p)) for p = 0,1,2 (with the p=0
    // convention of a single (a+n) factor)
    static double series_sum(double a, double c, double t, int p) {
        const double x = c * t;
        if (std::abs(x) > 60.0)
            throw accuracy_error("MaterialKernel: series guard |c t| > 60 exceeded");
        double pw = std::pow(t, a + p); // t^{a+p} * (c t)^n accumulates below
        double factor = 1.0;            // c^n t^n / n!
        double sum = 0.0;
        for (int n = 0; n < 200; ++n) {
            const double denom = (p == 0) ? (a + n) : (a + n) * (a + n + p);
            const double term = pw * factor / denom;
            sum += term;
            if (std::abs(term) < 1e-17 * (1.0 + std::abs(sum)) && n > 2) return sum;
            factor *= x / (n + 1.0);
        }
        throw accuracy_error("MaterialKernel: series did not converge");
    }

    std::vector<Term> terms_;
};

enum class HypothesisStatus { PASS, DEGENERATE, FAIL };

struct Verdict {
    std::string name;
    std::string status; // "pass" | "fail" | "degenerate" | "skipped"
    std::string detail;
};

struct SectorReport {
    double zeta_g = 0.0;
    double omega0 = 0.0;
    double eta0 = 0.0;
    double psi0 = 0.0;
    double alpha_max = 0.0;
    HypothesisStatus status = HypothesisStatus::FAIL;
    bool degenerate_warning = false;
    std::vector<Verdict> verdicts;
};

inline const char* to_string(HypothesisStatus s) {
    switch (s) {
        case HypothesisStatus::PASS: return "PASS";
        case HypothesisStatus::DEGENERATE: return "DEGENERATE";
        default: return "FAIL";
    }
}

// Sector hypothesis checker: exact sector arithmetic plus numeric
// sampling of (B3)/(B4) on rays of Sigma(omega1, eta1 + pi/2).
inline SectorReport check_hypotheses(const MaterialKernel& kernel, double psi0) {
    if (!(psi0 >= 0.0) || !(psi0 < M_PI / 2.0))
        throw std::domain_error("check_hypotheses: requires psi0 in [0, pi/2)");

    SectorReport rep;
    rep.psi0 = psi0;
    rep.zeta_g = kernel.zeta_g();
    rep.omega0 = kernel.omega0();
    rep.alpha_max = kernel.alpha_max();
    rep.eta0 = ((1.0 - rep.alpha_max) * (M_PI / 2.0) - psi0) / (1.0 + rep.alpha_max);

    const double bound = 1.0 - psi0 / (M_PI / 2.0);
    const double tol = 1e-12;

    rep.verdicts.push_back({"B1", "pass", "kernel in the admissible sum class, Laplace transformable"});

    if (rep.alpha_max > bound + tol) {
        rep.status = HypothesisStatus::FAIL;
        rep.eta0 = std::max(rep.eta0, 0.0);
        rep.verdicts.push_back({"alpha-condition", "fail", "alpha_max exceeds 1 - psi0/(pi/2)"});
        rep.verdicts.push_back({"B3", "skipped", "alpha condition failed"});
        rep.verdicts.push_back({"B4", "skipped", "alpha condition failed"});
        return rep;
    }

    const bool degenerate = std::abs(rep.alpha_max - bound) <= tol;
    if (degenerate) rep.eta0 = 0.0;
    rep.verdicts.push_back({"alpha-condition", degenerate ? "degenerate" : "pass",
                            degenerate ? "boundary case eta0 = 0" : "strict inequality"});

    // limit of |ghat||lambda|^{zeta-1} over the minimal-alpha terms
    double limit = 0.0;
    for (const auto& t : kernel.terms())
        if (std::abs(t.alpha - kernel.alpha_min()) < 1e-14) limit += t.k * gamma_fn(t.alpha);
    const double b4_floor = 0.5 * limit;

    const double omega1 = rep.omega0 + 1.0;
    const double eta1 = rep.eta0 / 2.0;
    const double arg_margin = 0.05;

    bool b3_ok = true, b4_ok = true;
    const int n_r = 25, n_phi = 5;
    for (int j = 0; j < n_phi; ++j) {
        // ray angles spread over the probe sector, boundary included
        const double phi = (eta1 + M_PI / 2.0) * (-1.0 + 2.0 * j / (n_phi - 1.0));
        for (int i = 0; i < n_r; ++i) {
            const double r = 1e2 * std::pow(1e4, i / (n_r - 1.0));
            const std::complex<double> lambda =
                omega1 + r * std::complex<double>(std::cos(phi), std::sin(phi));
            const std::complex<double> gh = kernel.laplace_g(lambda);
            const double arg = std::arg(lambda / gh);
            if (!(arg > -M_PI + arg_margin && arg < M_PI - arg_margin)) b3_ok = false;
            if (!(std::abs(gh) * std::pow(std::abs(lambda), rep.zeta_g - 1.0) >= b4_floor))
                b4_ok = false;
        }
    }
    if (degenerate) {
        // boundary case: only the real ray is meaningful for B3
        rep.verdicts.push_back({"B3", "degenerate", "eta0 = 0; sector probe at the boundary"});
        rep.verdicts.push_back({"B4", b4_ok ? "pass" : "fail", "sampled |ghat||lambda|^{zeta-1}"});
        rep.status = b4_ok ? HypothesisStatus::DEGENERATE : HypothesisStatus::FAIL;
        rep.degenerate_warning = true;
        return rep;
    }
    rep.verdicts.push_back(
        {"B3", b3_ok ? "pass" : "fail", "arg(lambda/ghat) sampled on sector rays"});
    rep.verdicts.push_back(
        {"B4", b4_ok ? "pass" : "fail", "sampled |ghat||lambda|^{zeta-1} against 0.5 * limit"});
    rep.status = (b3_ok && b4_ok) ? HypothesisStatus::PASS : HypothesisStatus::FAIL;
    return rep;
}

// Kernel literal grammar:
//   hookean                    {(1, 1, 0)}
//   power:alpha=A              {(1/Gamma(A), A, 0)}   so a(t) = t^A/Gamma(1+A)
//   maxwell[:c=C]              {(1, 1, C)}, default C = -1
//   sum:[{k,alpha,c},...]      explicit term list
inline MaterialKernel parse_kernel(const std::string& spec) {
    auto fail = [&](const std::string& why) -> MaterialKernel {
        throw config_error("kernel literal '" + spec + "': " + why);
    };
    if (spec == "hookean") return MaterialKernel({{1.0, 1.0, 0.0}});
    if (spec == "maxwell") return MaterialKernel({{1.0, 1.0, -1.0}});
    if (spec.rfind("maxwell:c=", 0) == 0) {
        const double c = std::stod(spec.substr(10));
        return MaterialKernel({{1.0, 1.0, c}});
    }
    if (spec.rfind("power:alpha=", 0) == 0) {
        const double alpha = std::stod(spec.substr(12));
        if (!(alpha > 0.0)) return fail("alpha must be positive");
        return MaterialKernel({{1.0 / gamma_fn(alpha), alpha, 0.0}});
    }
    if (spec.rfind("sum:[", 0) == 0 && spec.back() == ']') {
        std::vector<MaterialKernel::Term> terms;
        std::string body = spec.substr(5, spec.size() - 6);
        std::size_t pos = 0;
        while (pos < body.size()) {
            if (body[pos] == ',') {
                ++pos;
                continue;
            }
            if (body[pos] != '{') return fail("expected '{'");
            const std::size_t close = body.find('}', pos);
            if (close == std::string::npos) return fail("unterminated term");
            std::string triple = body.substr(pos + 1, close - pos - 1);
            std::replace(triple.begin(), triple.end(), ',', ' ');
            std::istringstream is(triple);
            MaterialKernel::Term t{};
            if (!(is >> t.k >> t.alpha >> t.c)) return fail("term needs three numbers {k,alpha,c}");
            terms.push_back(t);
            pos = close + 1;
        }
        if (terms.empty()) return fail("no terms");
        return MaterialKernel(terms);
    }
    return fail("unrecognized literal");
}

} // namespace memres
