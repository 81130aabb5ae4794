#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "memres/errors.hpp"

namespace memres {

// Admissibility window for the eps-regular fixed point of one application.
struct EpsRegularParams {
    double eps_lo = 0.0;
    double eps_hi = 0.0;
    bool lo_open = true;
    bool hi_open = true;
    // gamma(eps) = gamma_slope * eps + gamma_offset
    double gamma_slope = 0.0;
    double gamma_offset = 0.0;
    bool admissible = false;
    double zeta_bound = 0.0; // upper constraint on zeta_g for this application
    std::string application;

    double gamma_of_eps(double eps) const { return gamma_slope * eps + gamma_offset; }
};

// Critical threshold: gamma0 strictly above 1 - 1/zeta_g is the subcritical regime.
inline double subcritical_gap(double zeta_g) {
    if (!(zeta_g > 1.0)) throw std::domain_error("subcritical_gap: requires zeta_g > 1");
    return 1.0 - 1.0 / zeta_g;
}

// Reaction-diffusion u_t = "Laplacian memory" + u|u|^{rho-1} on L^q(R^N).
// Admissible iff 1 < N zeta_g (rho - 1)/2 <= q; window (open/open)
//   max{0, (1/rho)(1/zeta_g - N/(2q'))} < eps < min{1/(rho zeta_g), N/(2q)}.
inline EpsRegularParams rd_wellposed_params(int N, double q, double rho, double zeta_g) {
    if (N < 1 || !(q > 1.0)) throw std::domain_error("rd_wellposed_params: N >= 1, q > 1");
    if (!(zeta_g > 1.0)) throw std::domain_error("rd_wellposed_params: zeta_g > 1");
    if (!(rho > 1.0) || !(rho < 1.0 + 2.0 * q / N))
        throw std::domain_error("rd_wellposed_params: requires 1 < rho < 1 + 2q/N");
    const double qp = q / (q - 1.0);
    EpsRegularParams p;
    p.application = "rd";
    p.eps_lo = std::max(0.0, (1.0 / rho) * (1.0 / zeta_g - N / (2.0 * qp)));
    p.eps_hi = std::min(1.0 / (rho * zeta_g), N / (2.0 * q));
    p.lo_open = p.hi_open = true;
    p.gamma_slope = rho;
    p.gamma_offset = 1.0 - 1.0 / zeta_g;
    p.zeta_bound = 2.0 * q / (N * (rho - 1.0));
    const double critico = N * zeta_g * (rho - 1.0) / 2.0;
    p.admissible = (critico > 1.0) && (critico <= q) && (p.eps_lo < p.eps_hi);
    return p;
}

// Navier-Stokes scale arithmetic on L^q(R^N): admissible iff zeta_g < 4q/(N+q);
// window (closed/closed) [1/zeta_g - N/(2q), 1/zeta_g - (N+q)/(4q)], slope 2.
inline EpsRegularParams ns_wellposed_params(int N, double q, double zeta_g) {
    if (N < 3) throw std::domain_error("ns_wellposed_params: requires N >= 3");
    if (!(q > N / 3.0) || !(q < static_cast<double>(N)))
        throw std::domain_error("ns_wellposed_params: requires N/3 < q < N");
    if (!(zeta_g > 1.0)) throw std::domain_error("ns_wellposed_params: zeta_g > 1");
    EpsRegularParams p;
    p.application = "ns";
    p.eps_lo = 1.0 / zeta_g - N / (2.0 * q);
    p.eps_hi = 1.0 / zeta_g - (N + q) / (4.0 * q);
    p.lo_open = p.hi_open = false;
    p.gamma_slope = 2.0;
    p.gamma_offset = 1.0 - 1.0 / zeta_g;
    p.zeta_bound = 4.0 * q / (N + q);
    p.admissible = (zeta_g < p.zeta_bound) && (p.eps_lo <= p.eps_hi);
    return p;
}

// Hamilton-Jacobi |grad u|^rho on the H^s_p scale:
// chi = 1 + (1 - s + N/p)(rho - 1), admissible iff zeta_g < 2/chi;
// window (open/open) ((1-s)/2, (1-s)/2 + (1/rho)(1/zeta_g - chi/2)), slope rho.
inline EpsRegularParams hj_wellposed_params(int N, double p_exp, double s, double rho,
                                            double zeta_g) {
    if (N < 1 || !(p_exp > 1.0)) throw std::domain_error("hj_wellposed_params: N >= 1, p > 1");
    if (!(rho > 1.0) || !(rho < std::min(p_exp, 1.0 + p_exp / N)))
        throw std::domain_error("hj_wellposed_params: requires 1 < rho < min{p, 1+p/N}");
    if (!(s > 1.0 - (1.0 / (rho - 1.0) - N / p_exp)) || !(s <= 1.0))
        throw std::domain_error("hj_wellposed_params: s outside its interval");
    if (!(zeta_g > 1.0)) throw std::domain_error("hj_wellposed_params: zeta_g > 1");
    const double chi = 1.0 + (1.0 - s + static_cast<double>(N) / p_exp) * (rho - 1.0);
    EpsRegularParams p;
    p.application = "hj";
    p.eps_lo = (1.0 - s) / 2.0;
    p.eps_hi = (1.0 - s) / 2.0 + (1.0 / rho) * (1.0 / zeta_g - chi / 2.0);
    p.lo_open = p.hi_open = true;
    p.gamma_slope = rho;
    p.gamma_offset = 1.0 - 1.0 / zeta_g;
    p.zeta_bound = 2.0 / chi;
    p.admissible = (zeta_g < p.zeta_bound) && (p.eps_lo < p.eps_hi);
    return p;
}

} // namespace memres
