#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "memres/errors.hpp"

namespace memres {

struct OperatorConfig {
    int dimension = 1;          // 1 or 2
    double lengths[2] = {1, 1}; // box side per axis
    int n_modes[2] = {0, 0};    // modes per axis, power of two
    double delta = 0.0;         // scale anchor: X_delta is the base space
};

namespace detail {

inline bool is_pow2(int n) { return n >= 4 && (n & (n - 1)) == 0; }

// Cached DST-I matrices S_mj = sin(m j pi / (n+1)), row-major m-by-j.
inline const std::vector<double>& sine_matrix(int n) {
    static std::map<int, std::vector<double>> cache;
    static std::mutex mx;
    std::lock_guard<std::mutex> lock(mx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> S(static_cast<std::size_t>(n) * n);
    for (int m = 1; m <= n; ++m)
        for (int j = 1; j <= n; ++j)
            S[static_cast<std::size_t>(m - 1) * n + (j - 1)] =
                std::sin(m * j * M_PI / (n + 1.0));
    return cache.emplace(n, std::move(S)).first->second;
}

// y = S x for the cached n-by-n sine matrix
inline void sine_apply(int n, const double* x, double* y) {
    const auto& S = sine_matrix(n);
    for (int m = 0; m < n; ++m) {
        double acc = 0.0;
        const double* row = &S[static_cast<std::size_t>(m) * n];
        for (int j = 0; j < n; ++j) acc += row[j] * x[j];
        y[m] = acc;
    }
}

} // namespace detail

// Diagonal realization of the Dirichlet Laplacian on a box, together with
// the weighted-coefficient interpolation scale.
class SpectralOperator {
public:
    explicit SpectralOperator(const OperatorConfig& cfg) : cfg_(cfg) {
        if (cfg.dimension != 1 && cfg.dimension != 2)
            throw config_error("SpectralOperator: dimension must be 1 or 2");
        for (int d = 0; d < cfg.dimension; ++d) {
            if (!(cfg.lengths[d] > 0.0))
                throw config_error("SpectralOperator: lengths must be positive");
            if (!detail::is_pow2(cfg.n_modes[d]))
                throw config_error("SpectralOperator: n_modes must be a power of two >= 4");
        }
        if (cfg.dimension == 1) {
            mu_.resize(cfg.n_modes[0]);
            for (int m = 1; m <= cfg.n_modes[0]; ++m)
                mu_[m - 1] = sq(m * M_PI / cfg.lengths[0]);
        } else {
            mu_.resize(static_cast<std::size_t>(cfg.n_modes[0]) * cfg.n_modes[1]);
            for (int m1 = 1; m1 <= cfg.n_modes[0]; ++m1)
                for (int m2 = 1; m2 <= cfg.n_modes[1]; ++m2)
                    mu_[static_cast<std::size_t>(m1 - 1) * cfg.n_modes[1] + (m2 - 1)] =
                        sq(m1 * M_PI / cfg.lengths[0]) + sq(m2 * M_PI / cfg.lengths[1]);
        }
        sorted_mu_ = mu_;
        std::sort(sorted_mu_.begin(), sorted_mu_.end());
    }

    const OperatorConfig& config() const { return cfg_; }
    double delta() const { return cfg_.delta; }
    int dimension() const { return cfg_.dimension; }
    std::size_t total_modes() const { return mu_.size(); }
    double psi0() const { return 0.0; } // self-adjoint, non-negative

    // eigenvalues in mode-layout order (1D: already ascending)
    const std::vector<double>& mu_flat() const { return mu_; }
    // eigenvalues ascending
    const std::vector<double>& eigenvalues() const { return sorted_mu_; }
    double mu_max() const { return sorted_mu_.back(); }

    // operator with doubled modes per axis, for dealiased nonlinearities
    std::shared_ptr<const SpectralOperator> refined() const {
        std::lock_guard<std::mutex> lock(refined_mx_);
        if (!refined_) {
            OperatorConfig c = cfg_;
            c.n_modes[0] *= 2;
            c.n_modes[1] *= 2;
            refined_ = std::make_shared<const SpectralOperator>(c);
        }
        return refined_;
    }

private:
    static double sq(double x) { return x * x; }
    OperatorConfig cfg_;
    std::vector<double> mu_, sorted_mu_;
    mutable std::shared_ptr<const SpectralOperator> refined_;
    mutable std::mutex refined_mx_;
};

inline SpectralOperator build_operator(const OperatorConfig& cfg) { return SpectralOperator(cfg); }

// Coefficient vector on the scale of a fixed operator.
struct ScaleVector {
    std::vector<double> coeffs;
    const SpectralOperator* op = nullptr;
};

// Forward transform: physical samples at x_j = j L/(n+1) -> coefficients in
// the orthonormal basis sqrt(2/L) sin(m pi x / L).
inline std::vector<double> forward_transform(const SpectralOperator& op,
                                             const std::vector<double>& values) {
    const auto& cfg = op.config();
    if (values.size() != op.total_modes())
        throw config_error("forward_transform: sample count does not match n_modes");
    if (cfg.dimension == 1) {
        const int n = cfg.n_modes[0];
        std::vector<double> c(n);
        detail::sine_apply(n, values.data(), c.data());
        const double f = std::sqrt(cfg.lengths[0] / 2.0) * 2.0 / (n + 1.0);
        for (auto& v : c) v *= f;
        return c;
    }
    const int n1 = cfg.n_modes[0], n2 = cfg.n_modes[1];
    std::vector<double> tmp(values), out(values.size());
    // transform along axis 2, then axis 1
    for (int i = 0; i < n1; ++i)
        detail::sine_apply(n2, &tmp[static_cast<std::size_t>(i) * n2],
                           &out[static_cast<std::size_t>(i) * n2]);
    std::vector<double> col(n1), colT(n1);
    for (int j = 0; j < n2; ++j) {
        for (int i = 0; i < n1; ++i) col[i] = out[static_cast<std::size_t>(i) * n2 + j];
        detail::sine_apply(n1, col.data(), colT.data());
        for (int i = 0; i < n1; ++i) out[static_cast<std::size_t>(i) * n2 + j] = colT[i];
    }
    const double f = std::sqrt(cfg.lengths[0] / 2.0) * 2.0 / (n1 + 1.0) *
                     std::sqrt(cfg.lengths[1] / 2.0) * 2.0 / (n2 + 1.0);
    for (auto& v : out) v *= f;
    return out;
}

inline std::vector<double> inverse_transform(const SpectralOperator& op,
                                             const std::vector<double>& coeffs) {
    const auto& cfg = op.config();
    if (coeffs.size() != op.total_modes())
        throw config_error("inverse_transform: coefficient count does not match n_modes");
    if (cfg.dimension == 1) {
        const int n = cfg.n_modes[0];
        std::vector<double> u(n);
        detail::sine_apply(n, coeffs.data(), u.data());
        const double f = std::sqrt(2.0 / cfg.lengths[0]);
        for (auto& v : u) v *= f;
        return u;
    }
    const int n1 = cfg.n_modes[0], n2 = cfg.n_modes[1];
    std::vector<double> tmp(coeffs), out(coeffs.size());
    for (int i = 0; i < n1; ++i)
        detail::sine_apply(n2, &tmp[static_cast<std::size_t>(i) * n2],
                           &out[static_cast<std::size_t>(i) * n2]);
    std::vector<double> col(n1), colT(n1);
    for (int j = 0; j < n2; ++j) {
        for (int i = 0; i < n1; ++i) col[i] = out[static_cast<std::size_t>(i) * n2 + j];
        detail::sine_apply(n1, col.data(), colT.data());
        for (int i = 0; i < n1; ++i) out[static_cast<std::size_t>(i) * n2 + j] = colT[i];
    }
    const double f = std::sqrt(2.0 / cfg.lengths[0]) * std::sqrt(2.0 / cfg.lengths[1]);
    for (auto& v : out) v *= f;
    return out;
}

// X_alpha norm: (sum_m (1+mu_m)^{2(alpha-delta)} |c_m|^2)^{1/2}
inline double scale_norm(const ScaleVector& vec, double alpha) {
    const auto& mu = vec.op->mu_flat();
    const double e = alpha - vec.op->delta();
    double s = 0.0;
    for (std::size_t m = 0; m < mu.size(); ++m) {
        const double w = std::pow(1.0 + mu[m], e);
        s += w * w * vec.coeffs[m] * vec.coeffs[m];
    }
    return std::sqrt(s);
}

// Pointwise nonlinearity evaluated on the 2x refined grid, truncated back.
inline std::vector<double> apply_pointwise_dealiased(const SpectralOperator& op,
                                                     const std::vector<double>& coeffs,
                                                     const std::function<double(double)>& f) {
    auto fine = op.refined();
    std::vector<double> padded(fine->total_modes(), 0.0);
    const auto& cfg = op.config();
    if (cfg.dimension == 1) {
        std::copy(coeffs.begin(), coeffs.end(), padded.begin());
    } else {
        const int n1 = cfg.n_modes[0], n2 = cfg.n_modes[1];
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j)
                padded[static_cast<std::size_t>(i) * 2 * n2 + j] =
                    coeffs[static_cast<std::size_t>(i) * n2 + j];
    }
    std::vector<double> u = inverse_transform(*fine, padded);
    for (auto& v : u) v = f(v);
    std::vector<double> c = forward_transform(*fine, u);
    std::vector<double> out(op.total_modes());
    if (cfg.dimension == 1) {
        std::copy(c.begin(), c.begin() + out.size(), out.begin());
    } else {
        const int n1 = cfg.n_modes[0], n2 = cfg.n_modes[1];
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j)
                out[static_cast<std::size_t>(i) * n2 + j] =
                    c[static_cast<std::size_t>(i) * 2 * n2 + j];
    }
    return out;
}

} // namespace memres
