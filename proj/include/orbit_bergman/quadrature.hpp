#pragma once

// Gauss rules from the Golub-Welsch eigenproblem, plus the quadrature
// configuration shared by disc and fundamental-domain integrals.

#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "common.hpp"

namespace orbit_bergman {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Jacobi rule for the weight (1 - x)^a (1 + x)^b on [-1, 1].
inline GaussRule gauss_jacobi(int n, double a, double b) {
    require(n >= 1, ErrorKind::precondition, "quadrature order must be at least 1");
    require(a > -1.0 && b > -1.0, ErrorKind::precondition, "Jacobi exponents must exceed -1");
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 1));
    const double ab = a + b;
    for (int k = 0; k < n; ++k) {
        const double m = 2.0 * k + ab;
        if (k == 0) {
            diag(k) = (b - a) / (ab + 2.0);
        } else {
            diag(k) = (b * b - a * a) / (m * (m + 2.0));
        }
    }
    for (int k = 1; k < n; ++k) {
        const double m = 2.0 * k + ab;
        double v = 4.0 * k * (k + a) * (k + b) * (k + ab) / (m * m * (m + 1.0) * (m - 1.0));
        if (k == 1 && std::abs(ab + 1.0) < 1e-14) v = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
        sub(k - 1) = std::sqrt(v);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
    require(eig.info() == Eigen::Success, ErrorKind::convergence, "Golub-Welsch eigensolver failed");
    const double mu0 =
        std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = eig.eigenvalues()(k);
        const double v0 = eig.eigenvectors()(0, k);
        rule.weights[k] = mu0 * v0 * v0;
    }
    return rule;
}

inline GaussRule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

/// Cached Legendre rule; rules are immutable once built.
inline const GaussRule& cached_legendre(int n) {
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
    return it->second;
}

/// Rule on t in [0, 1] for the weight (1 - t)^alpha.
inline GaussRule radial_rule(int n, double alpha) {
    GaussRule rule = gauss_jacobi(n, alpha, 0.0);
    const double scale = std::pow(2.0, -(alpha + 1.0));
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        rule.nodes[k] = 0.5 * (1.0 + rule.nodes[k]);
        rule.weights[k] *= scale;
    }
    return rule;
}

/// Disc integrals use a Gauss-Jacobi rule in t = |w|^2 and a uniform angular grid.
/// Fundamental-domain integrals use dyadic subdivision in Im z up to 1/cusp_cutoff.
struct QuadratureSpec {
    int radial_order = 40;
    int angular_points = 96;
    int subdivision_depth = 24;
    double cusp_cutoff = 1e-3;

    void validate() const {
        require(radial_order >= 1 && angular_points >= 1 && subdivision_depth >= 1, ErrorKind::precondition,
                "quadrature orders must be at least 1");
        require(cusp_cutoff > 0.0 && cusp_cutoff < 1.0, ErrorKind::precondition, "cusp cutoff must lie in (0,1)");
    }

    QuadratureSpec refined() const {
        QuadratureSpec r = *this;
        r.radial_order *= 2;
        r.angular_points *= 2;
        r.subdivision_depth += 4;
        return r;
    }

    double y_max() const { return 1.0 / cusp_cutoff; }
};

}  // namespace orbit_bergman
