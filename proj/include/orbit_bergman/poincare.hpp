#pragma once

// Poincare sums over an enumerated group, the tracelike deviation of their
// completion Im(z)^s sum |xi(gz)|^2 / |cz+d|^{2s}, and Gram matrices
// <pi(g) xi, pi(h) xi> for wandering diagnostics.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bergman.hpp"
#include "fuchsian.hpp"

namespace orbit_bergman {

inline constexpr double shell_tolerance = 1e-6;

struct PoincareSums {
    Complex holomorphic;     // sum xi(gz)^2 / (cz+d)^{2s}
    double absolute;         // sum |xi(gz)|^2 / |cz+d|^{2s}
    double shell_increment;  // contribution of the outermost dyadic shell sup-norm in (B/2, B]
    std::int64_t max_entry;  // B
    std::size_t terms;
    bool converged;          // shell_increment <= shell_tolerance * absolute
};

/// Both sums over the given elements, accumulated in the order given. The elements should be all
/// group elements up to a sup-norm budget (enumerate_group with no word limit).
inline PoincareSums poincare_sums(const Evaluator& xi, const Point& z, double s, const std::vector<GroupElement>& elems) {
    require(s > 1.0, ErrorKind::precondition, "Poincare sums need s > 1");
    require(z.model() == Model::half_plane, ErrorKind::precondition, "Poincare sums take a half-plane point");
    require(!elems.empty(), ErrorKind::precondition, "empty element list");
    std::int64_t bound = 0;
    for (const auto& g : elems) bound = std::max(bound, g.sup_norm());
    PoincareSums out{0.0, 0.0, 0.0, bound, elems.size(), true};
    const Complex zv = z.value();
    for (const auto& g : elems) {
        const Complex j = static_cast<double>(g.c()) * zv + static_cast<double>(g.d());
        const Complex gz = apply_moebius(g, z).value();
        const Complex v = xi(gz);
        const Complex js = automorphy(g, z, s);
        out.holomorphic += v * v / (js * js);
        const double a = std::norm(v) * std::pow(std::norm(j), -s);
        out.absolute += a;
        if (2 * g.sup_norm() > bound) out.shell_increment += a;
    }
    out.converged = out.shell_increment <= shell_tolerance * out.absolute;
    return out;
}

struct TracelikeSample {
    Complex z;
    double completed;  // Im(z)^s * absolute sum
    double shell_increment;
    bool converged;
};

struct TracelikeReport {
    std::vector<TracelikeSample> samples;
    double constant;   // least-squares fit of a constant to the completed values
    double deviation;  // max |value - constant| / constant
    std::int64_t max_entry;
    std::size_t terms;
};

/// Fits the constant of a tracelike function and measures the departure from it. Unconverged
/// sums are an error when strict is set.
inline TracelikeReport tracelike_deviation(const Evaluator& xi, double s, const std::vector<Point>& samples,
                                           const std::vector<GroupElement>& elems, bool strict = false) {
    require(samples.size() >= 2, ErrorKind::precondition, "tracelike deviation needs at least two samples");
    TracelikeReport out{{}, 0.0, 0.0, 0, elems.size()};
    for (const auto& z : samples) {
        const auto r = poincare_sums(xi, z, s, elems);
        if (strict && !r.converged) {
            throw Error(ErrorKind::convergence, "Poincare sum not converged at the enumeration budget (shell share " +
                                                    std::to_string(r.shell_increment / r.absolute) + ")");
        }
        out.max_entry = r.max_entry;
        out.samples.push_back({z.value(), std::pow(z.value().imag(), s) * r.absolute, r.shell_increment, r.converged});
    }
    double mean = 0.0;
    for (const auto& t : out.samples) mean += t.completed;
    mean /= static_cast<double>(out.samples.size());
    require(mean > 0.0, ErrorKind::precondition, "tracelike deviation of the zero vector is undefined");
    out.constant = mean;
    for (const auto& t : out.samples) out.deviation = std::max(out.deviation, std::abs(t.completed - mean) / mean);
    return out;
}

struct GramReport {
    std::vector<GroupElement> elements;
    Eigen::MatrixXcd matrix;    // G(i,j) = <pi(g_i) xi, pi(g_j) xi>
    double wandering_deviation;  // max_{g != id} |G(g, id)| / G(id, id)
    double min_eigenvalue;
    double max_truncation_loss;
    std::size_t truncation;
};

struct GramOptions {
    std::optional<std::size_t> truncation;  // starting output truncation, default that of xi
    double max_loss = 1e-6;
    std::size_t cap = 1 << 14;
};

/// Gram matrix of the translates of xi. The output truncation is doubled until every
/// translate loses at most max_loss of its norm beyond it.
inline GramReport gram_matrix(const BergmanElement& xi, const std::vector<GroupElement>& elems, double s,
                              const GramOptions& opts = {}) {
    require(xi.weight() == s, ErrorKind::precondition, "gram_matrix weight does not match the element");
    const auto id_it = std::find_if(elems.begin(), elems.end(), [](const GroupElement& g) { return g.is_identity(); });
    require(id_it != elems.end(), ErrorKind::precondition, "gram_matrix needs the identity among the elements");
    require(xi.norm() > 0.0, ErrorKind::precondition, "gram_matrix of the zero vector");
    std::size_t n = std::max<std::size_t>(opts.truncation.value_or(xi.truncation()), 8);
    std::vector<BergmanElement> images;
    double loss = 0.0;
    for (;;) {
        images.clear();
        loss = 0.0;
        bool ok = true;
        for (const auto& g : elems) {
            PiActionOptions po;
            po.truncation = n;
            po.max_loss = std::numeric_limits<double>::infinity();
            auto r = pi_action_report(g, xi, po);
            loss = std::max(loss, r.truncation_loss);
            if (r.truncation_loss > opts.max_loss) {
                ok = false;
                break;
            }
            images.push_back(std::move(r.image));
        }
        if (ok) break;
        require(n < opts.cap, ErrorKind::truncation,
                "gram_matrix: translates still lose " + std::to_string(loss) + " at truncation " + std::to_string(n));
        n *= 2;
    }
    const auto m = static_cast<Eigen::Index>(elems.size());
    GramReport out{elems, Eigen::MatrixXcd(m, m), 0.0, 0.0, loss, n};
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i; j < m; ++j) {
            const Complex v = inner_product(images[i], images[j]);
            out.matrix(i, j) = v;
            out.matrix(j, i) = std::conj(v);
        }
    const auto id = static_cast<Eigen::Index>(id_it - elems.begin());
    const double diag = out.matrix(id, id).real();
    for (Eigen::Index i = 0; i < m; ++i)
        if (i != id) out.wandering_deviation = std::max(out.wandering_deviation, std::abs(out.matrix(i, id)) / diag);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(out.matrix, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = eig.eigenvalues().minCoeff();
    return out;
}

/// e_0 transported to the half-plane: the constant function on the disc.
inline Evaluator transported_e0(double s) {
    return [s](Complex z) { return half_plane_basis_eval(0, s, Point::half_plane(z)); };
}

}  // namespace orbit_bergman
