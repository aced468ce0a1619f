#pragma once

// Zero-set experiments. Extremal values: the squared distance from the kernel at z* to the span
// of kernels at orbit points, for growing prefixes of the orbit. Wandering candidates: the
// finite version of the left-order construction on Gamma(2), built from a function vanishing
// on the orbit.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bergman.hpp"
#include "dimension.hpp"
#include "fuchsian.hpp"
#include "modular.hpp"

namespace orbit_bergman {

inline constexpr double pivot_floor = 1e-12;

struct ExtremalProfile {
    double s;
    Complex z_star;                // disc coordinate
    std::vector<Complex> points;   // disc coordinates, in constraint order
    std::vector<double> lambda;    // lambda[M] for M = 0..points.size()
    std::size_t skipped = 0;       // points whose pivot fell below the floor
    bool hit_zero = false;         // z* coincides with a constraint point, or rounding reached 0
};

namespace detail {

/// Normalised kernel cosine <u_a, u_b> with u = eps / |eps|; (1-|a|^2)^{s/2}(1-|b|^2)^{s/2} / (1 - b conj(a))^s.
inline Complex kernel_cosine(double s, Complex a, Complex b) {
    const double la = std::log1p(-std::norm(a)), lb = std::log1p(-std::norm(b));
    return std::exp(0.5 * s * (la + lb) - s * std::log(1.0 - b * std::conj(a)));
}

}  // namespace detail

/// lambda_M for every prefix of points: K(z*,z*) (1 - |P_M u|^2), where P_M projects onto the span
/// of the first M normalised kernels. Factorised by Cholesky of the normalised Gram matrix in
/// constraint order; a point whose pivot falls below pivot_floor is numerically in the span of
/// the earlier ones and is skipped.
inline ExtremalProfile extremal_profile_values(double s, const Point& z_star, const std::vector<Point>& points) {
    require(s > 1.0, ErrorKind::precondition, "weight s must exceed 1");
    require(z_star.model() == Model::disc, ErrorKind::precondition, "z* must be a disc point");
    const Complex zs = z_star.value();
    ExtremalProfile out{s, zs, {}, {}, 0, false};
    for (const auto& p : points) {
        require(p.model() == Model::disc, ErrorKind::precondition, "constraint points must be disc points");
        out.points.push_back(p.value());
    }
    const double k_star = (s - 1.0) / (4.0 * pi) * std::exp(-s * std::log1p(-std::norm(zs)));
    const auto m = static_cast<Eigen::Index>(points.size());
    out.lambda.assign(points.size() + 1, k_star);
    if (m == 0) return out;

    Eigen::MatrixXcd g(m, m);
    Eigen::VectorXcd k(m);
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t ui) {
        const auto i = static_cast<Eigen::Index>(ui);
        for (Eigen::Index j = 0; j <= i; ++j) {
            const Complex v = i == j ? Complex(1.0) : detail::kernel_cosine(s, out.points[i], out.points[j]);
            g(i, j) = v;
            g(j, i) = std::conj(v);
        }
        k(i) = detail::kernel_cosine(s, out.points[i], zs);
    });

    Eigen::VectorXcd c;
    std::vector<bool> used(points.size(), true);
    Eigen::LLT<Eigen::MatrixXcd> llt(g);
    bool direct = llt.info() == Eigen::Success;
    if (direct) {
        const Eigen::MatrixXcd& l = llt.matrixLLT();
        for (Eigen::Index i = 0; i < m && direct; ++i) direct = std::norm(l(i, i)) >= pivot_floor;
        if (direct) c = llt.matrixL().solve(k);
    }
    if (!direct) {
        // row-by-row factorisation of the kept points only
        Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(m, m);
        c = Eigen::VectorXcd::Zero(m);
        std::vector<Eigen::Index> kept;
        Eigen::VectorXcd cz;
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto r = static_cast<Eigen::Index>(kept.size());
            Eigen::VectorXcd col(r);
            for (Eigen::Index a = 0; a < r; ++a) col(a) = g(kept[a], i);
            Eigen::VectorXcd x = r ? Eigen::VectorXcd(l.topLeftCorner(r, r).triangularView<Eigen::Lower>().solve(col))
                                   : Eigen::VectorXcd();
            const double d = 1.0 - x.squaredNorm();
            if (d < pivot_floor) {
                used[i] = false;
                ++out.skipped;
                continue;
            }
            const double piv = std::sqrt(d);
            for (Eigen::Index a = 0; a < r; ++a) l(r, a) = std::conj(x(a));
            l(r, r) = piv;
            Complex acc = k(i);
            for (Eigen::Index a = 0; a < r; ++a) acc -= l(r, a) * cz(a);
            cz.conservativeResize(r + 1);
            cz(r) = acc / piv;
            c(i) = cz(r);
            kept.push_back(i);
        }
    }
    double captured = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (used[i]) captured += std::norm(c(i));
        const double rest = 1.0 - captured;
        if (rest <= 0.0) out.hit_zero = true;
        out.lambda[i + 1] = k_star * std::max(rest, 0.0);
    }
    for (const auto& p : out.points)
        if (std::abs(p - zs) < 1e-14) out.hit_zero = true;
    if (out.hit_zero) {
        // z* in the constraint set: exactly zero from the first prefix containing it on
        for (std::size_t i = 0; i < out.points.size(); ++i)
            if (std::abs(out.points[i] - zs) < 1e-14)
                for (std::size_t j = i + 1; j < out.lambda.size(); ++j) out.lambda[j] = 0.0;
    }
    return out;
}

inline double extremal_value(double s, const Point& z_star, const std::vector<Point>& points) {
    return extremal_profile_values(s, z_star, points).lambda.back();
}

struct ExtremalBudget {
    std::int64_t max_entry = 40;
    std::size_t max_points = 4096;
};

struct SRegime {
    double s;
    std::size_t m;          // largest common M
    double lambda_m;        // lambda at M
    double lambda_half;     // lambda at M/2
    double relative_change; // (lambda_half - lambda_m) / lambda_half
};

struct DichotomyReport {
    std::vector<ExtremalProfile> profiles;
    double critical;
    double certified_radius;  // hyperbolic radius around z* inside which the orbit is complete
    std::vector<SRegime> regimes;
};

/// Orbit points of z within the certified hyperbolic ball around z*, nearest first. A point g z with
/// d(z*, g z) < R has |g|_F^2 = 2 cosh d(i, g i) <= 2 cosh(d(i, z*) + R + d(z, i)), so
/// R = acosh(B^2/2) - d(i, z*) - d(i, z) certifies completeness for a sup-norm budget B.
inline std::pair<std::vector<Point>, double> certified_orbit_ball(const GroupPreset& preset, const Point& z,
                                                                  const Point& z_star, const ExtremalBudget& budget) {
    const Point hz = z.model() == Model::half_plane ? z : to_half_plane(z);
    const Point dz = z_star.model() == Model::disc ? z_star : to_disc(z_star);
    Budget b;
    b.max_entry = budget.max_entry;
    const auto orbit = orbit_sample(preset, hz, b);
    const Point i_pt = Point::half_plane(I);
    const double big_b = static_cast<double>(budget.max_entry);
    const double radius = std::acosh(0.5 * big_b * big_b) - hyperbolic_distance(i_pt, to_half_plane(dz)) -
                          hyperbolic_distance(i_pt, hz);
    require(radius > 0.0, ErrorKind::coverage, "entry budget certifies no ball around z*");
    std::vector<std::pair<double, Complex>> near;
    for (const auto& e : orbit.entries) {
        const Complex w = to_disc(e.image).value();
        const double d = hyperbolic_distance(dz, Point::disc(w));
        if (d < radius) near.push_back({d, w});
    }
    std::sort(near.begin(), near.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        if (a.second.real() != b.second.real()) return a.second.real() < b.second.real();
        return a.second.imag() < b.second.imag();
    });
    if (near.size() > budget.max_points) near.resize(budget.max_points);
    std::vector<Point> pts;
    for (const auto& [d, w] : near) pts.push_back(Point::disc(w));
    return {pts, radius};
}

inline DichotomyReport extremal_profile(const GroupPreset& preset, const Point& z, const Point& z_star,
                                        const std::vector<double>& s_grid, const ExtremalBudget& budget = {}) {
    require(!s_grid.empty(), ErrorKind::precondition, "empty weight grid");
    const auto [pts, radius] = certified_orbit_ball(preset, z, z_star, budget);
    const Point dz = z_star.model() == Model::disc ? z_star : to_disc(z_star);
    DichotomyReport out{{}, critical_exponent(preset), radius, {}};
    for (double s : s_grid) out.profiles.push_back(extremal_profile_values(s, dz, pts));
    const std::size_t m = pts.size();
    for (const auto& p : out.profiles) {
        const double lm = p.lambda[m], lh = p.lambda[m / 2];
        out.regimes.push_back({p.s, m, lm, lh, lh > 0.0 ? (lh - lm) / lh : 0.0});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Wandering candidates on Gamma(2)

struct OrderedPoint {
    Complex w;         // disc coordinate of g z0
    FreeWord word;     // g in the free generators A, B
    int sign;          // -1: g < id, 0: g = id, +1: g > id in the Magnus order
};

struct WanderingCandidate {
    std::string order = "magnus";
    std::vector<OrderedPoint> points;  // the M points, sorted by the order
    std::size_t truncation;            // N
    std::size_t constraints;           // number of points with g < id
    BergmanElement xi;                 // unit vector in V and orthogonal to U
    double constraint_residual;        // max over g < id of |xi(g z0)| / |eps_{g z0}|
    double gram_offdiag;               // max over the generators of |<xi, pi(g) xi>|
    double orthogonality;              // max over id and the generators of |<xi, pi(g) f>| / |f|
    double f_residual;                 // max over the points of |f(p)| / (|eps_p| |f|)
};

struct WanderingOptions {
    double rho_max = 0.999;        // sampling radius for f and its translates
    std::size_t min_points = 8192; // samples per circle
    std::size_t norm_truncation = 0;  // truncation for |f|, default max(4N, 400)
};

/// Points g z0 for g in Gamma(2), the M nearest to z0, labelled by their free words and sorted
/// in the Magnus order.
inline std::vector<OrderedPoint> magnus_ordered_orbit(const Point& z0, std::size_t m, std::int64_t max_entry) {
    const Point hz = z0.model() == Model::half_plane ? z0 : to_half_plane(z0);
    Budget b;
    b.max_entry = max_entry;
    const auto orbit = orbit_sample(gamma2(), hz, b);
    const Complex w0 = to_disc(hz).value();
    std::vector<std::pair<double, std::size_t>> by_dist;
    for (std::size_t i = 0; i < orbit.entries.size(); ++i)
        by_dist.push_back({pseudo_distance(to_disc(orbit.entries[i].image).value(), w0), i});
    std::sort(by_dist.begin(), by_dist.end());
    require(by_dist.size() >= m, ErrorKind::budget, "orbit enumeration has fewer points than requested");
    const double cut = by_dist[m - 1].first;
    require(m == by_dist.size() || by_dist[m].first > cut, ErrorKind::precondition,
            "tie at the constraint cut; change M");
    // the ball of that radius around z0 must be complete for the entry budget
    const double big_b = static_cast<double>(max_entry);
    const double radius = std::acosh(0.5 * big_b * big_b) - 2.0 * hyperbolic_distance(Point::half_plane(I), hz);
    require(2.0 * std::atanh(cut) < radius, ErrorKind::coverage, "entry budget does not certify the M nearest points");
    std::vector<OrderedPoint> out;
    for (std::size_t k = 0; k < m; ++k) {
        const auto& e = orbit.entries[by_dist[k].second];
        const FreeWord word = gamma2_decompose(e.element);
        out.push_back({to_disc(e.image).value(), word, magnus_sign(word)});
    }
    std::sort(out.begin(), out.end(), [](const OrderedPoint& a, const OrderedPoint& b) { return magnus_less(a.word, b.word); });
    return out;
}

/// Unit vector of the truncated space e_0..e_N vanishing at the points with g < id and orthogonal
/// to the subspace that also vanishes at z0: the normalised projection of eps_{z0} away from the
/// kernels at the constraint points.
inline WanderingCandidate wandering_truncated(const std::vector<OrderedPoint>& points, const Evaluator& f, double s,
                                              std::size_t n, const WanderingOptions& opts = {}) {
    require(s > 1.0, ErrorKind::precondition, "weight s must exceed 1");
    const auto id_it = std::find_if(points.begin(), points.end(), [](const OrderedPoint& p) { return p.sign == 0; });
    require(id_it != points.end(), ErrorKind::precondition, "the base point must be among the orbit points");
    const Complex w0 = id_it->w;

    std::vector<Complex> cons;
    for (const auto& p : points)
        if (p.sign < 0) cons.push_back(p.w);
    const auto nn = static_cast<Eigen::Index>(n + 1), mc = static_cast<Eigen::Index>(cons.size());
    auto unit_kernel = [&](Complex w) {
        const auto e = kernel_element(s, Point::disc(w), n);
        Eigen::VectorXcd v(nn);
        for (Eigen::Index i = 0; i < nn; ++i) v(i) = e.coefficients()[i];
        return Eigen::VectorXcd(v / v.norm());
    };
    Eigen::VectorXcd x = unit_kernel(w0);
    if (mc > 0) {
        Eigen::MatrixXcd a(nn, mc);
        for (Eigen::Index j = 0; j < mc; ++j) a.col(j) = unit_kernel(cons[j]);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
        qr.setThreshold(1e-13);
        const Eigen::Index rank = qr.rank();
        const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(nn, rank);
        x -= q * (q.adjoint() * x);
        x -= q * (q.adjoint() * x);  // second pass for orthogonality
    }
    const double xn = x.norm();
    require(xn > 1e-12, ErrorKind::precondition, "no candidate: the truncation leaves V equal to U");
    x /= xn;
    std::vector<Complex> coeffs(x.data(), x.data() + nn);
    WanderingCandidate out{"magnus", points, n, cons.size(), BergmanElement(s, coeffs), 0.0, 0.0, 0.0, 0.0};

    for (const auto& w : cons) {
        const auto e = kernel_element(s, Point::disc(w), n);
        out.constraint_residual = std::max(out.constraint_residual, std::abs(inner_product(out.xi, e)) / e.norm());
    }

    const std::vector<GroupElement> gens{GroupElement::generator(Generator::A), GroupElement::generator(Generator::A_inv),
                                         GroupElement::generator(Generator::B), GroupElement::generator(Generator::B_inv)};
    for (const auto& g : gens) {
        const auto img = pi_action_adaptive(g, out.xi, 1e-12).image;
        out.gram_offdiag = std::max(out.gram_offdiag, std::abs(inner_product(out.xi, img)));
    }

    SamplingOptions so;
    so.rho_max = opts.rho_max;
    so.min_points = opts.min_points;
    const std::size_t nf = opts.norm_truncation ? opts.norm_truncation : std::max<std::size_t>(4 * n, 400);
    const BergmanElement fe = from_evaluator(f, s, nf, so);
    const double f_norm = fe.norm();
    require(f_norm > 0.0, ErrorKind::precondition, "f vanishes identically");
    for (const auto& p : points) {
        const auto e = kernel_element(s, Point::disc(p.w), n);
        out.f_residual = std::max(out.f_residual, std::abs(f(p.w)) / (e.norm() * f_norm));
    }
    std::vector<GroupElement> probes{GroupElement::identity()};
    probes.insert(probes.end(), gens.begin(), gens.end());
    for (const auto& g : probes) {
        const BergmanElement img = g.is_identity() ? fe.truncated(n) : from_evaluator(pi_action_evaluator(g, s, f), s, n, so);
        out.orthogonality = std::max(out.orthogonality, std::abs(inner_product(out.xi, img)) / f_norm);
    }
    return out;
}

/// f(z) = (E4^3 - w Delta)(z) eta(z)^r (2/(z+i))^{s0} carried to the disc with weight
/// t = s0 + 12 + r/2: F(w) = f(z) ((z+i)/2)^t at z = C^{-1} w. It vanishes on the orbit {j = w}.
struct TransportedVanishing {
    VanishingFunction base;
    double s0;
    double weight;

    TransportedVanishing(Complex w, double r, double s0_) : base(w, r), s0(s0_), weight(s0_ + 12.0 + r / 2.0) {
        require(s0_ > 1.0, ErrorKind::precondition, "the half-plane factor exponent must exceed 1");
    }

    Complex half_plane(Complex z) const { return base(z) * std::exp(s0 * std::log(2.0 / (z + I))); }

    Complex operator()(Complex w) const {
        const Complex z = I * (1.0 + w) / (1.0 - w);
        return base(z) * std::exp((weight - s0) * std::log((z + I) / 2.0));
    }

    Evaluator evaluator() const {
        return [self = *this](Complex w) { return self(w); };
    }
};

}  // namespace orbit_bergman
