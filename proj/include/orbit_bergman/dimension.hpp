#pragma once

// von Neumann dimension (s-1)/4pi * covolume, the critical weight where it equals 1,
// its check by integrating the orthonormal basis over the standard domain, and the
// growth rate of Blaschke sums over an orbit.

#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "bergman.hpp"
#include "fuchsian.hpp"
#include "quadrature.hpp"

namespace orbit_bergman {

inline Rational reduced(std::int64_t num, std::int64_t den) {
    require(den != 0, ErrorKind::precondition, "zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    return {num / g, den / g};
}

/// (s-1)/4pi * covolume with s and the result as exact rationals.
inline Rational vn_dimension_exact(const Rational& s, const GroupPreset& preset) {
    require(s.num > s.den && s.den > 0, ErrorKind::precondition, "vn_dimension needs s > 1");
    const auto& c = preset.covolume_over_pi;
    return reduced((s.num - s.den) * c.num, 4 * s.den * c.den);
}

inline double vn_dimension(double s, const GroupPreset& preset) {
    require(s > 1.0, ErrorKind::precondition, "vn_dimension needs s > 1");
    const auto& c = preset.covolume_over_pi;
    return (s - 1.0) * static_cast<double>(c.num) / (4.0 * static_cast<double>(c.den));
}

/// 1 + 4pi / covolume, the weight at which the dimension is 1.
inline Rational critical_exponent_exact(const GroupPreset& preset) {
    const auto& c = preset.covolume_over_pi;
    return reduced(c.num + 4 * c.den, c.num);
}

inline double critical_exponent(const GroupPreset& preset) {
    const Rational r = critical_exponent_exact(preset);
    return static_cast<double>(r.num) / static_cast<double>(r.den);
}

struct DimensionReport {
    double s;
    std::string preset;
    double formula;
    std::vector<double> partial_sums;  // partial_sums[n] = sum_{k <= n} int_F |e_k|^2 (1-|w|^2)^{s-2} 4 du dv
    double cusp_bound;                 // total mass of all e_k above Im z = y_max
    double refinement_delta;           // change of the last partial sum under the refined spec
    QuadratureSpec spec;
};

namespace detail {

struct DomainNode {
    double t;       // |w|^2 at the node
    double weight;  // quadrature weight times (1 - t)^s / y^2
};

/// Nodes over {|x| <= 1/2, |z| >= 1, y <= y_max}: a curved cell above the arc, then
/// dyadic cells in y, each a tensor Gauss-Legendre rule.
inline std::vector<DomainNode> domain_nodes(double s, const QuadratureSpec& spec) {
    const GaussRule& gy = cached_legendre(spec.radial_order);
    const GaussRule& gx = cached_legendre(spec.angular_points);
    const double y_max = spec.y_max();
    std::vector<DomainNode> out;
    auto add = [&](double x, double y, double w) {
        const Complex z(x, y);
        const double t = std::norm((z - I) / (z + I));
        // 1 - |w|^2 = 4y / |z + i|^2, computed without cancellation
        const double one_minus_t = 4.0 * y / std::norm(z + I);
        out.push_back({t, w * std::pow(one_minus_t, s) / (y * y)});
    };
    // x nodes on [-1/2, 1/2]; y in [sqrt(1 - x^2), 1] for the bottom cell
    for (std::size_t i = 0; i < gx.nodes.size(); ++i) {
        const double x = 0.5 * gx.nodes[i];
        const double wx = 0.5 * gx.weights[i];
        const double y0 = std::sqrt(1.0 - x * x);
        const double h = 1.0 - y0;
        if (h > 0.0)
            for (std::size_t k = 0; k < gy.nodes.size(); ++k)
                add(x, y0 + 0.5 * h * (gy.nodes[k] + 1.0), wx * 0.5 * h * gy.weights[k]);
        double lo = 1.0;
        int depth = 0;
        while (lo < y_max) {
            require(depth++ < spec.subdivision_depth + 64, ErrorKind::quadrature, "too many cusp cells");
            const double hi = std::min(2.0 * lo, y_max);
            const double hh = hi - lo;
            for (std::size_t k = 0; k < gy.nodes.size(); ++k)
                add(x, lo + 0.5 * hh * (gy.nodes[k] + 1.0), wx * 0.5 * hh * gy.weights[k]);
            lo = hi;
        }
    }
    return out;
}

inline std::vector<double> domain_partial_sums(double s, std::size_t basis_n, const QuadratureSpec& spec) {
    const auto nodes = domain_nodes(s, spec);
    // moments S_n = sum weight * t^n, accumulated per node chunk and summed in a fixed order
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(worker_count() * 4, nodes.size()));
    std::vector<std::vector<double>> partial(chunks, std::vector<double>(basis_n + 1, 0.0));
    parallel_for(chunks, [&](std::size_t c) {
        auto& acc = partial[c];
        for (std::size_t i = c; i < nodes.size(); i += chunks) {
            double p = nodes[i].weight;
            for (std::size_t n = 0; n <= basis_n; ++n) {
                acc[n] += p;
                p *= nodes[i].t;
                if (p < 1e-300) break;
            }
        }
    });
    std::vector<double> sums(basis_n + 1);
    double running = 0.0;
    for (std::size_t n = 0; n <= basis_n; ++n) {
        double m = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) m += partial[c][n];
        const double f = basis_factor(n, s);
        running += f * f * m;
        sums[n] = running;
    }
    return sums;
}

}  // namespace detail

/// Partial sums over the basis of the integrals over the standard domain of PSL(2,Z). The region
/// above Im z = 1/cusp_cutoff is dropped; its total over all basis vectors is (s-1)/(4pi y_max),
/// reported as cusp_bound and required to be at most cusp_tolerance.
inline DimensionReport vn_dimension_numeric(double s, const GroupPreset& preset, std::size_t basis_n,
                                            const QuadratureSpec& spec = {}, double cusp_tolerance = 1e-2) {
    require(s > 1.0, ErrorKind::precondition, "vn_dimension needs s > 1");
    require(preset.name == PresetName::PSL2Z, ErrorKind::precondition,
            "numeric dimension is implemented for the PSL2Z domain only");
    spec.validate();
    const double cusp = (s - 1.0) / (4.0 * pi * spec.y_max());
    if (cusp > cusp_tolerance) {
        throw Error(ErrorKind::quadrature, "cusp contribution bound " + std::to_string(cusp) + " exceeds tolerance " +
                                               std::to_string(cusp_tolerance));
    }
    DimensionReport out{s, preset.label(), vn_dimension(s, preset), detail::domain_partial_sums(s, basis_n, spec),
                        cusp, 0.0, spec};
    QuadratureSpec fine = spec.refined();
    fine.cusp_cutoff = spec.cusp_cutoff;  // same region, finer rules
    const auto refined = detail::domain_partial_sums(s, basis_n, fine);
    out.refinement_delta = std::abs(refined.back() - out.partial_sums.back());
    return out;
}

struct DensityEstimate {
    std::vector<double> radii;
    std::vector<double> partial_sums;  // sum over orbit points with |w| < rho of (1 - |w|)
    double slope;                      // least-squares slope against log(1/(1 - rho))
    double intercept;
    double target;                     // 2pi / (stabiliser order * covolume)
    double certified_radius;
    bool covered;                      // every radius is certified
    std::size_t points;
};

/// Radius up to which the orbit sample is complete. With only a sup-norm budget B, a missing g has
/// sup-norm > B, so d(i, g i) = acosh(|g|_F^2 / 2) > acosh(B^2 / 2) and d(i, g z) > that minus d(i, z).
inline double certified_radius(const OrbitSample& orbit) {
    if (orbit.budget.max_word_len >= 0 || orbit.budget.max_entry < 2) return 0.0;
    const Point hz = orbit.base.model() == Model::half_plane ? orbit.base : to_half_plane(orbit.base);
    const double b = static_cast<double>(orbit.budget.max_entry);
    const double d = std::acosh(0.5 * b * b) - hyperbolic_distance(Point::half_plane(I), hz);
    return d > 0.0 ? std::tanh(0.5 * d) : 0.0;
}

/// Increasing radii with log(1/(1 - rho)) evenly spaced from l_min up to the certified radius.
inline std::vector<double> certified_radii(const OrbitSample& orbit, std::size_t count, double l_min = 2.0) {
    require(count >= 2, ErrorKind::precondition, "need at least two radii");
    const double rc = certified_radius(orbit);
    require(rc > 0.0, ErrorKind::coverage, "the enumeration budget certifies no radius");
    const double l_max = -std::log1p(-rc);
    require(l_max > l_min, ErrorKind::coverage, "certified radius below the smallest requested radius");
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double l = l_min + (l_max - l_min) * static_cast<double>(k) / static_cast<double>(count - 1);
        out[k] = -std::expm1(-l);
    }
    out.back() = std::min(out.back(), rc);
    return out;
}

inline DensityEstimate density_estimate(const OrbitSample& orbit, const GroupPreset& preset,
                                        const std::vector<double>& radii, bool strict = true) {
    require(radii.size() >= 2, ErrorKind::precondition, "need at least two radii");
    for (std::size_t k = 0; k < radii.size(); ++k) {
        require(radii[k] > 0.0 && radii[k] < 1.0, ErrorKind::precondition, "radii must lie in (0,1)");
        require(k == 0 || radii[k] > radii[k - 1], ErrorKind::precondition, "radii must increase");
    }
    DensityEstimate out{radii, {}, 0.0, 0.0, 0.0, certified_radius(orbit), true, orbit.entries.size()};
    out.covered = radii.back() <= out.certified_radius;
    if (strict && !out.covered) {
        throw Error(ErrorKind::coverage, "enumeration budget certifies radius " + std::to_string(out.certified_radius) +
                                             " below the largest requested " + std::to_string(radii.back()));
    }
    out.target = 2.0 * pi / (static_cast<double>(orbit.stabilizer_order) * preset.covolume());

    std::vector<double> mod;
    mod.reserve(orbit.entries.size());
    for (const auto& e : orbit.entries) {
        const Point w = e.image.model() == Model::disc ? e.image : to_disc(e.image);
        mod.push_back(std::abs(w.value()));
    }
    std::sort(mod.begin(), mod.end());
    std::size_t i = 0;
    double acc = 0.0;
    for (double rho : radii) {
        for (; i < mod.size() && mod[i] < rho; ++i) acc += 1.0 - mod[i];
        out.partial_sums.push_back(acc);
    }
    // ordinary least squares of the sums against L = log(1/(1 - rho))
    const auto n = static_cast<double>(radii.size());
    double sl = 0.0, ss = 0.0, sll = 0.0, sls = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double l = -std::log1p(-radii[k]);
        sl += l;
        ss += out.partial_sums[k];
        sll += l * l;
        sls += l * out.partial_sums[k];
    }
    out.slope = (n * sls - sl * ss) / (n * sll - sl * sl);
    out.intercept = (ss - out.slope * sl) / n;
    return out;
}

}  // namespace orbit_bergman
