#pragma once

// Weighted Bergman space A^2_{s-2} on the disc, stored as coefficients in the
// orthonormal monomial basis e_n(w) = sqrt((s-1)/4pi) sqrt((s)_n / n!) w^n.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <unsupported/Eigen/FFT>

#include "moebius.hpp"
#include "quadrature.hpp"

namespace orbit_bergman {

/// log of sqrt((s-1)/4pi) sqrt(Gamma(s+n) / (Gamma(s) n!)).
inline double log_basis_factor(std::size_t n, double s) {
    const double nn = static_cast<double>(n);
    return 0.5 * (std::log((s - 1.0) / (4.0 * pi)) + std::lgamma(s + nn) - std::lgamma(s) - std::lgamma(nn + 1.0));
}

inline double basis_factor(std::size_t n, double s) { return std::exp(log_basis_factor(n, s)); }

inline Complex basis_eval(std::size_t n, double s, const Point& w) {
    require(s > 1.0, ErrorKind::precondition, "weight s must exceed 1");
    require(w.model() == Model::disc, ErrorKind::precondition, "basis_eval expects a disc point");
    if (n == 0) return basis_factor(0, s);
    if (w.value() == 0.0) return 0.0;
    const Complex logw = std::log(w.value());
    return std::exp(log_basis_factor(n, s) + static_cast<double>(n) * logw);
}

class BergmanElement {
  public:
    BergmanElement(double s, std::vector<Complex> coeffs) : s_(s), coeffs_(std::move(coeffs)) {
        require(s > 1.0, ErrorKind::precondition, "weight s must exceed 1");
        require(!coeffs_.empty(), ErrorKind::precondition, "a Bergman element needs at least one coefficient");
    }

    static BergmanElement basis(double s, std::size_t n, std::size_t truncation) {
        require(n <= truncation, ErrorKind::precondition, "basis index beyond truncation");
        std::vector<Complex> c(truncation + 1, 0.0);
        c[n] = 1.0;
        return {s, std::move(c)};
    }

    double weight() const { return s_; }
    std::size_t truncation() const { return coeffs_.size() - 1; }
    const std::vector<Complex>& coefficients() const { return coeffs_; }
    Complex coefficient(std::size_t n) const { return n < coeffs_.size() ? coeffs_[n] : Complex{}; }

    double norm() const {
        double acc = 0.0;
        for (const auto& c : coeffs_) acc += std::norm(c);
        return std::sqrt(acc);
    }

    /// Power-series coefficients a_n = c_n * basis_factor(n).
    std::vector<Complex> taylor() const {
        std::vector<Complex> a(coeffs_.size());
        for (std::size_t n = 0; n < a.size(); ++n) a[n] = coeffs_[n] * basis_factor(n, s_);
        return a;
    }

    /// Evaluation at any complex w (the truncation is a polynomial).
    Complex operator()(Complex w) const {
        Complex acc = 0.0;
        Complex p = basis_factor(0, s_);
        for (std::size_t n = 0; n < coeffs_.size(); ++n) {
            acc += coeffs_[n] * p;
            p *= w * std::sqrt((s_ + static_cast<double>(n)) / static_cast<double>(n + 1));
        }
        return acc;
    }

    Evaluator evaluator() const {
        return [self = *this](Complex w) { return self(w); };
    }

    BergmanElement truncated(std::size_t n) const {
        std::vector<Complex> c(n + 1, 0.0);
        std::copy_n(coeffs_.begin(), std::min(coeffs_.size(), n + 1), c.begin());
        return {s_, std::move(c)};
    }

    BergmanElement scaled(Complex k) const {
        auto c = coeffs_;
        for (auto& x : c) x *= k;
        return {s_, std::move(c)};
    }

    static BergmanElement from_taylor(double s, const std::vector<Complex>& a) {
        std::vector<Complex> c(a.size());
        for (std::size_t n = 0; n < a.size(); ++n) c[n] = a[n] / basis_factor(n, s);
        return {s, std::move(c)};
    }

  private:
    double s_;
    std::vector<Complex> coeffs_;
};

/// Sum c_n(f) conj(c_n(g)); linear in f, conjugate-linear in g.
inline Complex inner_product(const BergmanElement& f, const BergmanElement& g) {
    require(f.weight() == g.weight(), ErrorKind::precondition, "inner product of elements with different weights");
    const std::size_t n = std::min(f.coefficients().size(), g.coefficients().size());
    Complex acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += f.coefficients()[k] * std::conj(g.coefficients()[k]);
    return acc;
}

inline double norm(const BergmanElement& f) { return f.norm(); }

struct QuadResult {
    Complex value;
    double refinement_delta;  // |value(spec refined) - value(spec)|
};

namespace detail {

inline Complex disc_quadrature(const Evaluator& f, const Evaluator& g, double s, const QuadratureSpec& spec) {
    const GaussRule rule = radial_rule(spec.radial_order, s - 2.0);
    const int m = spec.angular_points;
    std::vector<Complex> ring(rule.nodes.size());
    parallel_for(rule.nodes.size(), [&](std::size_t k) {
        const double r = std::sqrt(rule.nodes[k]);
        Complex acc = 0.0;
        for (int j = 0; j < m; ++j) {
            const Complex w = std::polar(r, 2.0 * pi * j / m);
            acc += f(w) * std::conj(g(w));
        }
        ring[k] = acc * (2.0 * pi / m);
    });
    Complex total = 0.0;
    for (std::size_t k = 0; k < ring.size(); ++k) total += rule.weights[k] * ring[k];
    // 4 du dv = 2 dt dtheta with t = |w|^2
    return 2.0 * total;
}

}  // namespace detail

/// Disc inner product of two evaluators against (1 - |w|^2)^{s-2} 4 du dv. The value is the
/// refined-rule result; with a tolerance, a refinement change above it is an error.
inline QuadResult quad_inner(const Evaluator& f, const Evaluator& g, double s, const QuadratureSpec& spec,
                             std::optional<double> tolerance = std::nullopt) {
    require(s > 1.0, ErrorKind::precondition, "weight s must exceed 1");
    spec.validate();
    const Complex coarse = detail::disc_quadrature(f, g, s, spec);
    const Complex fine = detail::disc_quadrature(f, g, s, spec.refined());
    QuadResult out{fine, std::abs(fine - coarse)};
    if (tolerance && out.refinement_delta > *tolerance) {
        throw Error(ErrorKind::quadrature, "quadrature spec too small: refinement changed the result by " +
                                               std::to_string(out.refinement_delta));
    }
    return out;
}

/// K(z, w) = (s-1)/4pi (1 - z conj(w))^{-s}, principal branch.
inline Complex kernel_eval(double s, const Point& z, const Point& w) {
    require(z.model() == Model::disc && w.model() == Model::disc, ErrorKind::precondition,
            "kernel_eval expects disc points");
    return (s - 1.0) / (4.0 * pi) * std::exp(-s * std::log(1.0 - z.value() * std::conj(w.value())));
}

/// The kernel vector at z as coefficients conj(e_n(z)), so that inner_product(f, k) = f(z).
inline BergmanElement kernel_element(double s, const Point& z, std::size_t truncation) {
    require(z.model() == Model::disc, ErrorKind::precondition, "kernel_element expects a disc point");
    std::vector<Complex> c(truncation + 1);
    Complex p = basis_factor(0, s);
    for (std::size_t n = 0; n <= truncation; ++n) {
        c[n] = std::conj(p);
        p *= z.value() * std::sqrt((s + static_cast<double>(n)) / static_cast<double>(n + 1));
    }
    return {s, std::move(c)};
}

/// Sampling controls for extracting coefficients of a holomorphic function from circle values.
struct SamplingOptions {
    double rho_max = 1.0;         // largest sampling radius; 1 only for functions holomorphic past the circle
    std::size_t min_points = 0;   // lower bound on samples per circle
};

/// Coefficients c_0..c_n of F in the e_n basis. Each circle |w| = rho gives every
/// coefficient through one FFT; per index the circle with the smallest rounding
/// estimate max|F| rho^-n / basis_factor(n) is kept.
inline std::vector<Complex> ring_coefficients(const Evaluator& F, double s, std::size_t n,
                                              const SamplingOptions& opts = {}) {
    require(s > 1.0, ErrorKind::precondition, "weight s must exceed 1");
    require(opts.rho_max > 0.0 && opts.rho_max <= 1.0, ErrorKind::precondition, "sampling radius must lie in (0,1]");
    std::size_t k_points = 64;
    while (k_points < std::max(opts.min_points, 4 * (n + 1))) k_points *= 2;

    std::vector<double> radii;
    const double min_gap = std::max(s / (8.0 * static_cast<double>(n + 1)), 1.0 - opts.rho_max);
    for (double gap = 0.7; gap >= min_gap; gap *= 0.8) radii.push_back(1.0 - gap);
    if (opts.rho_max >= 1.0) {
        radii.push_back(1.0);
    } else if (radii.empty() || radii.back() < opts.rho_max) {
        radii.push_back(opts.rho_max);
    }

    std::vector<double> log_fac(n + 1);
    for (std::size_t j = 0; j <= n; ++j) log_fac[j] = log_basis_factor(j, s);

    std::vector<Complex> best(n + 1, 0.0);
    std::vector<double> best_err(n + 1, std::numeric_limits<double>::infinity());
    Eigen::FFT<double> fft;
    std::vector<Complex> samples(k_points), spectrum;
    for (double rho : radii) {
        parallel_for(k_points, [&](std::size_t k) {
            samples[k] = F(std::polar(rho, 2.0 * pi * static_cast<double>(k) / static_cast<double>(k_points)));
        });
        double peak = 0.0;
        for (const auto& v : samples) {
            require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorKind::convergence,
                    "non-finite sample while extracting coefficients");
            peak = std::max(peak, std::abs(v));
        }
        fft.fwd(spectrum, samples);
        const double log_rho = std::log(rho);
        for (std::size_t j = 0; j <= n; ++j) {
            const double log_scale = -static_cast<double>(j) * log_rho - log_fac[j];
            const double err = peak * std::exp(log_scale);
            if (err < best_err[j]) {
                best_err[j] = err;
                best[j] = spectrum[j] * std::exp(log_scale) / static_cast<double>(k_points);
            }
        }
    }
    return best;
}

inline BergmanElement from_evaluator(const Evaluator& F, double s, std::size_t truncation,
                                     const SamplingOptions& opts = {}) {
    return {s, ring_coefficients(F, s, truncation, opts)};
}

/// Disc form of the transported action of g: the function
/// w -> eps (conj(beta) w + conj(alpha))^{-s} F(phi(w)) with phi = C g^{-1} C^{-1}.
/// eps is the unit constant that matches the half-plane formula
/// (pi(g) f)(z) = j(g^{-1}, z)^{-s} f(g^{-1} z) under the Cayley transport.
struct DiscAction {
    DiscMatrix m;
    Complex log_conj_alpha;
    Complex phase;
    double s;

    DiscAction(const GroupElement& g, double weight) : m(disc_matrix(g.inverse())), s(weight) {
        const GroupElement h = g.inverse();
        log_conj_alpha = std::log(std::conj(m.alpha));
        const Point i_pt = Point::half_plane(I);
        const Complex hz = apply_moebius(h, i_pt).value();
        // log((z+i)/2) at z = i is i pi/2
        const Complex log_half_plane = I * (pi / 2.0) - branch_log(h, i_pt).log_value - std::log((hz + I) / 2.0);
        phase = std::exp(s * (log_half_plane + log_conj_alpha));
    }

    Complex factor(Complex w) const {
        const Complex ratio = std::conj(m.beta) * w / std::conj(m.alpha);
        return phase * std::exp(-s * (log_conj_alpha + std::log(1.0 + ratio)));
    }

    Complex operator()(const Evaluator& F, Complex w) const { return factor(w) * F(m.apply(w)); }
};

struct PiActionOptions {
    std::optional<std::size_t> truncation;  // output truncation, default that of the input
    double max_loss = 1e-4;                  // tolerated tail norm beyond the truncation, relative to |f|
    std::optional<SamplingOptions> sampling;
};

struct PiActionResult {
    BergmanElement image;
    double truncation_loss;
};

/// pi_s(g) f by collocation on circles and projection onto e_0..e_N. The tail up to
/// 2N + 32 is computed and reported as truncation loss.
inline PiActionResult pi_action_report(const GroupElement& g, const BergmanElement& f,
                                       const PiActionOptions& opts = {}) {
    const double s = f.weight();
    const std::size_t n_out = opts.truncation.value_or(f.truncation());
    if (g.is_identity()) {
        const BergmanElement img = f.truncated(n_out);
        double tail = 0.0;
        for (std::size_t k = n_out + 1; k < f.coefficients().size(); ++k) tail += std::norm(f.coefficients()[k]);
        const double fn = f.norm();
        return {img, fn > 0 ? std::sqrt(tail) / fn : 0.0};
    }
    const std::size_t n_ext = 2 * n_out + 32;
    const DiscAction act(g, s);
    const Evaluator src = f.evaluator();
    const auto coeffs = ring_coefficients([&](Complex w) { return act(src, w); }, s, n_ext,
                                          opts.sampling.value_or(SamplingOptions{}));
    double tail = 0.0;
    for (std::size_t k = n_out + 1; k <= n_ext; ++k) tail += std::norm(coeffs[k]);
    const double fn = f.norm();
    const double loss = fn > 0 ? std::sqrt(tail) / fn : 0.0;
    if (loss > opts.max_loss) {
        throw Error(ErrorKind::truncation, "pi_action truncation loss " + std::to_string(loss) +
                                               " exceeds the tolerated " + std::to_string(opts.max_loss));
    }
    return {BergmanElement(s, std::vector<Complex>(coeffs.begin(), coeffs.begin() + n_out + 1)), loss};
}

inline BergmanElement pi_action(const GroupElement& g, double s, const BergmanElement& f,
                                const PiActionOptions& opts = {}) {
    require(f.weight() == s, ErrorKind::precondition, "pi_action weight does not match the element");
    return pi_action_report(g, f, opts).image;
}

/// Smallest truncation, by doubling from the input's, at which pi_s(g) f loses at most max_loss.
inline PiActionResult pi_action_adaptive(const GroupElement& g, const BergmanElement& f, double max_loss,
                                         std::size_t cap = 1 << 14) {
    std::size_t n = std::max<std::size_t>(f.truncation(), 8);
    for (;;) {
        PiActionOptions opts;
        opts.truncation = n;
        opts.max_loss = std::numeric_limits<double>::infinity();
        auto r = pi_action_report(g, f, opts);
        if (r.truncation_loss <= max_loss) return r;
        require(n < cap, ErrorKind::truncation, "pi_action could not reach the requested truncation loss");
        n *= 2;
    }
}

/// The transported action applied to an arbitrary evaluator on the disc.
inline Evaluator pi_action_evaluator(const GroupElement& g, double s, Evaluator F) {
    return [act = DiscAction(g, s), F = std::move(F)](Complex w) { return act(F, w); };
}

/// f / (w - w0)^j by synthetic division. Each remainder, a derivative value of f
/// at w0 up to a factorial, must vanish to 1e-8 relative to the absolute series scale.
inline BergmanElement pop_zero(const BergmanElement& f, const Point& w0, std::size_t j) {
    require(w0.model() == Model::disc, ErrorKind::precondition, "pop_zero expects a disc point");
    require(j <= f.truncation(), ErrorKind::precondition, "cannot divide out more zeros than the degree");
    std::vector<Complex> a = f.taylor();
    const Complex z0 = w0.value();
    for (std::size_t step = 0; step < j; ++step) {
        const std::size_t deg = a.size() - 1;
        std::vector<Complex> q(deg);
        Complex carry = 0.0;
        double scale = 0.0;
        double pw = 1.0;
        for (std::size_t k = 0; k <= deg; ++k) {
            scale += std::abs(a[k]) * pw;
            pw *= std::abs(z0);
        }
        for (std::size_t k = deg; k >= 1; --k) {
            carry = a[k] + z0 * carry;
            q[k - 1] = carry;
        }
        const Complex remainder = a[0] + z0 * carry;
        if (std::abs(remainder) > 1e-8 * std::max(scale, std::numeric_limits<double>::min())) {
            throw Error(ErrorKind::precondition,
                        "function does not vanish to order " + std::to_string(j) + " at the given point");
        }
        a = std::move(q);
    }
    return BergmanElement::from_taylor(f.weight(), a);
}

/// Multiplication by (w - w0)^j (exact on coefficients, truncation grows by j).
inline BergmanElement multiply_linear(const BergmanElement& f, const Point& w0, std::size_t j) {
    std::vector<Complex> a = f.taylor();
    for (std::size_t step = 0; step < j; ++step) {
        std::vector<Complex> b(a.size() + 1, 0.0);
        for (std::size_t k = 0; k < a.size(); ++k) {
            b[k + 1] += a[k];
            b[k] -= w0.value() * a[k];
        }
        a = std::move(b);
    }
    return BergmanElement::from_taylor(f.weight(), a);
}

enum class Transport { disc_to_half_plane, half_plane_to_disc };

/// Cayley transport f(w) -> (2/(z+i))^s f(C z) and its inverse.
inline Evaluator cayley_transport(Evaluator f, double s, Transport direction) {
    require(s > 1.0, ErrorKind::precondition, "weight s must exceed 1");
    if (direction == Transport::disc_to_half_plane) {
        return [f = std::move(f), s](Complex z) {
            return std::exp(s * std::log(2.0 / (z + I))) * f((z - I) / (z + I));
        };
    }
    return [f = std::move(f), s](Complex w) {
        const Complex z = I * (1.0 + w) / (1.0 - w);
        return std::exp(-s * std::log(2.0 / (z + I))) * f(z);
    };
}

/// f_n on the half-plane: the transported basis vector e_n.
inline Complex half_plane_basis_eval(std::size_t n, double s, const Point& z) {
    require(z.model() == Model::half_plane, ErrorKind::precondition, "expects a half-plane point");
    const Complex zv = z.value();
    const Complex ratio = (zv - I) / (zv + I);
    return std::exp(log_basis_factor(n, s) + s * std::log(2.0 / (zv + I)) +
                    static_cast<double>(n) * std::log(ratio));
}

/// Squared norm of a half-plane function against y^{s-2} dx dy, by double-exponential quadrature.
inline double half_plane_norm_sq(const Evaluator& f, double s, double tol = 1e-11) {
    using boost::math::quadrature::exp_sinh;
    using boost::math::quadrature::sinh_sinh;
    sinh_sinh<double> inner_rule;
    exp_sinh<double> outer_rule;
    auto row = [&](double y) {
        if (y <= 0.0 || !std::isfinite(y)) return 0.0;
        const double v = inner_rule.integrate([&](double x) { return std::norm(f(Complex(x, y))); }, tol);
        return v * std::pow(y, s - 2.0);
    };
    return outer_rule.integrate(row, tol);
}

}  // namespace orbit_bergman
