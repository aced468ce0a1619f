#pragma once

// Exact q-expansions for PSL(2,Z): E4, E6, Delta and their products, with
// tail-bounded double evaluation; log eta with a Dedekind-sum transformation;
// j; the vanishing functions (j - w) Delta eta^r; Petersson products; and the
// dimensions of M_k and S_k from exact ranks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "fuchsian.hpp"
#include "quadrature.hpp"

namespace orbit_bergman {

using BigInt = boost::multiprecision::cpp_int;

/// Truncated q-expansion sum_{n <= N} a_n q^n with exact integer coefficients and a
/// declared envelope |a_n| <= C n^p (n >= 1), used for rigorous tail bounds.
class QSeries {
  public:
    QSeries(int weight, std::vector<BigInt> coeffs, double env_c, double env_p)
        : weight_(weight), coeffs_(std::move(coeffs)), env_c_(env_c), env_p_(env_p) {
        require(!coeffs_.empty(), ErrorKind::precondition, "empty q-series");
        approx_.reserve(coeffs_.size());
        for (const auto& c : coeffs_) approx_.push_back(static_cast<double>(c));
    }

    int weight() const { return weight_; }
    std::size_t truncation() const { return coeffs_.size() - 1; }
    const std::vector<BigInt>& coefficients() const { return coeffs_; }
    const BigInt& operator[](std::size_t n) const { return coeffs_.at(n); }
    const std::vector<double>& approx() const { return approx_; }
    bool is_cusp() const { return coeffs_[0] == 0; }
    double envelope_c() const { return env_c_; }
    double envelope_p() const { return env_p_; }

    QSeries truncated(std::size_t n) const {
        std::vector<BigInt> c(coeffs_.begin(), coeffs_.begin() + std::min(n, truncation()) + 1);
        return {weight_, std::move(c), env_c_, env_p_};
    }

    friend QSeries operator+(const QSeries& f, const QSeries& g) {
        require(f.weight_ == g.weight_, ErrorKind::precondition, "adding q-series of different weights");
        const std::size_t n = std::min(f.truncation(), g.truncation());
        std::vector<BigInt> c(n + 1);
        for (std::size_t k = 0; k <= n; ++k) c[k] = f.coeffs_[k] + g.coeffs_[k];
        return {f.weight_, std::move(c), f.env_c_ + g.env_c_, std::max(f.env_p_, g.env_p_)};
    }

    friend QSeries operator-(const QSeries& f, const QSeries& g) { return f + g.scaled(-1); }

    friend QSeries operator*(const QSeries& f, const QSeries& g) {
        const std::size_t n = std::min(f.truncation(), g.truncation());
        std::vector<BigInt> c(n + 1, 0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (f.coeffs_[i] == 0) continue;
            for (std::size_t j = 0; i + j <= n; ++j) c[i + j] += f.coeffs_[i] * g.coeffs_[j];
        }
        // a_n = sum_{i+j=n} a_i b_j with |a_0|, |b_0| folded into the envelope constants
        const double cf = std::max(f.env_c_, std::abs(f.approx_[0]));
        const double cg = std::max(g.env_c_, std::abs(g.approx_[0]));
        return {f.weight_ + g.weight_, std::move(c), cf * cg * 2.0, f.env_p_ + g.env_p_ + 1.0};
    }

    QSeries scaled(const BigInt& k) const {
        auto c = coeffs_;
        for (auto& x : c) x *= k;
        return {weight_, std::move(c), env_c_ * std::abs(static_cast<double>(k)), env_p_};
    }

    /// Exact division; every coefficient must be divisible.
    QSeries divided_exact(const BigInt& d) const {
        require(d != 0, ErrorKind::precondition, "division by zero");
        auto c = coeffs_;
        for (auto& x : c) {
            require(x % d == 0, ErrorKind::precondition, "q-series coefficient not divisible");
            x /= d;
        }
        return {weight_, std::move(c), env_c_ / std::abs(static_cast<double>(d)), env_p_};
    }

    QSeries power(int e) const {
        require(e >= 0, ErrorKind::precondition, "negative power");
        std::vector<BigInt> one(coeffs_.size(), 0);
        one[0] = 1;
        QSeries acc(0, std::move(one), 0.0, 0.0);
        for (int i = 0; i < e; ++i) acc = acc * *this;
        return acc;
    }

    friend bool operator==(const QSeries& f, const QSeries& g) {
        return f.weight_ == g.weight_ && f.coeffs_ == g.coeffs_;
    }

  private:
    int weight_;
    std::vector<BigInt> coeffs_;
    std::vector<double> approx_;
    double env_c_;
    double env_p_;
};

namespace detail {

inline BigInt divisor_power_sum(std::size_t n, int k) {
    BigInt acc = 0;
    for (std::size_t d = 1; d * d <= n; ++d) {
        if (n % d) continue;
        acc += boost::multiprecision::pow(BigInt(d), k);
        const std::size_t e = n / d;
        if (e != d) acc += boost::multiprecision::pow(BigInt(e), k);
    }
    return acc;
}

}  // namespace detail

/// Normalised Eisenstein series E4 = 1 + 240 sum sigma_3(n) q^n and E6 = 1 - 504 sum sigma_5(n) q^n.
inline QSeries eisenstein_q(int k, std::size_t n) {
    require(k == 4 || k == 6, ErrorKind::precondition, "eisenstein_q supports k = 4 and k = 6");
    const BigInt scale = k == 4 ? BigInt(240) : BigInt(-504);
    std::vector<BigInt> c(n + 1);
    c[0] = 1;
    for (std::size_t m = 1; m <= n; ++m) c[m] = scale * detail::divisor_power_sum(m, k - 1);
    // sigma_{k-1}(n) <= zeta(k-1) n^{k-1}
    const double env = k == 4 ? 240.0 * 1.2020569031595942 : 504.0 * 1.0369277551433699;
    return {k, std::move(c), env, static_cast<double>(k - 1)};
}

/// Delta = q prod (1 - q^n)^24 by the product formula. Envelope |tau(n)| <= d(n) n^{11/2} <= 2 n^6.
inline QSeries delta_q(std::size_t n) {
    require(n >= 1, ErrorKind::precondition, "delta_q needs N >= 1");
    std::vector<BigInt> p(n, 0);
    p[0] = 1;
    // multiply by (1 - q^m)^24 for m = 1..n-1, truncated at degree n-1
    for (std::size_t m = 1; m < n; ++m) {
        for (int rep = 0; rep < 24; ++rep)
            for (std::size_t j = n - 1; j >= m; --j) p[j] -= p[j - m];
    }
    std::vector<BigInt> c(n + 1, 0);
    for (std::size_t j = 1; j <= n; ++j) c[j] = p[j - 1];
    return {12, std::move(c), 2.0, 6.0};
}

/// Alternative names G2, G3 for the Eisenstein series, indexed by half the weight.
inline std::optional<std::string> canonical_form_name(const std::string& alias) {
    if (alias == "G2" || alias == "E4") return "E4";
    if (alias == "G3" || alias == "E6") return "E6";
    if (alias == "Delta" || alias == "delta" || alias == "D") return "Delta";
    return std::nullopt;
}

struct SeriesValue {
    Complex value;
    double tail_bound;  // bound on |sum_{n > N} a_n q^n|
};

/// Geometric tail bound for sum_{n > N} C n^p |q|^n, or infinity when the ratio test fails at N.
inline double envelope_tail(double c, double p, std::size_t n, double aq) {
    const double nn = static_cast<double>(n);
    const double ratio = std::pow((nn + 2.0) / (nn + 1.0), p) * aq;
    if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
    return c * std::exp(p * std::log(nn + 1.0) + (nn + 1.0) * std::log(aq)) / (1.0 - ratio);
}

inline SeriesValue qseries_eval(const QSeries& f, Complex z, double tol = 1e-12) {
    require(z.imag() > 0.0, ErrorKind::boundary, "q-series evaluation needs Im z > 0");
    const Complex q = std::exp(2.0 * pi * I * z);
    const double aq = std::abs(q);
    const auto& a = f.approx();
    Complex acc = 0.0;
    for (std::size_t n = a.size(); n-- > 0;) acc = acc * q + a[n];
    const double tail = envelope_tail(f.envelope_c(), f.envelope_p(), f.truncation(), aq);
    if (!(tail <= tol)) {
        throw Error(ErrorKind::truncation, "q-series tail bound " + std::to_string(tail) + " exceeds " +
                                               std::to_string(tol) + " at Im z = " + std::to_string(z.imag()));
    }
    return {acc, tail};
}

/// Dedekind sum s(h, k) for k > 0 by the reciprocity law.
inline double dedekind_sum(std::int64_t h, std::int64_t k) {
    require(k > 0, ErrorKind::precondition, "dedekind_sum needs k > 0");
    double sign = 1.0, acc = 0.0;
    h %= k;
    if (h < 0) h += k;
    while (k > 1 && h != 0) {
        // s(h,k) = -s(k,h) + (h/k + k/h + 1/(hk))/12 - 1/4
        const double hd = static_cast<double>(h), kd = static_cast<double>(k);
        acc += sign * ((hd / kd + kd / hd + 1.0 / (hd * kd)) / 12.0 - 0.25);
        sign = -sign;
        const std::int64_t r = k % h;
        k = h;
        h = r;
    }
    return acc;
}

namespace detail {

/// Principal log eta by direct summation, for Im z bounded away from 0.
inline Complex log_eta_direct(Complex z) {
    const Complex q = std::exp(2.0 * pi * I * z);
    const double aq = std::abs(q);
    Complex acc = I * (pi / 12.0) * z;
    Complex qn = q;
    double aqn = aq;
    for (int n = 1; n < 1000000; ++n) {
        acc += std::log(1.0 - qn);
        qn *= q;
        aqn *= aq;
        if (aqn / ((1.0 - aq) * (1.0 - aqn)) < 1e-17 * std::max(1.0, std::abs(acc))) return acc;
    }
    throw Error(ErrorKind::convergence, "log eta series did not converge");
}

}  // namespace detail

/// log eta(z) = pi i z / 12 + sum log(1 - q^n), the principal holomorphic branch. Points with
/// small Im z are moved to the fundamental domain first and mapped back with
/// log eta(Vz) = log eta(z) + 1/2 log((cz+d)/i) + pi i (a+d)/(12c) - pi i s(d,c), c > 0.
inline Complex log_eta(Complex z) {
    require(z.imag() > 0.0, ErrorKind::boundary, "log_eta needs Im z > 0");
    if (z.imag() >= 0.5) return detail::log_eta_direct(z);
    const auto red = reduce_to_fundamental_domain(Point::half_plane(z));
    const GroupElement& v = red.element;
    const Complex z0 = red.point.value();
    const Complex base = detail::log_eta_direct(z0);
    if (v.c() == 0) return base - I * (pi / 12.0) * static_cast<double>(v.b());  // z0 = z + b
    const double a = static_cast<double>(v.a()), c = static_cast<double>(v.c()), d = static_cast<double>(v.d());
    const Complex cz_d = c * z + d;
    return base - 0.5 * std::log(cz_d / I) - I * (pi * (a + d) / (12.0 * c)) + I * (pi * dedekind_sum(v.d(), v.c()));
}

inline Complex eta_pow(Complex z, double r) {
    if (r == 0.0) return 1.0;
    return std::exp(r * log_eta(z));
}

/// Default expansions used for evaluation; 80 terms give tails far below 1e-12 on Im z >= 0.3.
struct FormTable {
    QSeries e4, e6, delta;
    static const FormTable& get() {
        static const FormTable table{eisenstein_q(4, 200), eisenstein_q(6, 200), delta_q(200)};
        return table;
    }
};

/// j = E4^3 / Delta, evaluated at the reduced point.
inline Complex j_eval(Complex z) {
    require(z.imag() > 0.0, ErrorKind::boundary, "j needs Im z > 0");
    const Complex z0 = z.imag() >= 0.3 ? z : reduce_to_fundamental_domain(Point::half_plane(z)).point.value();
    if (z0.imag() > 50.0) throw Error(ErrorKind::overflow, "Delta underflows relative to E4^3 for Im z > 50");
    const auto& t = FormTable::get();
    const Complex e4 = qseries_eval(t.e4, z0).value;
    const Complex d = qseries_eval(t.delta, z0).value;
    return e4 * e4 * e4 / d;
}

struct GrowthCertificate {
    double sup;            // max of |f| Im^exponent on the grid
    Complex argmax;
    double exponent;
    double y_max;
    std::size_t nx, ny;
};

/// (j - w) Delta eta^r = (E4^3 - w Delta) eta^r, holomorphic on the half-plane with zeros
/// exactly on the orbit {j = w}.
class VanishingFunction {
  public:
    VanishingFunction(Complex w, double r) : w_(w), r_(r) {
        require(r > 0.0, ErrorKind::precondition, "eta exponent r must be positive");
    }

    Complex target() const { return w_; }
    double exponent_r() const { return r_; }
    double growth_exponent() const { return 6.0 + r_ / 4.0; }

    /// Weight-12 part E4^3 - w Delta; moved to the fundamental domain when Im z is small.
    Complex weight12(Complex z) const {
        const auto& t = FormTable::get();
        if (z.imag() >= 0.3) return cube_minus(t, z);
        const auto red = reduce_to_fundamental_domain(Point::half_plane(z));
        const GroupElement& g = red.element;
        const Complex j = static_cast<double>(g.c()) * z + static_cast<double>(g.d());
        // F(gz) = (cz+d)^12 F(z)
        return cube_minus(t, red.point.value()) / std::pow(j, 12);
    }

    Complex operator()(Complex z) const { return weight12(z) * eta_pow(z, r_); }

    Evaluator evaluator() const {
        return [self = *this](Complex z) { return self(z); };
    }

    /// sup of |f(z)| Im(z)^exponent over x in [-1/2, 1/2], y log-spaced from the arc |z| = 1 to y_max.
    GrowthCertificate certificate(std::size_t nx, std::size_t ny, double y_max,
                                  std::optional<double> exponent = std::nullopt, double y_min = 0.0) const {
        require(nx >= 2 && ny >= 2, ErrorKind::precondition, "growth grid needs at least 2x2 points");
        const double ex = exponent.value_or(growth_exponent());
        std::vector<std::pair<double, Complex>> best(nx, {-1.0, 0.0});
        parallel_for(nx, [&](std::size_t i) {
            const double x = -0.5 + static_cast<double>(i) / static_cast<double>(nx - 1);
            const double y0 = std::max(std::sqrt(1.0 - x * x), y_min);
            if (y0 >= y_max) return;
            const double ly0 = std::log(y0), ly1 = std::log(y_max);
            for (std::size_t k = 0; k < ny; ++k) {
                const double y = std::exp(ly0 + (ly1 - ly0) * static_cast<double>(k) / static_cast<double>(ny - 1));
                const Complex z(x, y);
                const double v = std::abs((*this)(z)) * std::pow(y, ex);
                if (v > best[i].first) best[i] = {v, z};
            }
        });
        GrowthCertificate out{-1.0, 0.0, ex, y_max, nx, ny};
        for (const auto& [v, z] : best)
            if (v > out.sup) {
                out.sup = v;
                out.argmax = z;
            }
        require(std::isfinite(out.sup) && out.sup >= 0.0, ErrorKind::convergence, "growth certificate not finite");
        return out;
    }

  private:
    Complex cube_minus(const FormTable& t, Complex z) const {
        const Complex e4 = qseries_eval(t.e4, z).value;
        return e4 * e4 * e4 - w_ * qseries_eval(t.delta, z).value;
    }

    Complex w_;
    double r_;
};

inline VanishingFunction rw_function(Complex w, double r) { return {w, r}; }

/// The point z0 = i y, y >= 1, with j(z0) = w, for real w > 1728 (j is real and increasing there).
inline Complex j_preimage(double w) {
    require(w > 1728.0, ErrorKind::precondition, "j_preimage supports real w > 1728");
    auto f = [w](double y) { return j_eval(Complex(0.0, y)).real() - w; };
    double hi = std::max(2.0, std::log(w) / (2.0 * pi) + 1.0);
    while (f(hi) < 0.0) hi *= 1.5;
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, 1.0, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return Complex(0.0, 0.5 * (a + b));
}

struct PeterssonResult {
    Complex value;
    double tail_bound;
    double refinement_delta;
    double cutoff;  // Im z above which the analytic tail bound is used
};

namespace detail {

/// sum |a_n| e^{-2 pi (n-1) Y} plus the envelope tail: bounds |f(z)| e^{2 pi y} for y >= Y.
inline double cusp_majorant(const QSeries& f, double y) {
    double acc = 0.0;
    const auto& a = f.approx();
    for (std::size_t n = 1; n < a.size(); ++n) acc += std::abs(a[n]) * std::exp(-2.0 * pi * static_cast<double>(n - 1) * y);
    const double aq = std::exp(-2.0 * pi * y);
    return acc + envelope_tail(f.envelope_c(), f.envelope_p(), f.truncation(), aq) / aq;
}

inline Complex petersson_box(const QSeries& f, const QSeries& g, double y_top, int depth, double tol) {
    using boost::math::quadrature::gauss_kronrod;
    const int k = f.weight();
    auto column = [&](double x) {
        const double y0 = std::sqrt(1.0 - x * x);
        auto integrand_re = [&](double y) {
            const Complex z(x, y);
            const Complex v = std::conj(qseries_eval(f, z).value) * qseries_eval(g, z).value * std::pow(y, k - 2);
            return v;
        };
        double err = 0.0;
        const auto re = gauss_kronrod<double, 31>::integrate([&](double y) { return integrand_re(y).real(); }, y0,
                                                             y_top, depth, tol, &err);
        const auto im = gauss_kronrod<double, 31>::integrate([&](double y) { return integrand_re(y).imag(); }, y0,
                                                             y_top, depth, tol, &err);
        return Complex(re, im);
    };
    double err = 0.0;
    const double re = gauss_kronrod<double, 31>::integrate([&](double x) { return column(x).real(); }, -0.5, 0.5,
                                                           depth, tol, &err);
    const double im = gauss_kronrod<double, 31>::integrate([&](double x) { return column(x).imag(); }, -0.5, 0.5,
                                                           depth, tol, &err);
    return {re, im};
}

}  // namespace detail

/// Petersson product int_F conj(f) g Im(z)^k dx dy / y^2 over the standard domain. The region
/// above Im z = Y is replaced by an analytic bound, with Y raised until that bound is below
/// 1e-10 of the computed value. The result is the refined value.
inline PeterssonResult petersson(const QSeries& f, const QSeries& g, const QuadratureSpec& spec = {}) {
    require(f.weight() == g.weight(), ErrorKind::precondition, "Petersson product needs equal weights");
    require(f.is_cusp() && g.is_cusp(), ErrorKind::precondition, "Petersson product needs cusp forms");
    spec.validate();
    const int k = f.weight();
    auto tail = [&](double y) {
        const double rate = 4.0 * pi - (k - 2) / y;
        if (rate <= 0) return std::numeric_limits<double>::infinity();
        return detail::cusp_majorant(f, y) * detail::cusp_majorant(g, y) * std::pow(y, k - 2) *
               std::exp(-4.0 * pi * y) / rate;
    };
    double y_top = 2.0;
    Complex value;
    for (;;) {
        value = detail::petersson_box(f, g, y_top, spec.subdivision_depth, 1e-12);
        if (tail(y_top) <= 1e-10 * std::abs(value)) break;
        y_top += 0.5;
        require(y_top < 60.0, ErrorKind::quadrature, "Petersson cusp tail did not fall below tolerance");
    }
    const Complex refined = detail::petersson_box(f, g, y_top, spec.subdivision_depth + 4, 1e-14);
    return {refined, tail(y_top), std::abs(refined - value), y_top};
}

struct CuspSupReport {
    double sup;
    Complex argmax;
    double invariance_residual;  // max change of |F| Im^{k/2} at S- and T-translates, relative to sup
};

/// sup over a fundamental-domain grid of |F(z)| Im(z)^{k/2}, with a cross-check at translates.
inline CuspSupReport cusp_sup_invariant(const QSeries& f, std::size_t nx, std::size_t ny, double y_max = 6.0) {
    require(f.is_cusp(), ErrorKind::precondition, "cusp_sup_invariant needs a cusp form");
    require(nx >= 2 && ny >= 2, ErrorKind::precondition, "grid needs at least 2x2 points");
    const double half_k = 0.5 * f.weight();
    auto value = [&](Complex z) { return std::abs(qseries_eval(f, z).value) * std::pow(z.imag(), half_k); };
    const GroupElement S = GroupElement::generator(Generator::S), T = GroupElement::generator(Generator::T);
    CuspSupReport out{-1.0, 0.0, 0.0};
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = -0.5 + static_cast<double>(i) / static_cast<double>(nx - 1);
        const double y0 = std::sqrt(1.0 - x * x);
        for (std::size_t k = 0; k < ny; ++k) {
            const double y = y0 + (y_max - y0) * static_cast<double>(k) / static_cast<double>(ny - 1);
            const Complex z(x, y);
            const double v = value(z);
            if (v > out.sup) {
                out.sup = v;
                out.argmax = z;
            }
            for (const auto& g : {S, T, S * T}) {
                const double vg = value(apply_moebius(g, Point::half_plane(z)).value());
                out.invariance_residual = std::max(out.invariance_residual, std::abs(vg - v));
            }
        }
    }
    out.invariance_residual /= out.sup;
    return out;
}

struct SpaceDims {
    int weight;
    std::size_t dim_modular;
    std::size_t dim_cusp;
    std::vector<QSeries> modular_basis;  // the monomials E4^a E6^b
    std::vector<QSeries> cusp_basis;     // primitive integer combinations with a_0 = 0, echelon form
};

namespace detail {

/// Row echelon form over the rationals by fraction-free elimination; rows are kept primitive.
inline std::vector<std::vector<BigInt>> integer_echelon(std::vector<std::vector<BigInt>> rows) {
    std::vector<std::vector<BigInt>> out;
    if (rows.empty()) return out;
    const std::size_t cols = rows[0].size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
        std::size_t piv = r;
        while (piv < rows.size() && rows[piv][c] == 0) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[r], rows[piv]);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == r || rows[i][c] == 0) continue;
            const BigInt a = rows[r][c], b = rows[i][c];
            for (std::size_t j = 0; j < cols; ++j) rows[i][j] = rows[i][j] * a - rows[r][j] * b;
        }
        ++r;
    }
    rows.resize(r);
    for (auto& row : rows) {
        BigInt g = 0;
        for (const auto& x : row) g = boost::multiprecision::gcd(g, x);
        if (g > 1)
            for (auto& x : row) x /= g;
        const auto lead = std::find_if(row.begin(), row.end(), [](const BigInt& x) { return x != 0; });
        if (lead != row.end() && *lead < 0)
            for (auto& x : row) x = -x;
    }
    return rows;
}

}  // namespace detail

/// dim M_k and dim S_k from the monomials E4^a E6^b (4a + 6b = k) expanded to order N.
inline SpaceDims space_dims(int k, std::size_t n) {
    require(k >= 0 && k % 2 == 0, ErrorKind::precondition, "weight must be even and nonnegative");
    std::vector<std::pair<int, int>> monomials;
    for (int a = 0; 4 * a <= k; ++a)
        if ((k - 4 * a) % 6 == 0) monomials.push_back({a, (k - 4 * a) / 6});
    require(n + 1 >= monomials.size(), ErrorKind::precondition, "truncation too small for the monomial count");
    const QSeries e4 = eisenstein_q(4, n), e6 = eisenstein_q(6, n);
    SpaceDims out{k, 0, 0, {}, {}};
    std::vector<std::vector<BigInt>> rows;
    for (const auto& [a, b] : monomials) {
        QSeries m = e4.power(a) * e6.power(b);
        rows.push_back(m.coefficients());
        out.modular_basis.push_back(std::move(m));
    }
    const auto echelon = detail::integer_echelon(rows);
    out.dim_modular = echelon.size();
    if (out.dim_modular < monomials.size() && n < 2 * monomials.size()) {
        throw Error(ErrorKind::precondition, "truncation too small for an unambiguous rank");
    }
    // The cusp subspace is the kernel of a_0 on the span: echelon rows with a_0 = 0.
    for (const auto& row : echelon) {
        if (row[0] != 0) continue;
        out.cusp_basis.emplace_back(k, row, 0.0, 0.0);
    }
    out.dim_cusp = out.cusp_basis.size();
    // envelopes for the cusp basis: inherit a safe bound from the monomials
    double env_c = 0.0, env_p = 0.0;
    for (const auto& m : out.modular_basis) {
        env_c = std::max(env_c, m.envelope_c());
        env_p = std::max(env_p, m.envelope_p());
    }
    for (auto& f : out.cusp_basis) {
        double scale = 0.0;
        for (const auto& x : f.coefficients()) scale = std::max(scale, std::abs(static_cast<double>(x)));
        f = QSeries(k, f.coefficients(), env_c * std::max(1.0, scale) * static_cast<double>(monomials.size()), env_p);
    }
    return out;
}

}  // namespace orbit_bergman
