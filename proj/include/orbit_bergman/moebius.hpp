#pragma once

// Möbius geometry of the upper half-plane and the unit disc, the Cayley
// transform, and the branched automorphy factor (cz+d)^s.

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "common.hpp"

namespace orbit_bergman {

/// Generator tokens for the two presets. S is an involution in PSL(2,Z).
enum class Generator : std::uint8_t { S, T, T_inv, A, A_inv, B, B_inv };

inline const char* to_string(Generator g) {
    switch (g) {
        case Generator::S: return "S";
        case Generator::T: return "T";
        case Generator::T_inv: return "T^-1";
        case Generator::A: return "A";
        case Generator::A_inv: return "A^-1";
        case Generator::B: return "B";
        case Generator::B_inv: return "B^-1";
    }
    return "?";
}

inline Generator inverse(Generator g) {
    switch (g) {
        case Generator::S: return Generator::S;
        case Generator::T: return Generator::T_inv;
        case Generator::T_inv: return Generator::T;
        case Generator::A: return Generator::A_inv;
        case Generator::A_inv: return Generator::A;
        case Generator::B: return Generator::B_inv;
        case Generator::B_inv: return Generator::B;
    }
    return g;
}

using Word = std::vector<Generator>;

inline std::string to_string(const Word& word) {
    if (word.empty()) return "id";
    std::string out;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (i) out += ' ';
        out += to_string(word[i]);
    }
    return out;
}

namespace detail {

inline std::int64_t checked(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw Error(ErrorKind::overflow, "matrix entry overflow");
    return static_cast<std::int64_t>(v);
}

}  // namespace detail

/// An element of PSL(2,Z): an integer matrix of determinant one, stored in the
/// canonical sign c > 0 or (c = 0 and d > 0). `word` lists generator tokens whose
/// left-to-right product is the matrix (empty when unknown or for the identity).
class GroupElement {
  public:
    GroupElement() = default;

    GroupElement(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d, Word word = {})
        : a_(a), b_(b), c_(c), d_(d), word_(std::move(word)) {
        require(static_cast<__int128>(a) * d - static_cast<__int128>(b) * c == 1,
                ErrorKind::precondition, "group element must have determinant 1");
        if (c_ < 0 || (c_ == 0 && d_ < 0)) {
            a_ = -a_;
            b_ = -b_;
            c_ = -c_;
            d_ = -d_;
        }
    }

    static GroupElement identity() { return {}; }

    static GroupElement generator(Generator g) {
        switch (g) {
            case Generator::S: return {0, -1, 1, 0, {g}};
            case Generator::T: return {1, 1, 0, 1, {g}};
            case Generator::T_inv: return {1, -1, 0, 1, {g}};
            case Generator::A: return {1, 2, 0, 1, {g}};
            case Generator::A_inv: return {1, -2, 0, 1, {g}};
            case Generator::B: return {1, 0, 2, 1, {g}};
            case Generator::B_inv: return {1, 0, -2, 1, {g}};
        }
        return {};
    }

    static GroupElement from_word(const Word& word) {
        GroupElement g;
        for (Generator x : word) g = g * generator(x);
        return g;
    }

    std::int64_t a() const { return a_; }
    std::int64_t b() const { return b_; }
    std::int64_t c() const { return c_; }
    std::int64_t d() const { return d_; }
    const Word& word() const { return word_; }

    std::int64_t sup_norm() const {
        return std::max({std::abs(a_), std::abs(b_), std::abs(c_), std::abs(d_)});
    }

    /// a^2 + b^2 + c^2 + d^2 = 2 cosh d(i, g i).
    double frobenius_sq() const {
        return static_cast<double>(a_) * a_ + static_cast<double>(b_) * b_ +
               static_cast<double>(c_) * c_ + static_cast<double>(d_) * d_;
    }

    bool is_identity() const { return a_ == 1 && b_ == 0 && c_ == 0 && d_ == 1; }

    GroupElement inverse() const {
        Word w;
        w.reserve(word_.size());
        for (auto it = word_.rbegin(); it != word_.rend(); ++it) w.push_back(orbit_bergman::inverse(*it));
        return {d_, -b_, -c_, a_, std::move(w)};
    }

    friend GroupElement operator*(const GroupElement& g, const GroupElement& h) {
        using detail::checked;
        using i128 = __int128;
        Word w = g.word_;
        w.insert(w.end(), h.word_.begin(), h.word_.end());
        return {checked(i128(g.a_) * h.a_ + i128(g.b_) * h.c_), checked(i128(g.a_) * h.b_ + i128(g.b_) * h.d_),
                checked(i128(g.c_) * h.a_ + i128(g.d_) * h.c_), checked(i128(g.c_) * h.b_ + i128(g.d_) * h.d_),
                std::move(w)};
    }

    /// Matrix equality in PSL(2,Z); words are ignored.
    friend bool operator==(const GroupElement& g, const GroupElement& h) {
        return g.a_ == h.a_ && g.b_ == h.b_ && g.c_ == h.c_ && g.d_ == h.d_;
    }

    std::array<std::int64_t, 4> entries() const { return {a_, b_, c_, d_}; }

    friend std::ostream& operator<<(std::ostream& os, const GroupElement& g) {
        return os << "(" << g.a_ << "," << g.b_ << ";" << g.c_ << "," << g.d_ << ")";
    }

  private:
    std::int64_t a_ = 1, b_ = 0, c_ = 0, d_ = 1;
    Word word_;
};

struct GroupElementHash {
    std::size_t operator()(const GroupElement& g) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (std::int64_t v : g.entries()) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

enum class Model { half_plane, disc };

inline const char* to_string(Model m) { return m == Model::half_plane ? "half-plane" : "disc"; }

/// Points within this distance of the boundary are rejected.
inline constexpr double boundary_tolerance = 1e-14;

/// A point of the upper half-plane or of the open unit disc.
class Point {
  public:
    static Point half_plane(Complex z) {
        require(std::isfinite(z.real()) && std::isfinite(z.imag()), ErrorKind::boundary, "non-finite point");
        require(z.imag() >= boundary_tolerance, ErrorKind::boundary, "point is not in the open upper half-plane");
        return Point(z, Model::half_plane);
    }
    static Point disc(Complex w) {
        require(std::isfinite(w.real()) && std::isfinite(w.imag()), ErrorKind::boundary, "non-finite point");
        require(std::abs(w) <= 1.0 - boundary_tolerance, ErrorKind::boundary, "point is not in the open unit disc");
        return Point(w, Model::disc);
    }

    Complex value() const { return value_; }
    Model model() const { return model_; }

  private:
    Point(Complex v, Model m) : value_(v), model_(m) {}
    Complex value_;
    Model model_;
};

/// Cayley transform C(z) = (z - i)/(z + i).
inline Point to_disc(const Point& z) {
    require(z.model() == Model::half_plane, ErrorKind::precondition, "to_disc expects a half-plane point");
    return Point::disc((z.value() - I) / (z.value() + I));
}

/// Inverse Cayley transform C^{-1}(w) = i(1 + w)/(1 - w).
inline Point to_half_plane(const Point& w) {
    require(w.model() == Model::disc, ErrorKind::precondition, "to_half_plane expects a disc point");
    return Point::half_plane(I * (1.0 + w.value()) / (1.0 - w.value()));
}

inline Point apply_moebius(const GroupElement& g, const Point& p) {
    if (p.model() == Model::disc) return to_disc(apply_moebius(g, to_half_plane(p)));
    const Complex z = p.value();
    const double a = static_cast<double>(g.a()), b = static_cast<double>(g.b());
    const double c = static_cast<double>(g.c()), d = static_cast<double>(g.d());
    return Point::half_plane((a * z + b) / (c * z + d));
}

/// Im(g z) = Im(z) / |cz + d|^2.
inline double imag_factor(const GroupElement& g, const Point& z) {
    require(z.model() == Model::half_plane, ErrorKind::precondition, "imag_factor expects a half-plane point");
    const Complex j = static_cast<double>(g.c()) * z.value() + static_cast<double>(g.d());
    return z.value().imag() / std::norm(j);
}

struct BranchValue {
    GroupElement element;
    Point point;
    Complex log_value;
};

/// Holomorphic logarithm of j(g,z) = cz + d. With the canonical sign, c > 0 puts
/// cz + d in the open upper half-plane and c = 0 forces d = 1, so the principal
/// logarithm is continuous in z.
inline BranchValue branch_log(const GroupElement& g, const Point& z) {
    require(z.model() == Model::half_plane, ErrorKind::precondition, "branch_log expects a half-plane point");
    const Complex j = static_cast<double>(g.c()) * z.value() + static_cast<double>(g.d());
    const Complex lv = g.c() == 0 ? Complex(std::log(static_cast<double>(g.d())), 0.0) : std::log(j);
    return {g, z, lv};
}

/// (cz + d)^s on the branch of branch_log.
inline Complex automorphy(const GroupElement& g, const Point& z, double s) {
    return std::exp(s * branch_log(g, z).log_value);
}

/// j(gh,z)^s / (j(g,hz)^s j(h,z)^s): a unit-modulus constant, identically 1 for even s.
inline Complex cocycle_defect(const GroupElement& g, const GroupElement& h, const Point& z, double s) {
    const Complex num = s * branch_log(g * h, z).log_value;
    const Complex den = s * (branch_log(g, apply_moebius(h, z)).log_value + branch_log(h, z).log_value);
    return std::exp(num - den);
}

/// Disc-model form of g: C g C^{-1}(w) = (alpha w + beta)/(conj(beta) w + conj(alpha)),
/// with |alpha|^2 - |beta|^2 = 1.
struct DiscMatrix {
    Complex alpha;
    Complex beta;

    Complex apply(Complex w) const { return (alpha * w + beta) / (std::conj(beta) * w + std::conj(alpha)); }
};

inline DiscMatrix disc_matrix(const GroupElement& g) {
    const double a = static_cast<double>(g.a()), b = static_cast<double>(g.b());
    const double c = static_cast<double>(g.c()), d = static_cast<double>(g.d());
    return {Complex(a + d, b - c) / 2.0, Complex(a - d, -(b + c)) / 2.0};
}

/// Pseudo-hyperbolic distance |(p - q)/(1 - conj(q) p)| between disc values.
inline double pseudo_distance(Complex p, Complex q) { return std::abs((p - q) / (1.0 - std::conj(q) * p)); }

/// Hyperbolic distance (curvature -1), computed in the model of the first point.
inline double hyperbolic_distance(const Point& p, const Point& q) {
    if (p.model() == Model::disc) {
        const Complex w = q.model() == Model::disc ? q.value() : to_disc(q).value();
        return 2.0 * std::atanh(pseudo_distance(p.value(), w));
    }
    const Complex z = p.value();
    const Complex w = q.model() == Model::half_plane ? q.value() : to_half_plane(q).value();
    return std::acosh(1.0 + std::norm(z - w) / (2.0 * z.imag() * w.imag()));
}

}  // namespace orbit_bergman
