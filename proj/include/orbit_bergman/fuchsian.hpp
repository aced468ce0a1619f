#pragma once

// PSL(2,Z) and its free index-6 subgroup Gamma(2): enumeration, reduction to the
// standard fundamental domain, stabilisers, orbit sampling, free-word
// decomposition in Gamma(2), and the left order induced by the Magnus embedding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "moebius.hpp"

namespace orbit_bergman {

/// Exact rational number p/q, q > 0. Only what the presets need.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct EllipticPoint {
    Complex point;  // half-plane representative
    int order;
};

enum class PresetName { PSL2Z, Gamma2 };

struct GroupPreset {
    PresetName name;
    std::vector<Generator> generators;  // a symmetric generating set is built from these
    Rational covolume_over_pi;          // hyperbolic area of H/Gamma divided by pi
    std::vector<EllipticPoint> elliptic;

    double covolume() const { return pi * covolume_over_pi.value(); }
    std::string label() const { return name == PresetName::PSL2Z ? "PSL2Z" : "Gamma2"; }

    /// Generators and their inverses, in the BFS expansion order.
    std::vector<Generator> symmetric_generators() const {
        if (name == PresetName::PSL2Z) return {Generator::S, Generator::T, Generator::T_inv};
        return {Generator::A, Generator::A_inv, Generator::B, Generator::B_inv};
    }

    bool contains(const GroupElement& g) const {
        if (name == PresetName::PSL2Z) return true;
        // -I is congruent to I mod 2, so the sign representative does not matter.
        return (g.a() & 1) && (g.d() & 1) && !(g.b() & 1) && !(g.c() & 1);
    }
};

inline GroupPreset psl2z() {
    return {PresetName::PSL2Z,
            {Generator::S, Generator::T},
            {1, 3},
            {{I, 2}, {std::exp(I * (pi / 3.0)), 3}}};
}

inline GroupPreset gamma2() { return {PresetName::Gamma2, {Generator::A, Generator::B}, {2, 1}, {}}; }

inline GroupPreset preset_from_string(const std::string& s) {
    if (s == "PSL2Z" || s == "pslz" || s == "psl2z") return psl2z();
    if (s == "Gamma2" || s == "gamma2") return gamma2();
    throw Error(ErrorKind::precondition, "unknown preset '" + s + "'");
}

/// Enumeration budget. A negative max_word_len means no word-length limit, in
/// which case the result is every element with sup-norm at most max_entry.
struct Budget {
    int max_word_len = -1;
    std::int64_t max_entry = 0;
    std::size_t max_elements = 20'000'000;
};

/// Canonical output order: sup-norm, then word length, then the word lexicographically.
inline bool canonical_less(const GroupElement& g, const GroupElement& h) {
    if (g.sup_norm() != h.sup_norm()) return g.sup_norm() < h.sup_norm();
    if (g.word().size() != h.word().size()) return g.word().size() < h.word().size();
    return std::lexicographical_compare(g.word().begin(), g.word().end(), h.word().begin(), h.word().end());
}

/// Breadth-first enumeration over the symmetric generating set. Elements whose
/// entries exceed max_entry are not expanded; words are shortest words.
inline std::vector<GroupElement> enumerate_group(const GroupPreset& preset, int max_word_len, std::int64_t max_entry,
                                                 std::size_t max_elements = 20'000'000) {
    require(max_entry >= 0, ErrorKind::precondition, "max_entry must be nonnegative");
    std::vector<GroupElement> out;
    std::unordered_set<GroupElement, GroupElementHash> seen;
    std::deque<GroupElement> frontier;
    const GroupElement id = GroupElement::identity();
    if (max_entry < 1) return out;
    seen.insert(id);
    frontier.push_back(id);
    const auto gens = preset.symmetric_generators();
    std::vector<GroupElement> gen_elems;
    for (auto x : gens) gen_elems.push_back(GroupElement::generator(x));

    while (!frontier.empty()) {
        GroupElement g = std::move(frontier.front());
        frontier.pop_front();
        const bool expand = max_word_len < 0 || static_cast<int>(g.word().size()) < max_word_len;
        if (expand) {
            for (const auto& x : gen_elems) {
                GroupElement h = g * x;
                if (h.sup_norm() > max_entry) continue;
                if (seen.insert(h).second) {
                    if (seen.size() > max_elements) {
                        throw Error(ErrorKind::budget, "enumeration exceeded the element cap of " +
                                                           std::to_string(max_elements));
                    }
                    frontier.push_back(h);
                }
            }
        }
        out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

inline std::vector<GroupElement> enumerate_group(const GroupPreset& preset, const Budget& budget) {
    return enumerate_group(preset, budget.max_word_len, budget.max_entry, budget.max_elements);
}

struct Reduction {
    Point point;
    GroupElement element;  // element(z) = point
};

/// Standard reduction into |Re z| <= 1/2, |z| >= 1 using S and T.
inline Reduction reduce_to_fundamental_domain(const Point& z) {
    require(z.model() == Model::half_plane, ErrorKind::precondition, "reduction expects a half-plane point");
    Complex w = z.value();
    GroupElement g;
    const GroupElement S = GroupElement::generator(Generator::S);
    for (int iter = 0; iter < 10000; ++iter) {
        const double shift = std::floor(w.real() + 0.5);
        if (shift != 0.0) {
            const auto n = static_cast<std::int64_t>(shift);
            Word word(static_cast<std::size_t>(std::llabs(n)), n > 0 ? Generator::T_inv : Generator::T);
            g = GroupElement(1, -n, 0, 1, std::move(word)) * g;
            w -= shift;
        }
        if (std::norm(w) < 1.0 - 1e-15) {
            g = S * g;
            w = -1.0 / w;
            continue;
        }
        return {Point::half_plane(w), g};
    }
    throw Error(ErrorKind::convergence, "fundamental-domain reduction did not terminate");
}

/// Order of the stabiliser of z in the preset group.
inline int stabilizer_order(const GroupPreset& preset, const Point& z) {
    if (preset.name == PresetName::Gamma2) return 1;
    const Point hz = z.model() == Model::half_plane ? z : to_half_plane(z);
    const Complex w = reduce_to_fundamental_domain(hz).point.value();
    constexpr double tol = 1e-9;
    if (std::abs(w - I) < tol) return 2;
    const Complex rho = std::exp(I * (pi / 3.0));
    if (std::abs(w - rho) < tol || std::abs(w - Complex(-rho.real(), rho.imag())) < tol) return 3;
    return 1;
}

struct OrbitEntry {
    GroupElement element;
    Point image;
    double jacobian_sq;  // |cz + d|^2 at the base point (half-plane coordinates)
};

struct OrbitSample {
    Point base;
    std::vector<OrbitEntry> entries;
    Budget budget;
    int stabilizer_order = 1;
    std::size_t enumerated = 0;      // group elements before deduplication
    std::size_t max_multiplicity = 1;  // largest number of elements found per image
};

/// Images of z under the enumerated group, deduplicated to 1e-10.
inline OrbitSample orbit_sample(const GroupPreset& preset, const Point& z, const Budget& budget) {
    OrbitSample out{z, {}, budget, stabilizer_order(preset, z), 0, 1};
    const auto elems = enumerate_group(preset, budget);
    out.enumerated = elems.size();
    const Point hz = z.model() == Model::half_plane ? z : to_half_plane(z);

    constexpr double cell = 1e-9;
    constexpr double tol = 1e-10;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
    std::vector<std::size_t> multiplicity;
    auto key = [](std::int64_t i, std::int64_t j) {
        return (static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ull) ^ static_cast<std::uint64_t>(j);
    };
    for (const auto& g : elems) {
        const Point img = apply_moebius(g, z);
        const Complex v = img.value();
        const auto ci = static_cast<std::int64_t>(std::floor(v.real() / cell));
        const auto cj = static_cast<std::int64_t>(std::floor(v.imag() / cell));
        std::optional<std::size_t> dup;
        for (std::int64_t di = -1; di <= 1 && !dup; ++di) {
            for (std::int64_t dj = -1; dj <= 1 && !dup; ++dj) {
                auto it = grid.find(key(ci + di, cj + dj));
                if (it == grid.end()) continue;
                for (std::size_t idx : it->second) {
                    if (std::abs(out.entries[idx].image.value() - v) < tol * std::max(1.0, std::abs(v))) {
                        dup = idx;
                        break;
                    }
                }
            }
        }
        if (dup) {
            ++multiplicity[*dup];
            continue;
        }
        grid[key(ci, cj)].push_back(out.entries.size());
        const Complex j = static_cast<double>(g.c()) * hz.value() + static_cast<double>(g.d());
        out.entries.push_back({g, img, std::norm(j)});
        multiplicity.push_back(1);
    }
    for (auto m : multiplicity) out.max_multiplicity = std::max(out.max_multiplicity, m);
    require(out.max_multiplicity <= static_cast<std::size_t>(out.stabilizer_order), ErrorKind::convergence,
            "orbit deduplication found more coincident images than the stabiliser order");
    return out;
}

// ---------------------------------------------------------------------------
// Gamma(2) as the free group on A = (1,2;0,1), B = (1,0;2,1).

/// Reduced word over {A, A^-1, B, B^-1}.
class FreeWord {
  public:
    FreeWord() = default;
    explicit FreeWord(Word letters) {
        for (Generator x : letters) push_back(x);
    }

    void push_back(Generator x) {
        require(x == Generator::A || x == Generator::A_inv || x == Generator::B || x == Generator::B_inv,
                ErrorKind::precondition, "free words use only A, B and their inverses");
        if (!letters_.empty() && letters_.back() == inverse(x)) {
            letters_.pop_back();
        } else {
            letters_.push_back(x);
        }
    }

    const Word& letters() const { return letters_; }
    std::size_t size() const { return letters_.size(); }
    bool empty() const { return letters_.empty(); }

    FreeWord inverse_word() const {
        FreeWord w;
        for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) w.push_back(orbit_bergman::inverse(*it));
        return w;
    }

    friend FreeWord operator*(const FreeWord& u, const FreeWord& v) {
        FreeWord w = u;
        for (Generator x : v.letters_) w.push_back(x);
        return w;
    }

    friend bool operator==(const FreeWord& u, const FreeWord& v) { return u.letters_ == v.letters_; }

    GroupElement to_element() const { return GroupElement::from_word(letters_); }

    std::string str() const { return to_string(letters_); }

    /// Parses tokens "A", "A^-1", "a" (= A^-1), "B", "B^-1", "b", separated by spaces.
    static FreeWord parse(const std::string& text) {
        FreeWord w;
        std::size_t i = 0;
        while (i < text.size()) {
            if (text[i] == ' ') {
                ++i;
                continue;
            }
            const char ch = text[i++];
            bool inv = false;
            if (i + 2 < text.size() + 1 && text.compare(i, 3, "^-1") == 0) {
                inv = true;
                i += 3;
            }
            switch (ch) {
                case 'A': w.push_back(inv ? Generator::A_inv : Generator::A); break;
                case 'a': w.push_back(Generator::A_inv); break;
                case 'B': w.push_back(inv ? Generator::B_inv : Generator::B); break;
                case 'b': w.push_back(Generator::B_inv); break;
                default: throw Error(ErrorKind::precondition, std::string("bad free-word token '") + ch + "'");
            }
        }
        return w;
    }

  private:
    Word letters_;
};

/// Reduced word in A, B for an element of Gamma(2), by greedy descent of the
/// Frobenius norm (ping-pong: some generator strictly shortens every nontrivial element).
inline FreeWord gamma2_decompose(const GroupElement& g) {
    require(gamma2().contains(g), ErrorKind::precondition, "element is not in Gamma(2)");
    static const std::array<Generator, 4> letters{Generator::A, Generator::A_inv, Generator::B, Generator::B_inv};
    FreeWord word;
    GroupElement cur(g.a(), g.b(), g.c(), g.d());
    while (!cur.is_identity()) {
        const double norm = cur.frobenius_sq();
        std::optional<GroupElement> best;
        Generator best_letter = Generator::A;
        for (Generator x : letters) {
            GroupElement h = GroupElement::generator(x) * cur;
            if (h.frobenius_sq() < norm && (!best || h.frobenius_sq() < best->frobenius_sq())) {
                best = GroupElement(h.a(), h.b(), h.c(), h.d());
                best_letter = x;
            }
        }
        require(best.has_value(), ErrorKind::convergence, "Gamma(2) decomposition stalled");
        // cur = x^-1 * best
        word.push_back(inverse(best_letter));
        cur = *best;
    }
    return word;
}

/// Truncated noncommutative power series in X, Y with integer coefficients.
/// Monomials are keyed by (length, bits) with X = 0, Y = 1 and the first
/// letter in the most significant bit, so integer order within a degree is
/// lexicographic order with X < Y.
class MagnusSeries {
  public:
    struct Monomial {
        std::uint8_t length = 0;
        std::uint64_t bits = 0;

        friend bool operator<(const Monomial& m, const Monomial& n) {
            return m.length != n.length ? m.length < n.length : m.bits < n.bits;
        }
        friend bool operator==(const Monomial& m, const Monomial& n) = default;
    };

    explicit MagnusSeries(int degree) : degree_(degree) {
        require(degree >= 0 && degree <= 63, ErrorKind::precondition, "Magnus degree out of range");
        coeffs_[{0, 0}] = 1;
    }

    int degree() const { return degree_; }
    const std::map<Monomial, std::int64_t>& coefficients() const { return coeffs_; }

    std::int64_t coefficient(const Monomial& m) const {
        auto it = coeffs_.find(m);
        return it == coeffs_.end() ? 0 : it->second;
    }

    /// Right multiplication by the image of one letter:
    /// A -> 1 + X, A^-1 -> sum (-X)^j, likewise B with Y.
    void multiply_letter(Generator x) {
        const bool is_y = x == Generator::B || x == Generator::B_inv;
        const bool inv = x == Generator::A_inv || x == Generator::B_inv;
        std::map<Monomial, std::int64_t> next;
        for (const auto& [m, c] : coeffs_) {
            const int max_j = inv ? degree_ - m.length : std::min(1, degree_ - m.length);
            Monomial cur = m;
            for (int j = 0; j <= max_j; ++j) {
                const std::int64_t factor = inv && (j & 1) ? -1 : 1;
                std::int64_t term = 0;
                if (__builtin_mul_overflow(c, factor, &term)) throw Error(ErrorKind::overflow, "Magnus coefficient overflow");
                auto& slot = next[cur];
                if (__builtin_add_overflow(slot, term, &slot)) throw Error(ErrorKind::overflow, "Magnus coefficient overflow");
                cur.bits = (cur.bits << 1) | (is_y ? 1u : 0u);
                ++cur.length;
            }
        }
        std::erase_if(next, [](const auto& kv) { return kv.second == 0; });
        coeffs_ = std::move(next);
    }

    static MagnusSeries image(const FreeWord& w, int degree) {
        MagnusSeries m(degree);
        for (Generator x : w.letters()) m.multiply_letter(x);
        return m;
    }

    /// -1, 0, +1 comparing coefficient sequences in degree-then-lexicographic order.
    friend int compare(const MagnusSeries& p, const MagnusSeries& q) {
        auto i = p.coeffs_.begin();
        auto j = q.coeffs_.begin();
        while (i != p.coeffs_.end() || j != q.coeffs_.end()) {
            Monomial m;
            if (j == q.coeffs_.end() || (i != p.coeffs_.end() && i->first < j->first)) {
                m = i->first;
            } else {
                m = j->first;
            }
            const std::int64_t cp = (i != p.coeffs_.end() && i->first == m) ? i->second : 0;
            const std::int64_t cq = (j != q.coeffs_.end() && j->first == m) ? j->second : 0;
            if (cp != cq) return cp < cq ? -1 : 1;
            if (i != p.coeffs_.end() && i->first == m) ++i;
            if (j != q.coeffs_.end() && j->first == m) ++j;
        }
        return 0;
    }

  private:
    int degree_;
    std::map<Monomial, std::int64_t> coeffs_;
};

inline constexpr int magnus_initial_degree = 8;
inline constexpr int magnus_max_degree = 32;

/// Strict left-invariant total order on Gamma(2) via the Magnus embedding.
/// Truncation starts at degree 8 and doubles on ties up to 32. A tie at degree D means
/// u^-1 v lies deep in the lower central series, which needs words far longer than D.
inline bool magnus_less(const FreeWord& u, const FreeWord& v) {
    if (u == v) return false;
    for (int degree = magnus_initial_degree; degree <= magnus_max_degree; degree *= 2) {
        const int c = compare(MagnusSeries::image(u, degree), MagnusSeries::image(v, degree));
        if (c != 0) return c < 0;
    }
    throw Error(ErrorKind::convergence, "Magnus comparison unresolved at maximal degree for distinct words " +
                                            u.str() + " and " + v.str());
}

/// Sign of the Magnus order against the identity: -1 if g < id, 0 if g = id, +1 if g > id.
inline int magnus_sign(const FreeWord& g) {
    if (g.empty()) return 0;
    return magnus_less(g, FreeWord()) ? -1 : 1;
}

}  // namespace orbit_bergman
