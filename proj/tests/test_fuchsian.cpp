#include <gtest/gtest.h>

#include <orbit_bergman/fuchsian.hpp>

#include "test_oracles.hpp"

using namespace orbit_bergman;

namespace {

FreeWord random_free_word(std::mt19937_64& gen, int max_len) {
    std::uniform_int_distribution<int> len(0, max_len), pick(0, 3);
    const Generator gens[] = {Generator::A, Generator::A_inv, Generator::B, Generator::B_inv};
    FreeWord w;
    const int n = len(gen);
    while (static_cast<int>(w.size()) < n) w.push_back(gens[pick(gen)]);
    return w;
}

std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t> key(const GroupElement& g) {
    return {g.a(), g.b(), g.c(), g.d()};
}

}  // namespace

TEST(Preset, Covolumes) {
    const auto p = psl2z(), q = gamma2();
    EXPECT_EQ(q.covolume_over_pi.num * p.covolume_over_pi.den, 6 * p.covolume_over_pi.num * q.covolume_over_pi.den);
    EXPECT_NEAR(p.covolume(), oracle::pi / 3, 1e-15);
    EXPECT_EQ(p.elliptic.size(), 2u);
    EXPECT_TRUE(q.elliptic.empty());
    EXPECT_THROW(preset_from_string("SL3"), Error);
}

TEST(Enumerate, WordLengthOne) {
    const auto elems = enumerate_group(psl2z(), 1, 100);
    ASSERT_EQ(elems.size(), 4u);
    std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>> got;
    for (const auto& g : elems) got.insert(key(g));
    const std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>> want{
        {1, 0, 0, 1}, {0, -1, 1, 0}, {1, 1, 0, 1}, {1, -1, 0, 1}};
    EXPECT_EQ(got, want);
}

TEST(Enumerate, WordLengthZero) {
    const auto elems = enumerate_group(psl2z(), 0, 100);
    ASSERT_EQ(elems.size(), 1u);
    EXPECT_TRUE(elems[0].is_identity());
}

TEST(Enumerate, CompleteForEntryBound) {
    for (std::int64_t n : {1, 2, 3, 5, 7}) {
        const auto elems = enumerate_group(psl2z(), -1, n);
        std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>> got;
        for (const auto& g : elems) got.insert(key(g));
        EXPECT_EQ(got.size(), elems.size()) << "duplicates at n=" << n;
        EXPECT_EQ(got, oracle::psl2z_ball(n)) << "n=" << n;
    }
}

TEST(Enumerate, Gamma2CongruenceAndCompleteness) {
    const auto elems = enumerate_group(gamma2(), -1, 9);
    std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>> got;
    for (const auto& g : elems) {
        EXPECT_TRUE((g.a() & 1) && (g.d() & 1) && !(g.b() & 1) && !(g.c() & 1));
        EXPECT_EQ(GroupElement::from_word(g.word()), g);
        got.insert(key(g));
    }
    std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>> want;
    for (const auto& [a, b, c, d] : oracle::psl2z_ball(9))
        if ((a & 1) && (d & 1) && !(b & 1) && !(c & 1)) want.insert({a, b, c, d});
    EXPECT_EQ(got, want);
}

TEST(Enumerate, InverseClosedAndWordsConsistent) {
    const auto elems = enumerate_group(psl2z(), -1, 12);
    std::unordered_set<GroupElement, GroupElementHash> set(elems.begin(), elems.end());
    for (const auto& g : elems) {
        EXPECT_TRUE(set.count(g.inverse()));
        EXPECT_EQ(GroupElement::from_word(g.word()), g);
    }
}

TEST(Enumerate, CanonicalOrderAndDeterminism) {
    const auto a = enumerate_group(gamma2(), 6, 50);
    const auto b = enumerate_group(gamma2(), 6, 50);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i], b[i]);
        EXPECT_EQ(a[i].word(), b[i].word());
        if (i) {
            EXPECT_FALSE(canonical_less(a[i], a[i - 1]));
        }
    }
}

TEST(Enumerate, BudgetCapRefusesPartialResults) {
    try {
        enumerate_group(psl2z(), -1, 200, 1000);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::budget);
    }
}

TEST(Enumerate, IndexTrend) {
    // Gamma(2) has index 6: the ratio of ball counts drifts toward 6.
    double prev_gap = 1e9;
    for (std::int64_t n : {20, 80, 320}) {
        const double all = static_cast<double>(enumerate_group(psl2z(), -1, n).size());
        const double sub = static_cast<double>(enumerate_group(gamma2(), -1, n).size());
        const double gap = std::abs(all / sub - 6.0);
        EXPECT_LT(gap, 1.5);
        prev_gap = std::min(prev_gap, gap);
    }
    EXPECT_LT(prev_gap, 0.5);
}

TEST(Reduce, Examples) {
    const auto r0 = reduce_to_fundamental_domain(Point::half_plane(I));
    EXPECT_NEAR(std::abs(r0.point.value() - I), 0.0, 1e-15);
    EXPECT_TRUE(r0.element.is_identity());

    const auto r1 = reduce_to_fundamental_domain(Point::half_plane({0.3, 0.4}));
    EXPECT_NEAR(std::abs(r1.point.value() - Complex(-0.2, 1.6)), 0.0, 1e-12);
    EXPECT_EQ(r1.element.word(), (Word{Generator::T, Generator::S}));  // S first, then T: T*S

    const auto r2 = reduce_to_fundamental_domain(Point::half_plane({5.0, 2.0}));
    EXPECT_NEAR(std::abs(r2.point.value() - 2.0 * I), 0.0, 1e-12);
    EXPECT_EQ(r2.element, GroupElement(1, -5, 0, 1));
    EXPECT_EQ(r2.element.word(), Word(5, Generator::T_inv));
}

TEST(Reduce, LandsInDomain) {
    auto gen = oracle::rng(20);
    std::uniform_real_distribution<double> x(-30, 30), ly(-6, 1);
    for (int trial = 0; trial < 2000; ++trial) {
        const Point z = Point::half_plane({x(gen), std::pow(10.0, ly(gen))});
        const auto r = reduce_to_fundamental_domain(z);
        const Complex w = r.point.value();
        EXPECT_LE(std::abs(w.real()), 0.5 + 1e-12);
        EXPECT_GE(std::abs(w), 1.0 - 1e-12);
        const Complex gz = apply_moebius(r.element, z).value();
        // forward error of either evaluation scales like 1/Im z near the real axis
        EXPECT_LE(std::abs(gz - w), 1e-13 * std::max(1.0, std::abs(w)) / z.value().imag());
        EXPECT_EQ(GroupElement::from_word(r.element.word()), r.element);
    }
}

TEST(Stabilizer, Examples) {
    const auto p = psl2z();
    EXPECT_EQ(stabilizer_order(p, Point::half_plane(I)), 2);
    EXPECT_EQ(stabilizer_order(p, Point::half_plane(std::exp(I * (oracle::pi / 3)))), 3);
    EXPECT_EQ(stabilizer_order(p, Point::half_plane(std::exp(I * (2 * oracle::pi / 3)))), 3);
    EXPECT_EQ(stabilizer_order(p, Point::half_plane(2.0 * I)), 1);
    // equivalent points found through reduction
    EXPECT_EQ(stabilizer_order(p, apply_moebius(GroupElement(2, 1, 1, 1), Point::half_plane(I))), 2);
    EXPECT_EQ(stabilizer_order(gamma2(), Point::half_plane(I)), 1);
}

TEST(OrbitSample, TrivialBudget) {
    const auto o = orbit_sample(psl2z(), Point::half_plane(2.0 * I), Budget{0, 10});
    ASSERT_EQ(o.entries.size(), 1u);
    EXPECT_TRUE(o.entries[0].element.is_identity());
}

TEST(OrbitSample, CountsMatchStabilizer) {
    const Budget b{-1, 15};
    const auto generic = orbit_sample(psl2z(), Point::half_plane(2.0 * I), b);
    EXPECT_EQ(generic.stabilizer_order, 1);
    EXPECT_EQ(generic.entries.size(), generic.enumerated);
    const auto at_i = orbit_sample(psl2z(), Point::half_plane(I), b);
    EXPECT_EQ(at_i.stabilizer_order, 2);
    EXPECT_EQ(at_i.max_multiplicity, 2u);
    EXPECT_EQ(at_i.entries.size() * 2, at_i.enumerated);
    const auto at_rho = orbit_sample(psl2z(), Point::half_plane(std::exp(I * (oracle::pi / 3))), b);
    EXPECT_EQ(at_rho.stabilizer_order, 3);
    EXPECT_EQ(at_rho.max_multiplicity, 3u);
    // The ball is not a union of stabilizer cosets near its edge, so only bound the count.
    EXPECT_LE(at_rho.entries.size() * 3, at_rho.enumerated + 3 * at_rho.entries.size());
    EXPECT_GE(at_rho.entries.size() * 3, at_rho.enumerated);
}

TEST(OrbitSample, ImagesDistinct) {
    const auto o = orbit_sample(psl2z(), Point::half_plane({0.1, 1.7}), Budget{-1, 8});
    for (std::size_t i = 0; i < o.entries.size(); ++i)
        for (std::size_t j = i + 1; j < o.entries.size(); ++j)
            EXPECT_GT(std::abs(o.entries[i].image.value() - o.entries[j].image.value()), 1e-10);
}

TEST(FreeWordTest, ReducesAndParses) {
    const auto w = FreeWord::parse("A B b A^-1 B");
    EXPECT_EQ(w.letters(), (Word{Generator::B}));
    EXPECT_THROW(FreeWord::parse("A C"), Error);
    EXPECT_THROW(FreeWord(Word{Generator::S}), Error);
}

TEST(Gamma2Decompose, Examples) {
    EXPECT_EQ(gamma2_decompose(GroupElement(1, 2, 0, 1)).letters(), (Word{Generator::A}));
    const auto t = GroupElement::generator(Generator::T);
    EXPECT_EQ(gamma2_decompose(t * t).letters(), (Word{Generator::A}));
    const auto aba = FreeWord::parse("A B A^-1");
    EXPECT_EQ(gamma2_decompose(aba.to_element()), aba);
    EXPECT_TRUE(gamma2_decompose(GroupElement()).empty());
    EXPECT_THROW(gamma2_decompose(t), Error);
}

TEST(Gamma2Decompose, RoundTrip) {
    auto gen = oracle::rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
        const FreeWord w = random_free_word(gen, 12);
        const GroupElement g = w.to_element();
        const FreeWord back = gamma2_decompose(GroupElement(g.a(), g.b(), g.c(), g.d()));
        ASSERT_EQ(back, w) << w.str() << " vs " << back.str();
    }
}

TEST(Magnus, LetterImages) {
    const auto a = MagnusSeries::image(FreeWord::parse("A"), 4);
    EXPECT_EQ(a.coefficient({0, 0}), 1);
    EXPECT_EQ(a.coefficient({1, 0}), 1);
    const auto ainv = MagnusSeries::image(FreeWord::parse("A^-1"), 4);
    for (std::uint8_t k = 0; k <= 4; ++k) EXPECT_EQ(ainv.coefficient({k, 0}), (k % 2 ? -1 : 1));
    // (1+X)(1+Y) = 1 + X + Y + XY; XY has bits 01
    const auto ab = MagnusSeries::image(FreeWord::parse("A B"), 3);
    EXPECT_EQ(ab.coefficient({2, 0b01}), 1);
    EXPECT_EQ(ab.coefficient({2, 0b10}), 0);
}

TEST(Magnus, HomomorphismOnRandomWords) {
    auto gen = oracle::rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        const FreeWord u = random_free_word(gen, 6), v = random_free_word(gen, 6);
        const auto mu = MagnusSeries::image(u, 8), mv = MagnusSeries::image(v, 8), muv = MagnusSeries::image(u * v, 8);
        // product of truncated series, computed by brute force
        std::map<MagnusSeries::Monomial, std::int64_t> prod;
        for (const auto& [m1, c1] : mu.coefficients())
            for (const auto& [m2, c2] : mv.coefficients()) {
                if (m1.length + m2.length > 8) continue;
                MagnusSeries::Monomial m{static_cast<std::uint8_t>(m1.length + m2.length), (m1.bits << m2.length) | m2.bits};
                prod[m] += c1 * c2;
            }
        std::erase_if(prod, [](const auto& kv) { return kv.second == 0; });
        EXPECT_EQ(prod, muv.coefficients());
    }
}

TEST(Magnus, Examples) {
    EXPECT_TRUE(magnus_less(FreeWord(), FreeWord::parse("A")));
    EXPECT_TRUE(magnus_less(FreeWord::parse("A^-1"), FreeWord()));
    EXPECT_FALSE(magnus_less(FreeWord::parse("A"), FreeWord::parse("A")));
}

TEST(Magnus, TotalIrreflexiveTransitive) {
    auto gen = oracle::rng(23);
    std::vector<FreeWord> words;
    for (int i = 0; i < 60; ++i) words.push_back(random_free_word(gen, 7));
    for (const auto& u : words) {
        EXPECT_FALSE(magnus_less(u, u));
        for (const auto& v : words) {
            if (u == v) continue;
            EXPECT_NE(magnus_less(u, v), magnus_less(v, u));
            for (const auto& w : {words[0], words[1], words[2]}) {
                if (magnus_less(u, v) && magnus_less(v, w)) {
                    EXPECT_TRUE(magnus_less(u, w));
                }
            }
        }
    }
}

TEST(Magnus, LeftInvariant) {
    auto gen = oracle::rng(24);
    for (int trial = 0; trial < 1000; ++trial) {
        const FreeWord u = random_free_word(gen, 6), v = random_free_word(gen, 6), w = random_free_word(gen, 6);
        if (u == v) continue;
        ASSERT_EQ(magnus_less(u, v), magnus_less(w * u, w * v)) << u.str() << " | " << v.str() << " | " << w.str();
    }
}

TEST(Magnus, EscalatesDegreeForDeepDifferences) {
    // A^k B A^-k B^-1 differs from the identity first in degree 2 (XY - YX), but
    // commutators of commutators push the first difference deeper.
    const FreeWord c1 = FreeWord::parse("A B A^-1 B^-1");
    const FreeWord c2 = c1 * FreeWord::parse("A") * c1.inverse_word() * FreeWord::parse("A^-1");
    const FreeWord c3 = c2 * FreeWord::parse("B") * c2.inverse_word() * FreeWord::parse("B^-1");
    const FreeWord c4 = c3 * c1 * c3.inverse_word() * c1.inverse_word();
    ASSERT_GT(c4.size(), 8u);
    EXPECT_NE(magnus_less(c4, FreeWord()), magnus_less(FreeWord(), c4));
}
