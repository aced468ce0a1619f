#include <gtest/gtest.h>

#include <orbit_bergman/modular.hpp>

#include "test_oracles.hpp"

using namespace orbit_bergman;

namespace {

// Direct sum of a q-series with double coefficients, no tail logic.
oracle::cd direct_eval(const std::vector<oracle::big>& c, oracle::cd z) {
    const oracle::cd q = std::exp(2.0 * oracle::pi * oracle::cd(0, 1) * z);
    oracle::cd acc = 0.0, qn = 1.0;
    for (const auto& a : c) {
        acc += static_cast<double>(a) * qn;
        qn *= q;
    }
    return acc;
}

// pi i z / 12 + sum log(1 - q^n) summed until the terms are negligible.
oracle::cd log_eta_oracle(oracle::cd z) {
    const oracle::cd q = std::exp(2.0 * oracle::pi * oracle::cd(0, 1) * z);
    oracle::cd acc = oracle::cd(0, 1) * oracle::pi * z / 12.0, qn = q;
    for (int n = 1; n < 200000 && std::abs(qn) > 1e-20; ++n) {
        acc += std::log(1.0 - qn);
        qn *= q;
    }
    return acc;
}

std::vector<Complex> grid(double y_min) {
    std::vector<Complex> out;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j) out.emplace_back(-0.6 + 0.3 * i, y_min + 0.35 * j);
    return out;
}

Complex modular_image(const GroupElement& g, Complex z) { return apply_moebius(g, Point::half_plane(z)).value(); }

}  // namespace

TEST(QSeries, EisensteinCoefficients) {
    const auto e4 = eisenstein_q(4, 40), e6 = eisenstein_q(6, 40);
    EXPECT_EQ(e4[0], 1);
    EXPECT_EQ(e6[0], 1);
    EXPECT_EQ(e4[1], 240);
    EXPECT_EQ(e4[2], 2160);
    EXPECT_EQ(e6[1], -504);
    EXPECT_EQ(e6[2], -16632);
    for (int n = 1; n <= 40; ++n) {
        EXPECT_EQ(e4[n], 240 * oracle::sigma(n, 3));
        EXPECT_EQ(e6[n], -504 * oracle::sigma(n, 5));
    }
}

TEST(QSeries, DeltaProductAndIdentity) {
    const auto d = delta_q(50);
    const auto ref = oracle::delta_product(50);
    EXPECT_EQ(d[0], 0);
    EXPECT_EQ(d[1], 1);
    EXPECT_EQ(d[2], -24);
    EXPECT_EQ(d[3], 252);
    for (int n = 0; n <= 50; ++n) EXPECT_EQ(d[n], ref[n]) << n;

    const auto e4 = eisenstein_q(4, 50), e6 = eisenstein_q(6, 50);
    const auto diff = (e4.power(3) - e6.power(2)).divided_exact(1728);
    EXPECT_EQ(diff.weight(), 12);
    EXPECT_EQ(diff.coefficients(), d.coefficients());
    // Ramanujan's tau(n) for a couple more values
    EXPECT_EQ(d[4], -1472);
    EXPECT_EQ(d[5], 4830);
    EXPECT_EQ(d[12], -370944);
}

TEST(QSeries, ArithmeticRules) {
    const auto e4 = eisenstein_q(4, 30), e6 = eisenstein_q(6, 20), d = delta_q(25);
    const auto p = e4 * e6;
    EXPECT_EQ(p.weight(), 10);
    EXPECT_EQ(p.truncation(), 20u);
    EXPECT_THROW(e4 + e6, Error);
    const auto dx = d * e4;
    EXPECT_TRUE(dx.is_cusp());
    EXPECT_TRUE((d * e6 * e4).is_cusp());
    EXPECT_FALSE(e4.is_cusp());
    EXPECT_THROW(e4.divided_exact(7), Error);
    EXPECT_EQ((e4 + e4.truncated(10)).truncation(), 10u);
}

TEST(QSeries, EvalMatchesDirectSumAndTail) {
    const auto e4 = eisenstein_q(4, 200), e6 = eisenstein_q(6, 200), d = delta_q(200);
    for (const auto z : grid(0.3)) {
        for (const auto* f : {&e4, &e6, &d}) {
            const auto r = qseries_eval(*f, z);
            EXPECT_LT(r.tail_bound, 1e-12);
            const auto want = direct_eval(f->coefficients(), z);
            EXPECT_LT(std::abs(r.value - want), 1e-12 * std::max(1.0, std::abs(want)));
        }
    }
    EXPECT_THROW(qseries_eval(eisenstein_q(4, 5), Complex(0.1, 0.05)), Error);
    EXPECT_THROW(qseries_eval(e4, Complex(0.1, 0.0)), Error);
    // products also certify their tails at Im 0.3 with 200 terms
    EXPECT_LT(qseries_eval(e4.power(3), Complex(0.2, 0.3)).tail_bound, 1e-12);
}

TEST(QSeries, SpecialValues) {
    const auto e4 = eisenstein_q(4, 200), e6 = eisenstein_q(6, 200), d = delta_q(200);
    const Complex rho = std::exp(I * (pi / 3.0));
    EXPECT_LT(std::abs(qseries_eval(e4, rho).value), 1e-6);
    EXPECT_LT(std::abs(qseries_eval(e6, I).value), 1e-10);
    const Complex di = qseries_eval(d, I).value;
    EXPECT_GT(di.real(), 0.0);
    EXPECT_LT(std::abs(di.imag()), 1e-10);
    EXPECT_NEAR(di.real(), 0.0017853698506421, 1e-15);  // regression
}

TEST(QSeries, Modularity) {
    const auto e4 = eisenstein_q(4, 200), e6 = eisenstein_q(6, 200), d = delta_q(200);
    const auto e43 = e4.power(3);
    const GroupElement S = GroupElement::generator(Generator::S), T = GroupElement::generator(Generator::T);
    for (const auto z : grid(0.5)) {
        for (const auto& g : {S, T}) {
            const Complex gz = modular_image(g, z);
            const Complex j = static_cast<double>(g.c()) * z + static_cast<double>(g.d());
            for (const auto* f : {&e4, &e6, &d, &e43}) {
                const Complex lhs = qseries_eval(*f, gz).value * std::pow(j, -f->weight());
                const Complex rhs = qseries_eval(*f, z).value;
                EXPECT_LT(std::abs(lhs - rhs), 1e-8 * std::max(1.0, std::abs(rhs))) << f->weight() << " " << z;
            }
        }
    }
}

TEST(Eta, DeltaIsTwentyFourthPower) {
    const auto d = delta_q(200);
    for (const auto z : grid(0.5)) {
        const Complex v = std::exp(24.0 * log_eta(z));
        const Complex want = qseries_eval(d, z).value;
        EXPECT_LT(std::abs(v - want), 1e-9 * std::max(1e-3, std::abs(want))) << z;
    }
    EXPECT_EQ(eta_pow(Complex(0.3, 0.7), 0.0), Complex(1.0));
}

TEST(Eta, TransformedBranchMatchesDirectSum) {
    auto gen = oracle::rng(7);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), uy(0.004, 0.49);
    for (int i = 0; i < 60; ++i) {
        const Complex z(ux(gen), uy(gen));
        const Complex got = log_eta(z), want = log_eta_oracle(z);
        EXPECT_LT(std::abs(got - want), 1e-9 * std::max(1.0, std::abs(want))) << z;
    }
}

TEST(Eta, DecaysUpTheCusp) {
    double prev = std::abs(eta_pow(Complex(0.2, 1.0), 0.1));
    for (double y = 2.0; y < 200.0; y *= 2.0) {
        const double v = std::abs(eta_pow(Complex(0.2, y), 0.1));
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_NEAR(std::log(std::abs(eta_pow(Complex(0.0, 100.0), 1.0))), -pi * 100.0 / 12.0, 1e-9);
}

TEST(J, SpecialValuesAndInvariance) {
    EXPECT_NEAR(j_eval(I).real() / 1728.0, 1.0, 1e-4);
    EXPECT_LT(std::abs(j_eval(std::exp(I * (pi / 3.0)))), 1e-4);
    const GroupElement S = GroupElement::generator(Generator::S), T = GroupElement::generator(Generator::T);
    for (const auto z : grid(0.6)) {
        const Complex jz = j_eval(z);
        for (const auto& g : {S, T, S * T}) {
            const Complex jg = j_eval(modular_image(g, z));
            EXPECT_LT(std::abs(jg - jz), 1e-6 * std::max(1.0, std::abs(jz)));
        }
    }
    EXPECT_THROW(j_eval(Complex(0.0, 60.0)), Error);
}

TEST(VanishingFunctionTest, ZerosOnTheOrbit) {
    const double w = 2000.0;
    const Complex z0 = j_preimage(w);
    EXPECT_NEAR(z0.imag(), 1.106825424585602, 1e-9);  // regression
    EXPECT_NEAR(j_eval(z0).real(), w, 1e-8 * w);
    const auto f = rw_function(w, 0.1);
    EXPECT_LT(std::abs(f(z0)), 1e-6);
    const GroupElement S = GroupElement::generator(Generator::S), T = GroupElement::generator(Generator::T);
    for (const auto& g : {S, T, T * S, S * T * T * S}) EXPECT_LT(std::abs(f(modular_image(g, z0))), 1e-6) << g;
    // and no spurious zeros nearby
    EXPECT_GT(std::abs(f(z0 + Complex(0.05, 0.0))), 1e-3);
    EXPECT_THROW(rw_function(w, 0.0), Error);
}

TEST(VanishingFunctionTest, ReducedEvaluationAgreesWithDirect) {
    // E4^3 - w Delta is weight 12: F(gz) = (cz+d)^12 F(z). Compare the reduced path at
    // g z = -1/(z+3), which has small Im, with the direct series at z.
    const auto f = rw_function(2000.0, 0.1);
    const auto& t = FormTable::get();
    const GroupElement g = GroupElement::generator(Generator::S) * GroupElement(1, 3, 0, 1);
    for (const Complex z : {Complex(0.31, 0.32), Complex(-0.4, 0.35), Complex(0.05, 0.41)}) {
        const Complex e4 = qseries_eval(t.e4, z).value;
        const Complex direct = e4 * e4 * e4 - 2000.0 * qseries_eval(t.delta, z).value;
        const Complex gz = modular_image(g, z);
        ASSERT_LT(gz.imag(), 0.3);
        const Complex cz_d = static_cast<double>(g.c()) * z + static_cast<double>(g.d());
        EXPECT_LT(std::abs(f.weight12(gz) - std::pow(cz_d, 12) * direct), 1e-8 * std::abs(std::pow(cz_d, 12) * direct));
    }
}

TEST(VanishingFunctionTest, GrowthCertificateStable) {
    const auto f = rw_function(2000.0, 0.1);
    const auto c1 = f.certificate(17, 400, 1e4);
    const auto c2 = f.certificate(33, 800, 1e4);
    EXPECT_TRUE(std::isfinite(c1.sup));
    EXPECT_GT(c1.sup, 0.0);
    EXPECT_LT(std::abs(c2.sup - c1.sup) / c2.sup, 0.01);
    EXPECT_NEAR(c1.exponent, 6.025, 1e-15);
}

TEST(VanishingFunctionTest, TailDecayDirection) {
    // Top slabs [Y, 2Y] of the grid with a slightly larger exponent: their sups must fall.
    const auto f = rw_function(2000.0, 0.1);
    const double ex = f.growth_exponent() + 0.1;
    double prev = std::numeric_limits<double>::infinity();
    for (double y = 500.0; y <= 8000.0; y *= 2.0) {
        const auto c = f.certificate(9, 64, 2.0 * y, ex, y);
        EXPECT_LT(c.sup, prev) << y;
        prev = c.sup;
    }
}

TEST(Petersson, DeltaNormAndSymmetry) {
    const auto d = delta_q(60);
    const auto r = petersson(d, d);
    EXPECT_GT(r.value.real(), 0.0);
    EXPECT_LT(std::abs(r.value.imag()), 1e-12 * r.value.real());
    EXPECT_LT(r.refinement_delta, 1e-8 * r.value.real());
    EXPECT_NEAR(r.value.real(), 1.035362056804320922e-6, 1e-8 * 1.035362056804320922e-6);
    EXPECT_LT(r.tail_bound, 1e-10 * r.value.real());

    const auto e4 = eisenstein_q(4, 60);
    EXPECT_THROW(petersson(d, e4), Error);
    EXPECT_THROW(petersson(e4.power(3), d), Error);
}

TEST(Petersson, Hermitian) {
    // weight 24 cusp forms: Delta E4^3 and Delta^2
    const auto d = delta_q(60), e4 = eisenstein_q(4, 60);
    const auto f = d * e4.power(3), g = d * d;
    const auto fg = petersson(f, g).value, gf = petersson(g, f).value;
    EXPECT_LT(std::abs(fg - std::conj(gf)), 1e-10 * std::abs(fg));
    const auto ff = petersson(f, f).value.real(), gg = petersson(g, g).value.real();
    EXPECT_GT(ff, 0.0);
    EXPECT_LE(std::norm(fg), ff * gg * (1 + 1e-10));  // Cauchy-Schwarz
}

TEST(CuspSup, DeltaInvariantAndHomogeneous) {
    const auto d = delta_q(200);
    const auto r = cusp_sup_invariant(d, 21, 40);
    EXPECT_TRUE(std::isfinite(r.sup));
    EXPECT_GT(r.sup, 0.0);
    EXPECT_LT(r.invariance_residual, 1e-8);
    const auto r3 = cusp_sup_invariant(d.scaled(-3), 21, 40);
    EXPECT_NEAR(r3.sup, 3.0 * r.sup, 1e-12 * r.sup);
    // |Delta| y^6 peaks on the imaginary axis at y = 6/(2 pi) ~ 0.955, i.e. at z = i on the grid
    EXPECT_NEAR(r.argmax.imag(), 1.0, 0.2);
    EXPECT_THROW(cusp_sup_invariant(eisenstein_q(4, 20), 5, 5), Error);
}

TEST(SpaceDims, SmallWeights) {
    EXPECT_EQ(space_dims(2, 10).dim_modular, 0u);
    for (int k : {4, 6, 8, 10}) {
        const auto s = space_dims(k, 20);
        EXPECT_EQ(s.dim_cusp, 0u) << k;
        EXPECT_EQ(s.dim_modular, 1u) << k;
    }
    const auto s12 = space_dims(12, 20);
    EXPECT_EQ(s12.dim_modular, 2u);
    EXPECT_EQ(s12.dim_cusp, 1u);
    EXPECT_EQ(s12.cusp_basis[0].truncated(20).coefficients(), delta_q(20).coefficients());
    EXPECT_EQ(space_dims(0, 3).dim_modular, 1u);
}

TEST(SpaceDims, ClassicalFormula) {
    // dim M_k = floor(k/12) + (k % 12 != 2) for k >= 0 even, independent of N past 2 * monomials
    for (int k = 0; k <= 48; k += 2) {
        const std::size_t want = k / 12 + (k % 12 == 2 ? 0 : 1);
        for (std::size_t n : {30, 45}) {
            const auto s = space_dims(k, n);
            EXPECT_EQ(s.dim_modular, want) << k;
            EXPECT_EQ(s.dim_cusp, want == 0 ? 0 : want - 1) << k;
            for (const auto& f : s.cusp_basis) EXPECT_TRUE(f.is_cusp());
        }
    }
    EXPECT_THROW(space_dims(3, 10), Error);
    EXPECT_THROW(space_dims(48, 2), Error);
}

TEST(Aliases, EisensteinNames) {
    EXPECT_EQ(canonical_form_name("G2").value(), "E4");
    EXPECT_EQ(canonical_form_name("G3").value(), "E6");
    EXPECT_FALSE(canonical_form_name("G7").has_value());
}
