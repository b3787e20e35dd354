#include "aniso/spectral.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace aniso;
using namespace testing_aniso;

namespace {

Decomposition dec_of(std::size_t n, std::vector<ExactVector> rows)
{
    return decompose(SubspaceSpec::from_vectors(n, rows));
}

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

/// #{k in box : reduced eigenvalue < level}, straight from the eigenvalue formula.
std::int64_t brute_counting(const MagneticTorus& mt, const ExactScalar& level, const Rational& eps, long box)
{
    std::size_t n = mt.decomposition().n;
    std::vector<std::int64_t> k(n, -box);
    std::int64_t c = 0;
    for (;;) {
        if ((mt.reduced_eigenvalue(k, eps) - level).sign() < 0)
            ++c;
        std::size_t i = 0;
        while (i < n && k[i] == box)
            k[i++] = -box;
        if (i == n)
            return c;
        ++k[i];
    }
}

} // namespace

TEST(Eigenvalue, Examples)
{
    auto xa = dec_of(2, {ev({"1", "0"})});
    MagneticTorus mt(xa, ev({"0", "0"}));
    std::vector<std::int64_t> k{3, 4};
    EXPECT_NEAR(eigenvalue(mt, k, 0.5), 52 * kPi2, 1e-9);
    EXPECT_EQ(mt.reduced_eigenvalue(k, make_rational(1, 2)), ExactScalar(13));
    EXPECT_NEAR(eigenvalue(mt, k, 1.0), 4 * kPi2 * 25, 1e-9);

    MagneticTorus shifted(xa, ev({"3", "4"}));
    EXPECT_EQ(shifted.eigenvalue(k, 0.3), 0.0);
}

TEST(Eigenvalue, NeverNegative)
{
    auto dec = dec_of(3, {ev({"1", "sqrt(2)", "0"})});
    MagneticTorus mt(dec, ev({"1/3", "-1/7", "1/2"}));
    std::mt19937_64 rng(4);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::int64_t> k{static_cast<std::int64_t>(rng() % 21) - 10, static_cast<std::int64_t>(rng() % 21) - 10,
                                    static_cast<std::int64_t>(rng() % 21) - 10};
        EXPECT_GE(mt.eigenvalue(k, 0.01 * (1 + t % 100)), 0.0);
        EXPECT_GE(mt.reduced_eigenvalue(k, make_rational(1, 1 + t % 9)).sign(), 0);
    }
}

TEST(CountingFunction, Examples)
{
    auto xa = dec_of(2, {ev({"1", "0"})});
    MagneticTorus mt(xa, ev({"0", "0"}));
    EXPECT_EQ(counting_function(mt, ExactScalar(0), make_rational(1, 10)).count, 0);
    EXPECT_EQ(counting_function(mt, ExactScalar(-1), make_rational(1, 10)).count, 0);
    EXPECT_EQ(counting_function(mt, parse_exact("1/2"), make_rational(1, 10)).count, 15);
    EXPECT_EQ(counting_function(mt, parse_exact("3/2"), Rational(1)).count, 5);
}

TEST(CountingFunction, MatchesTheEigenvalueFormula)
{
    std::mt19937_64 rng(21);
    auto dec = dec_of(3, {ev({"1", "0", "1"}), ev({"0", "1", "sqrt(2)"})});
    for (int t = 0; t < 10; ++t) {
        ExactVector a{ExactScalar(make_rational(static_cast<long>(rng() % 7) - 3, 4)),
                      ExactScalar(make_rational(static_cast<long>(rng() % 7) - 3, 5)), ExactScalar()};
        MagneticTorus mt(dec, a);
        ExactScalar level(make_rational(1 + static_cast<long>(rng() % 9), 3));
        Rational eps = make_rational(1, 1 + static_cast<long>(rng() % 4));
        EXPECT_EQ(counting_function(mt, level, eps).count, brute_counting(mt, level, eps, 16));
    }
}

TEST(CountingFunction, Monotone)
{
    auto dec = dec_of(2, {ev({"1", "sqrt(2)"})});
    MagneticTorus mt(dec, ev({"0", "0"}));
    std::int64_t prev = 0;
    for (int j = 1; j <= 10; ++j) {
        auto c = counting_function(mt, ExactScalar(make_rational(j, 4)), make_rational(1, 8)).count;
        EXPECT_GE(c, prev);
        prev = c;
    }
    prev = 0;
    for (int j = 0; j <= 7; ++j) {
        auto c = counting_function(mt, ExactScalar(2), make_rational(1, 1L << j)).count;
        EXPECT_GE(c, prev);
        prev = c;
    }
}

TEST(WeylPrediction, Examples)
{
    auto xa = dec_of(2, {ev({"1", "0"})});
    MagneticTorus mt(xa, ev({"0", "0"}));
    EXPECT_NEAR(weyl_prediction(mt, 1.0, make_rational(1, 10)), 20.0, 1e-12);
    EXPECT_NEAR(weyl_prediction(mt, 1e-300, make_rational(1, 10)), 0.0, 1e-12);
    EXPECT_EQ(weyl_prediction(mt, 0.0, make_rational(1, 10)), 0.0);

    auto kr = dec_of(2, {ev({"1", "sqrt(2)"})});
    MagneticTorus mk(kr, ev({"1/3", "0"}));
    EXPECT_NEAR(weyl_prediction(mk, 2.0, make_rational(1, 8)), 8.0 * std::numbers::pi * 2.0, 1e-9);
}

TEST(WeylPrediction, UsesTheVComponentOfThePotential)
{
    // A = (1/2, 1/3): only pi_V(A) = (1/2, 0) shifts the slices
    auto xa = dec_of(2, {ev({"1", "0"})});
    MagneticTorus mt(xa, ev({"1/2", "1/3"}));
    double level = 1.0;
    double expected = 10.0 * 2.0 * (2.0 * std::sqrt(1.0 - 0.25));
    EXPECT_NEAR(weyl_prediction(mt, level, make_rational(1, 10)), expected, 1e-12);
}

TEST(Crosscheck, PotentialInF)
{
    std::mt19937_64 rng(6);
    auto dec = dec_of(3, {ev({"1", "0", "0"}), ev({"0", "1", "1"})});
    for (int t = 0; t < 10; ++t) {
        ExactScalar s(make_rational(static_cast<long>(rng() % 9) - 4, 3)), u(make_rational(static_cast<long>(rng() % 9) - 4, 5));
        ExactVector a{s, u, u};
        MagneticTorus mt(dec, a);
        ExactScalar level(make_rational(1 + static_cast<long>(rng() % 20), 1 + static_cast<long>(rng() % 6)));
        for (Rational eps : {make_rational(1, 4), make_rational(1, 16)}) {
            auto c = crosscheck_identity(mt, level, eps);
            EXPECT_TRUE(c.agree) << c.spectral_count << " vs " << c.lattice_count;
        }
    }
}

TEST(Crosscheck, KroneckerLineAtOrigin)
{
    auto kr = dec_of(2, {ev({"1", "sqrt(2)"})});
    MagneticTorus mt(kr, ev({"0", "0"}));
    auto c = crosscheck_identity(mt, ExactScalar(2), make_rational(1, 8));
    EXPECT_TRUE(c.agree);
    EXPECT_GT(c.spectral_count, 0);
}

TEST(Crosscheck, PotentialOffF)
{
    auto xa = dec_of(2, {ev({"1", "0"})});
    MagneticTorus mt(xa, ev({"1/3", "2/7"}));
    for (int j = 1; j <= 5; ++j) {
        auto c = crosscheck_identity(mt, parse_exact("5/2"), make_rational(1, 1L << j));
        EXPECT_TRUE(c.agree);
    }
    EXPECT_THROW(crosscheck_identity(mt, ExactScalar(0), Rational(1)), std::invalid_argument);
}

TEST(MagneticTorus, RejectsWrongDimension)
{
    auto xa = dec_of(2, {ev({"1", "0"})});
    EXPECT_THROW(MagneticTorus(xa, ev({"0"})), std::invalid_argument);
}
