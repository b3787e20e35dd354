#include "aniso/decomposition.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace aniso;
using namespace testing_aniso;

namespace {

Decomposition dec_of(std::size_t n, std::vector<ExactVector> rows)
{
    return decompose(SubspaceSpec::from_vectors(n, rows));
}

Decomposition random_rational_decomposition(std::mt19937_64& rng)
{
    for (;;) {
        std::size_t n = 2 + rng() % 3;
        std::size_t p = rng() % n;
        try {
            return dec_of(n, random_rational_rows(rng, n, p));
        } catch (const dependent_basis&) {
        }
    }
}

void expect_structure(const Decomposition& dec)
{
    const std::size_t n = dec.n;
    // Gamma lies in F: H^T gamma = 0
    ExactMatrix ht_g = dec.h_basis.transpose() * to_exact(dec.gamma_basis);
    for (std::size_t i = 0; i < ht_g.rows(); ++i)
        for (std::size_t j = 0; j < ht_g.cols(); ++j)
            EXPECT_TRUE(ht_g(i, j).is_zero());
    EXPECT_LE(dec.r, dec.p);
    EXPECT_EQ(dec.gamma_perp_basis.cols(), n - dec.r);
    EXPECT_EQ(covolume_sq(dec.gamma_perp_basis), dec.covol_sq);
    EXPECT_EQ(dec.proj_f + dec.proj_h, ExactMatrix::identity(n));
    EXPECT_EQ(dec.proj_f * dec.proj_f, dec.proj_f);
    EXPECT_EQ(dec.proj_h * dec.proj_h, dec.proj_h);
    EXPECT_EQ(dec.proj_f.transpose(), dec.proj_f);
    EXPECT_EQ(to_exact(dec.proj_v) * dec.proj_f, to_exact(dec.proj_v));
    EXPECT_EQ(dec.gamma_star_basis.transpose() * to_rational(dec.gamma_basis), RationalMatrix::identity(dec.r));
}

} // namespace

TEST(Decompose, XAxis)
{
    auto dec = dec_of(2, {ev({"1", "0"})});
    EXPECT_EQ(dec.r, 1u);
    EXPECT_EQ(dec.q, 1u);
    EXPECT_EQ(dec.gamma_basis, int_columns({{1, 0}}));
    EXPECT_EQ(to_exact(dec.gamma_star_basis), exact_rows({{"1"}, {"0"}}));
    EXPECT_EQ(dec.covol_sq, Rational(1));
    IntMatrix gp = dec.gamma_perp_basis;
    ASSERT_EQ(gp.cols(), 1u);
    EXPECT_EQ(gp(0, 0), 0);
    EXPECT_EQ(abs(gp(1, 0)), 1);
    expect_structure(dec);
}

TEST(Decompose, KroneckerLine)
{
    auto dec = dec_of(2, {ev({"1", "sqrt(2)"})});
    EXPECT_EQ(dec.discriminant, 2);
    EXPECT_EQ(dec.r, 0u);
    EXPECT_EQ(dec.covol_sq, Rational(1));
    EXPECT_EQ(dec.gamma_perp_basis.cols(), 2u);
    EXPECT_EQ(covolume_sq(dec.gamma_perp_basis), Rational(1));
    // F_V = F: one column parallel to (1, sqrt 2)
    ASSERT_EQ(dec.fv_basis.cols(), 1u);
    ExactScalar cross = dec.fv_basis(0, 0) * ExactScalar::sqrt_of(2) - dec.fv_basis(1, 0);
    EXPECT_TRUE(cross.is_zero());
    expect_structure(dec);
}

TEST(Decompose, Diagonal)
{
    auto dec = dec_of(2, {ev({"1", "1"})});
    EXPECT_EQ(dec.gamma_basis, int_columns({{1, 1}}));
    EXPECT_EQ(dec.covol_sq, Rational(2));
    EXPECT_EQ(to_exact(dec.gamma_star_basis), exact_rows({{"1/2"}, {"1/2"}}));
    IntMatrix gp = dec.gamma_perp_basis;
    EXPECT_EQ(gp(0, 0), -gp(1, 0));
    EXPECT_EQ(abs(gp(0, 0)), 1);
    EXPECT_EQ(covolume_sq(gp), Rational(2));
    expect_structure(dec);
}

TEST(Decompose, TrivialSubspace)
{
    auto dec = decompose(SubspaceSpec::trivial(3));
    EXPECT_EQ(dec.p, 0u);
    EXPECT_EQ(dec.q, 3u);
    EXPECT_EQ(dec.r, 0u);
    EXPECT_EQ(dec.proj_h, ExactMatrix::identity(3));
    expect_structure(dec);
}

TEST(Decompose, RejectsDependentBasis)
{
    EXPECT_THROW(dec_of(2, {ev({"1", "2"}), ev({"2", "4"})}), dependent_basis);
}

TEST(Decompose, IrrationalPlaneInThreeSpace)
{
    // F = span{(1,0,0), (0,1,sqrt 2)}: Gamma = Z e1, r = 1 < p = 2
    auto dec = dec_of(3, {ev({"1", "0", "0"}), ev({"0", "1", "sqrt(2)"})});
    EXPECT_EQ(dec.r, 1u);
    EXPECT_EQ(dec.fv_basis.cols(), 1u);
    expect_structure(dec);
}

TEST(Decompose, RandomRationalSubspaces)
{
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 20; ++t) {
        auto dec = random_rational_decomposition(rng);
        EXPECT_EQ(dec.r, dec.p);
        expect_structure(dec);
    }
}

TEST(Decompose, ReportMentionsTheIdentity)
{
    auto dec = dec_of(2, {ev({"1", "1"})});
    std::string rep = decomposition_report(dec);
    EXPECT_NE(rep.find("covolume identity holds = true"), std::string::npos);
    EXPECT_NE(rep.find("r = 1"), std::string::npos);
}

TEST(ClassifyFiber, Examples)
{
    auto xa = dec_of(2, {ev({"1", "0"})});
    std::vector<std::int64_t> k{3, 5};
    EXPECT_EQ(classify_fiber(xa, k), (DualCoords{3}));
    EXPECT_EQ(dual_point(xa, {3}), (std::vector<Rational>{3, 0}));

    auto diag = dec_of(2, {ev({"1", "1"})});
    std::vector<std::int64_t> k2{1, 0};
    auto c = classify_fiber(diag, k2);
    EXPECT_EQ(dual_point(diag, c), (std::vector<Rational>{make_rational(1, 2), make_rational(1, 2)}));

    auto kr = dec_of(2, {ev({"1", "sqrt(2)"})});
    EXPECT_TRUE(classify_fiber(kr, k).empty());
}

TEST(ClassifyFiber, ConstantOnGammaPerpCosets)
{
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> coef(-4, 4);
    for (int t = 0; t < 20; ++t) {
        auto dec = random_rational_decomposition(rng);
        std::vector<std::int64_t> k(dec.n), kg(dec.n);
        for (auto& x : k)
            x = coef(rng);
        kg = k;
        for (std::size_t j = 0; j < dec.gamma_perp_basis.cols(); ++j) {
            int a = coef(rng);
            for (std::size_t i = 0; i < dec.n; ++i)
                kg[i] += a * dec.gamma_perp_basis(i, j).get_si();
        }
        EXPECT_EQ(classify_fiber(dec, k), classify_fiber(dec, kg));
    }
}

TEST(ClassifyFiber, MatchesExactProjection)
{
    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; ++t) {
        auto dec = random_rational_decomposition(rng);
        std::vector<std::int64_t> k(dec.n);
        for (auto& x : k)
            x = static_cast<std::int64_t>(rng() % 11) - 5;
        auto pt = dual_point(dec, classify_fiber(dec, k));
        for (std::size_t i = 0; i < dec.n; ++i) {
            Rational s = 0;
            for (std::size_t j = 0; j < dec.n; ++j)
                s += dec.proj_v(i, j) * k[j];
            EXPECT_EQ(pt[i], s);
        }
    }
}

TEST(EnumerateDualPoints, Examples)
{
    auto kr = dec_of(2, {ev({"1", "sqrt(2)"})});
    EXPECT_EQ(enumerate_dual_points(kr, 7.0), (std::vector<DualCoords>{{}}));

    auto xa = dec_of(2, {ev({"1", "0"})});
    auto pts = enumerate_dual_points(xa, 2.5);
    EXPECT_EQ(pts, (std::vector<DualCoords>{{-2}, {-1}, {0}, {1}, {2}}));

    auto diag = dec_of(2, {ev({"1", "1"})});
    EXPECT_EQ(enumerate_dual_points(diag, 1.0), (std::vector<DualCoords>{{-1}, {0}, {1}}));
}

TEST(EnumerateDualPoints, MatchesBruteForce)
{
    std::mt19937_64 rng(12);
    int checked = 0;
    while (checked < 15) {
        auto dec = random_rational_decomposition(rng);
        if (dec.r == 0 || dec.r > 2)
            continue;
        ++checked;
        double radius = 0.5 + static_cast<double>(rng() % 30) / 10.0;
        auto pts = enumerate_dual_points(dec, radius);
        std::vector<DualCoords> brute;
        Rational rsq = rational_from_double(radius) * rational_from_double(radius);
        // coordinate j equals (gamma_j, gamma*), so |m_j| <= |gamma_j| radius
        std::vector<long> box(dec.r);
        for (std::size_t j = 0; j < dec.r; ++j) {
            double len = 0;
            for (std::size_t i = 0; i < dec.n; ++i)
                len += dec.gamma_basis(i, j).get_d() * dec.gamma_basis(i, j).get_d();
            box[j] = static_cast<long>(std::sqrt(len) * radius) + 1;
        }
        if (dec.r == 1) {
            for (long a = -box[0]; a <= box[0]; ++a)
                if (dual_norm_sq(dec, {a}) <= rsq)
                    brute.push_back({a});
        } else {
            for (long a = -box[0]; a <= box[0]; ++a)
                for (long b = -box[1]; b <= box[1]; ++b)
                    if (dual_norm_sq(dec, {a, b}) <= rsq)
                        brute.push_back({a, b});
        }
        std::sort(brute.begin(), brute.end());
        EXPECT_EQ(pts, brute);
    }
}
