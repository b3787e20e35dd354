#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace aniso;
using namespace testing_aniso;

TEST(ExactScalar, RationalsAreCanonical)
{
    ExactScalar x(make_rational(6, -4));
    EXPECT_EQ(x.rational_part(), make_rational(-3, 2));
    EXPECT_TRUE(x.is_rational());
    EXPECT_EQ(x.discriminant(), 0);
}

TEST(ExactScalar, SquareFactorsLeaveTheRadicand)
{
    ExactScalar x(Rational(0), Rational(1), 8); // sqrt(8) = 2 sqrt(2)
    EXPECT_EQ(x.discriminant(), 2);
    EXPECT_EQ(x.surd_part(), Rational(2));
    ExactScalar y(Rational(1), Rational(3), 9); // 1 + 3*3
    EXPECT_TRUE(y.is_rational());
    EXPECT_EQ(y.rational_part(), Rational(10));
}

TEST(ExactScalar, ZeroSurdDropsTheField)
{
    ExactScalar s = ExactScalar::sqrt_of(2);
    ExactScalar z = s - s;
    EXPECT_TRUE(z.is_zero());
    EXPECT_EQ(z.discriminant(), 0);
}

TEST(ExactScalar, SignIsExact)
{
    // 1393/985 is a convergent of sqrt(2), below it by about 3.6e-7
    ExactScalar below = ExactScalar::sqrt_of(2) - ExactScalar(make_rational(1393, 985));
    EXPECT_EQ(below.sign(), 1);
    // 3363/2378 lies above sqrt(2)
    ExactScalar above = ExactScalar(make_rational(3363, 2378)) - ExactScalar::sqrt_of(2);
    EXPECT_EQ(above.sign(), 1);
    EXPECT_EQ((-above).sign(), -1);
    EXPECT_EQ(ExactScalar().sign(), 0);
    // a^2 = b^2 d exactly never happens for nonzero b, but sign of 1 - sqrt(2) must be -1
    EXPECT_EQ((ExactScalar(1) - ExactScalar::sqrt_of(2)).sign(), -1);
}

TEST(ExactScalar, FieldArithmetic)
{
    ExactScalar a = parse_exact("1+1*sqrt(2)");
    ExactScalar b = parse_exact("-1+1*sqrt(2)");
    EXPECT_EQ(a * b, ExactScalar(1));
    EXPECT_EQ(a.inverse(), b);
    EXPECT_EQ(a / b, parse_exact("3+2*sqrt(2)"));
    EXPECT_EQ(ExactScalar::sqrt_of(2) * ExactScalar::sqrt_of(2), ExactScalar(2));
}

TEST(ExactScalar, MixingFieldsThrows)
{
    EXPECT_THROW(ExactScalar::sqrt_of(2) + ExactScalar::sqrt_of(3), field_mismatch);
    EXPECT_NO_THROW(ExactScalar::sqrt_of(2) + ExactScalar(make_rational(1, 3)));
}

TEST(ExactScalar, DivisionByZeroThrows) { EXPECT_THROW(ExactScalar().inverse(), std::domain_error); }

TEST(ExactScalar, ToDoubleSurvivesCancellation)
{
    ExactScalar x = ExactScalar::sqrt_of(2) - ExactScalar(make_rational(1393, 985));
    EXPECT_NEAR(x.to_double(), std::sqrt(2.0) - 1393.0 / 985.0, 1e-15);
    EXPECT_GT(x.to_double(), 0.0);
}

TEST(ParseExact, Literals)
{
    EXPECT_EQ(parse_exact("1/8"), ExactScalar(make_rational(1, 8)));
    EXPECT_EQ(parse_exact("-3/4"), ExactScalar(make_rational(-3, 4)));
    EXPECT_EQ(parse_exact("0.125"), ExactScalar(make_rational(1, 8)));
    EXPECT_EQ(parse_exact("1e-2"), ExactScalar(make_rational(1, 100)));
    EXPECT_EQ(parse_exact("sqrt(2)"), ExactScalar::sqrt_of(2));
    EXPECT_EQ(parse_exact("2sqrt(3)"), ExactScalar(Rational(0), Rational(2), 3));
    EXPECT_EQ(parse_exact("1/2-3/4*sqrt(5)"), ExactScalar(make_rational(1, 2), make_rational(-3, 4), 5));
    EXPECT_EQ(parse_exact(" 1+1*sqrt(2) "), ExactScalar(Rational(1), Rational(1), 2));
}

TEST(ParseExact, RejectsGarbage)
{
    EXPECT_THROW(parse_exact(""), std::invalid_argument);
    EXPECT_THROW(parse_exact("abc"), std::invalid_argument);
    EXPECT_THROW(parse_exact("1/0"), std::exception);
}

TEST(ParseExact, RoundTripsThroughStr)
{
    for (const char* s : {"0", "7", "-5/3", "sqrt(2)", "1+1*sqrt(2)", "1/2-3/4*sqrt(5)", "-2*sqrt(7)"}) {
        ExactScalar x = parse_exact(s);
        EXPECT_EQ(parse_exact(x.str()), x) << s;
    }
}

TEST(Matrix, ProductAndTranspose)
{
    IntMatrix a = int_rows({{1, 2}, {3, 4}});
    IntMatrix b = int_rows({{0, 1}, {1, 0}});
    EXPECT_EQ(a * b, int_rows({{2, 1}, {4, 3}}));
    EXPECT_EQ(a.transpose(), int_rows({{1, 3}, {2, 4}}));
    EXPECT_EQ(to_string(a), "[1, 2; 3, 4]");
}
