#ifndef ANISO_EXACT_HPP
#define ANISO_EXACT_HPP

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aniso {

using Integer = mpz_class;
using Rational = mpq_class;

/// Raised when two exact values live in different quadratic fields.
class field_mismatch : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

inline Rational make_rational(const Integer& num, const Integer& den = 1)
{
    Rational q(num, den);
    q.canonicalize();
    return q;
}

/// Exact conversion of a finite double.
inline Rational rational_from_double(double x)
{
    if (!std::isfinite(x))
        throw std::invalid_argument("rational_from_double: non-finite value");
    return Rational(x);
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

/// Largest s with s^2 | d; returns (squarefree part, s).
inline std::pair<long, long> split_square_factor(long d)
{
    if (d < 0)
        throw std::invalid_argument("negative discriminant");
    if (d == 0)
        return {0, 1};
    long core = d, s = 1;
    for (long f = 2; f * f <= core; ++f)
        while (core % (f * f) == 0) {
            core /= f * f;
            s *= f;
        }
    return {core, s};
}

/// A number a + b*sqrt(d) with a, b rational and d square-free.
///
/// d == 0 marks a purely rational value; a zero surd part is always
/// normalized to d == 0, so values from Q and Q(sqrt d) mix freely.
/// Values from two different non-trivial fields do not.
class ExactScalar
{
public:
    ExactScalar() = default;
    ExactScalar(long v) : a_(v) {}
    ExactScalar(int v) : a_(v) {}
    ExactScalar(const Integer& v) : a_(v) {}
    ExactScalar(Rational a) : a_(std::move(a)) { a_.canonicalize(); }
    ExactScalar(Rational a, Rational b, long d) : a_(std::move(a)), b_(std::move(b))
    {
        a_.canonicalize();
        b_.canonicalize();
        auto [core, s] = split_square_factor(d);
        b_ *= s;
        if (core == 1) {
            a_ += b_;
            b_ = 0;
            core = 0;
        }
        d_ = (b_ == 0) ? 0 : core;
        if (d_ == 0)
            b_ = 0;
    }

    static ExactScalar sqrt_of(long d) { return ExactScalar(Rational(0), Rational(1), d); }

    const Rational& rational_part() const { return a_; }
    const Rational& surd_part() const { return b_; }
    long discriminant() const { return d_; }
    bool is_rational() const { return d_ == 0; }

    int sign() const
    {
        int sa = sgn(a_), sb = sgn(b_);
        if (sb == 0)
            return sa;
        if (sa == 0 || sa == sb)
            return sb;
        // opposite signs: compare a^2 with b^2 d
        Rational lhs = a_ * a_, rhs = b_ * b_ * d_;
        int c = cmp(lhs, rhs);
        if (c == 0)
            return 0;
        return c > 0 ? sa : sb;
    }
    bool is_zero() const { return sgn(a_) == 0 && sgn(b_) == 0; }

    double to_double() const
    {
        if (d_ == 0)
            return a_.get_d();
        long double v = static_cast<long double>(a_.get_d())
            + static_cast<long double>(b_.get_d()) * std::sqrt(static_cast<long double>(d_));
        if (std::fabs(static_cast<double>(v)) < 1e-6 * (std::fabs(a_.get_d()) + 1e-300)) {
            // heavy cancellation: a + b sqrt d = (a^2 - b^2 d) / (a - b sqrt d)
            Rational num = a_ * a_ - b_ * b_ * d_;
            long double den = static_cast<long double>(a_.get_d())
                - static_cast<long double>(b_.get_d()) * std::sqrt(static_cast<long double>(d_));
            return static_cast<double>(static_cast<long double>(num.get_d()) / den);
        }
        return static_cast<double>(v);
    }

    ExactScalar operator-() const
    {
        ExactScalar r;
        r.a_ = -a_;
        r.b_ = -b_;
        r.d_ = d_;
        return r;
    }

    ExactScalar& operator+=(const ExactScalar& o)
    {
        long d = common_field(o);
        a_ += o.a_;
        b_ += o.b_;
        d_ = d;
        normalize();
        return *this;
    }
    ExactScalar& operator-=(const ExactScalar& o)
    {
        long d = common_field(o);
        a_ -= o.a_;
        b_ -= o.b_;
        d_ = d;
        normalize();
        return *this;
    }
    ExactScalar& operator*=(const ExactScalar& o)
    {
        long d = common_field(o);
        if (d == 0) {
            a_ *= o.a_;
        } else {
            Rational na = a_ * o.a_ + b_ * o.b_ * d;
            Rational nb = a_ * o.b_ + b_ * o.a_;
            a_ = std::move(na);
            b_ = std::move(nb);
        }
        d_ = d;
        normalize();
        return *this;
    }
    ExactScalar inverse() const
    {
        if (is_zero())
            throw std::domain_error("ExactScalar: division by zero");
        if (d_ == 0)
            return ExactScalar(Rational(1) / a_);
        Rational norm = a_ * a_ - b_ * b_ * d_;
        return ExactScalar(a_ / norm, -b_ / norm, d_);
    }
    ExactScalar& operator/=(const ExactScalar& o) { return *this *= o.inverse(); }

    friend ExactScalar operator+(ExactScalar x, const ExactScalar& y) { return x += y; }
    friend ExactScalar operator-(ExactScalar x, const ExactScalar& y) { return x -= y; }
    friend ExactScalar operator*(ExactScalar x, const ExactScalar& y) { return x *= y; }
    friend ExactScalar operator/(ExactScalar x, const ExactScalar& y) { return x /= y; }

    friend bool operator==(const ExactScalar& x, const ExactScalar& y)
    {
        return x.d_ == y.d_ && x.a_ == y.a_ && x.b_ == y.b_;
    }
    friend bool operator!=(const ExactScalar& x, const ExactScalar& y) { return !(x == y); }
    friend bool operator<(const ExactScalar& x, const ExactScalar& y) { return (x - y).sign() < 0; }
    friend bool operator>(const ExactScalar& x, const ExactScalar& y) { return (x - y).sign() > 0; }
    friend bool operator<=(const ExactScalar& x, const ExactScalar& y) { return (x - y).sign() <= 0; }
    friend bool operator>=(const ExactScalar& x, const ExactScalar& y) { return (x - y).sign() >= 0; }

    std::string str() const
    {
        if (d_ == 0)
            return a_.get_str();
        std::string s;
        if (a_ != 0)
            s = a_.get_str() + (sgn(b_) >= 0 ? "+" : "");
        s += b_.get_str() + "*sqrt(" + std::to_string(d_) + ")";
        return s;
    }
    friend std::ostream& operator<<(std::ostream& os, const ExactScalar& x) { return os << x.str(); }

private:
    long common_field(const ExactScalar& o) const
    {
        if (d_ == 0)
            return o.d_;
        if (o.d_ == 0 || o.d_ == d_)
            return d_;
        throw field_mismatch("values from Q(sqrt " + std::to_string(d_) + ") and Q(sqrt "
                             + std::to_string(o.d_) + ") cannot be combined");
    }
    void normalize()
    {
        if (sgn(b_) == 0)
            d_ = 0;
    }

    Rational a_{0};
    Rational b_{0};
    long d_ = 0;
};

inline double to_double(const ExactScalar& x) { return x.to_double(); }
inline double to_double(const Rational& x) { return x.get_d(); }
inline double to_double(const Integer& x) { return x.get_d(); }

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// "3", "-3/4", "0.125", "1e-3" -> exact rational
inline Rational parse_rational_token(std::string_view tok)
{
    tok = trim(tok);
    if (tok.empty())
        throw std::invalid_argument("empty numeric literal");
    std::string t(tok);
    if (t.find_first_of(".eE") != std::string::npos) {
        // decimal literal: exact value of the decimal string, not of its double
        bool neg = false;
        std::size_t i = 0;
        if (t[i] == '+' || t[i] == '-')
            neg = t[i++] == '-';
        std::string mant, exps;
        auto epos = t.find_first_of("eE", i);
        mant = t.substr(i, epos == std::string::npos ? std::string::npos : epos - i);
        if (epos != std::string::npos)
            exps = t.substr(epos + 1);
        auto dot = mant.find('.');
        std::string digits = mant;
        long scale = 0;
        if (dot != std::string::npos) {
            digits = mant.substr(0, dot) + mant.substr(dot + 1);
            scale = static_cast<long>(mant.size() - dot - 1);
        }
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("malformed decimal literal '" + t + "'");
        long e = 0;
        if (!exps.empty()) {
            std::size_t used = 0;
            e = std::stol(exps, &used);
            if (used != exps.size())
                throw std::invalid_argument("malformed exponent in '" + t + "'");
        }
        e -= scale;
        Integer num(digits, 10);
        Integer p;
        mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(e)));
        Rational q = e >= 0 ? Rational(num * p) : make_rational(num, p);
        return neg ? Rational(-q) : q;
    }
    if (t.front() == '+')
        t.erase(0, 1);
    Rational q;
    if (t.empty() || t.front() == '+' || q.set_str(t, 10) != 0)
        throw std::invalid_argument("malformed rational literal '" + t + "'");
    if (q.get_den() == 0)
        throw std::invalid_argument("zero denominator in '" + t + "'");
    q.canonicalize();
    return q;
}

} // namespace detail

/// Parses exact literals: "1/8", "-2", "0.1", "sqrt(2)", "1+1*sqrt(2)",
/// "1/2-3/4*sqrt(5)", "2sqrt(3)".
inline ExactScalar parse_exact(std::string_view text)
{
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            s.push_back(c);
    if (s.empty())
        throw std::invalid_argument("empty exact literal");

    // split into signed terms at top-level +/- (not inside exponents or parens)
    std::vector<std::string> terms;
    std::string cur;
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '(')
            ++depth;
        if (c == ')')
            --depth;
        bool after_exp = i > 0 && (s[i - 1] == 'e' || s[i - 1] == 'E') && i > 1
            && std::isdigit(static_cast<unsigned char>(s[i - 2]));
        if ((c == '+' || c == '-') && depth == 0 && !cur.empty() && !after_exp) {
            terms.push_back(cur);
            cur.clear();
        }
        cur.push_back(c);
    }
    terms.push_back(cur);

    ExactScalar total;
    for (auto& term : terms) {
        auto pos = term.find("sqrt(");
        if (pos == std::string::npos) {
            total += ExactScalar(detail::parse_rational_token(term));
            continue;
        }
        auto close = term.find(')', pos);
        if (close == std::string::npos || close + 1 != term.size())
            throw std::invalid_argument("malformed surd term '" + term + "'");
        long d = std::stol(term.substr(pos + 5, close - pos - 5));
        std::string coef = term.substr(0, pos);
        if (!coef.empty() && coef.back() == '*')
            coef.pop_back();
        Rational c = 1;
        if (coef == "-")
            c = -1;
        else if (coef == "+" || coef.empty())
            c = 1;
        else
            c = detail::parse_rational_token(coef);
        total += ExactScalar(Rational(0), c, d);
    }
    return total;
}

/// Dense row-major matrix over an exact (or integer) scalar type.
template <class T>
class Matrix
{
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = T(1);
        return m;
    }
    /// Columns given as vectors of equal length.
    static Matrix from_columns(std::size_t rows, const std::vector<std::vector<T>>& cols)
    {
        Matrix m(rows, cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (cols[j].size() != rows)
                throw std::invalid_argument("Matrix::from_columns: ragged input");
            for (std::size_t i = 0; i < rows; ++i)
                m(i, j) = cols[j][i];
        }
        return m;
    }
    static Matrix from_rows(const std::vector<std::vector<T>>& rows)
    {
        if (rows.empty())
            return Matrix();
        Matrix m(rows.size(), rows[0].size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_)
                throw std::invalid_argument("Matrix::from_rows: ragged input");
            for (std::size_t j = 0; j < m.cols_; ++j)
                m(i, j) = rows[i][j];
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<T> column(std::size_t j) const
    {
        std::vector<T> v(rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            v[i] = (*this)(i, j);
        return v;
    }
    std::vector<T> row(std::size_t i) const
    {
        return std::vector<T>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
    }

    Matrix transpose() const
    {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    friend Matrix operator*(const Matrix& x, const Matrix& y)
    {
        if (x.cols_ != y.rows_)
            throw std::invalid_argument("Matrix product: shape mismatch");
        Matrix r(x.rows_, y.cols_);
        for (std::size_t i = 0; i < x.rows_; ++i)
            for (std::size_t k = 0; k < x.cols_; ++k) {
                const T& xik = x(i, k);
                if (xik == T(0))
                    continue;
                for (std::size_t j = 0; j < y.cols_; ++j)
                    r(i, j) += xik * y(k, j);
            }
        return r;
    }
    friend Matrix operator+(Matrix x, const Matrix& y)
    {
        x.check_same(y);
        for (std::size_t i = 0; i < x.data_.size(); ++i)
            x.data_[i] += y.data_[i];
        return x;
    }
    friend Matrix operator-(Matrix x, const Matrix& y)
    {
        x.check_same(y);
        for (std::size_t i = 0; i < x.data_.size(); ++i)
            x.data_[i] -= y.data_[i];
        return x;
    }
    friend Matrix operator*(const T& s, Matrix x)
    {
        for (auto& v : x.data_)
            v *= s;
        return x;
    }
    friend bool operator==(const Matrix& x, const Matrix& y)
    {
        return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.data_ == y.data_;
    }

    std::vector<T> apply(const std::vector<T>& v) const
    {
        if (v.size() != cols_)
            throw std::invalid_argument("Matrix::apply: shape mismatch");
        std::vector<T> r(rows_, T(0));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                r[i] += (*this)(i, j) * v[j];
        return r;
    }

    /// Appends the columns of `o` (same row count).
    Matrix hcat(const Matrix& o) const
    {
        if (o.cols_ == 0)
            return *this;
        if (cols_ == 0)
            return o;
        if (rows_ != o.rows_)
            throw std::invalid_argument("Matrix::hcat: row mismatch");
        Matrix r(rows_, cols_ + o.cols_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j)
                r(i, j) = (*this)(i, j);
            for (std::size_t j = 0; j < o.cols_; ++j)
                r(i, cols_ + j) = o(i, j);
        }
        return r;
    }
    Matrix vcat(const Matrix& o) const
    {
        if (o.rows_ == 0)
            return *this;
        if (rows_ == 0)
            return o;
        if (cols_ != o.cols_)
            throw std::invalid_argument("Matrix::vcat: column mismatch");
        Matrix r(rows_ + o.rows_, cols_);
        std::copy(data_.begin(), data_.end(), r.data_.begin());
        std::copy(o.data_.begin(), o.data_.end(), r.data_.begin() + data_.size());
        return r;
    }

    const std::vector<T>& data() const { return data_; }

private:
    void check_same(const Matrix& y) const
    {
        if (rows_ != y.rows_ || cols_ != y.cols_)
            throw std::invalid_argument("Matrix: shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using IntMatrix = Matrix<Integer>;
using RationalMatrix = Matrix<Rational>;
using ExactMatrix = Matrix<ExactScalar>;
using ExactVector = std::vector<ExactScalar>;

/// Common discriminant of all entries (0 if all rational); throws on a mix.
inline long discriminant_of(const ExactMatrix& m)
{
    long d = 0;
    for (const auto& v : m.data()) {
        if (v.discriminant() == 0)
            continue;
        if (d != 0 && d != v.discriminant())
            throw field_mismatch("matrix mixes quadratic fields");
        d = v.discriminant();
    }
    return d;
}

inline ExactMatrix to_exact(const IntMatrix& m)
{
    ExactMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            r(i, j) = ExactScalar(m(i, j));
    return r;
}
inline ExactMatrix to_exact(const RationalMatrix& m)
{
    ExactMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            r(i, j) = ExactScalar(m(i, j));
    return r;
}
inline RationalMatrix to_rational(const IntMatrix& m)
{
    RationalMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            r(i, j) = Rational(m(i, j));
    return r;
}

template <class T>
std::string to_string(const Matrix<T>& m)
{
    std::ostringstream os;
    os << '[';
    if (m.cols() == 0)
        return "[]";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        os << (i ? "; " : "");
        for (std::size_t j = 0; j < m.cols(); ++j)
            os << (j ? ", " : "") << m(i, j);
    }
    os << ']';
    return os.str();
}

} // namespace aniso

#endif
