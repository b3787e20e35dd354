#ifndef ANISO_TEST_HELPERS_HPP
#define ANISO_TEST_HELPERS_HPP

#include "aniso/exact.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace testing_aniso {

using namespace aniso;

inline ExactVector ev(std::initializer_list<const char*> xs)
{
    ExactVector v;
    for (auto x : xs)
        v.push_back(parse_exact(x));
    return v;
}

inline IntMatrix int_columns(std::initializer_list<std::initializer_list<long>> cols)
{
    std::vector<std::vector<Integer>> c;
    std::size_t rows = 0;
    for (const auto& col : cols) {
        c.emplace_back();
        for (long x : col)
            c.back().push_back(Integer(x));
        rows = col.size();
    }
    return IntMatrix::from_columns(rows, c);
}

inline IntMatrix int_rows(std::initializer_list<std::initializer_list<long>> rows)
{
    std::vector<std::vector<Integer>> r;
    for (const auto& row : rows) {
        r.emplace_back();
        for (long x : row)
            r.back().push_back(Integer(x));
    }
    return IntMatrix::from_rows(r);
}

inline ExactMatrix exact_rows(std::initializer_list<std::initializer_list<const char*>> rows)
{
    std::vector<ExactVector> r;
    for (const auto& row : rows)
        r.push_back(ev(row));
    return ExactMatrix::from_rows(r);
}

/// Random small rational vectors spanning a subspace (possibly dependent).
inline std::vector<ExactVector> random_rational_rows(std::mt19937_64& rng, std::size_t n, std::size_t p, int range = 3)
{
    std::uniform_int_distribution<int> num(-range, range), den(1, 3);
    std::vector<ExactVector> rows;
    for (std::size_t i = 0; i < p; ++i) {
        ExactVector v;
        for (std::size_t j = 0; j < n; ++j)
            v.push_back(ExactScalar(make_rational(num(rng), den(rng))));
        rows.push_back(v);
    }
    return rows;
}

} // namespace testing_aniso

#endif
