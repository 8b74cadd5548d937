#pragma once

// Test-only oracles, independent of the library's computation paths:
//  - Fisher's exact test by full enumeration in exact rational arithmetic.
//  - chi-squared(4) survival function by numeric quadrature of the density.

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <map>

#include "tnswac/exact_tests.hpp"

namespace oracle {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline BigInt binomial(long long n, long long k) {
    if (k < 0 || k > n) return 0;
    static std::map<std::pair<long long, long long>, BigInt> cache;
    k = std::min(k, n - k);
    const auto key = std::make_pair(n, k);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    BigInt result = 1;
    for (long long i = 1; i <= k; ++i) {
        result *= n - k + i;
        result /= i;
    }
    cache.emplace(key, result);
    return result;
}

// Two-sided p-value under the minimum-likelihood rule, applying the same
// relative tie tolerance (1e-7) as the implementation but in exact integer
// arithmetic: table k is included iff pmf_k <= pmf_obs * (1 + 1e-7).
inline double fisher_exact_two_sided(const tnswac::TwoByTwoTable& t) {
    if (t.row1() == 0 || t.row2() == 0 || t.col1() == 0 || t.col2() == 0) return 1.0;
    const long long n = t.total();
    const long long r1 = t.row1();
    const long long c1 = t.col1();
    const long long k_min = std::max<long long>(0, r1 + c1 - n);
    const long long k_max = std::min(r1, c1);

    // Same denominator C(n, r1) for every k, so pmf comparison reduces to
    // comparing numerators.
    const BigInt num_obs = binomial(c1, t.a) * binomial(n - c1, r1 - t.a);
    const BigInt scale = 10'000'000;  // 1/REL_TOL
    BigInt num_sum = 0;
    for (long long k = k_min; k <= k_max; ++k) {
        const BigInt num_k = binomial(c1, k) * binomial(n - c1, r1 - k);
        if (num_k * scale <= num_obs * (scale + 1)) num_sum += num_k;
    }
    const BigRational p(num_sum, binomial(n, r1));
    return std::min(1.0, p.convert_to<double>());
}

// Cumulative composite Simpson over the chi-squared(4) density
// f(x) = x exp(-x/2) / 4, evaluated as sf(x) = 1 - integral_0^x f.
inline double chisq_df4_sf_by_quadrature(double x, double step = 1e-3) {
    const auto density = [](double v) { return 0.25 * v * std::exp(-0.5 * v); };
    const long long intervals = std::max<long long>(2, static_cast<long long>(x / step) + 1);
    const double h = x / static_cast<double>(intervals * 2);
    double sum = density(0.0) + density(x);
    for (long long i = 1; i < intervals * 2; ++i)
        sum += density(h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
    return 1.0 - sum * h / 3.0;
}

}  // namespace oracle
