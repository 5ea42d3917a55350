// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for the unit tests.

#ifndef MLTVD_TEST_UTIL_HPP
#define MLTVD_TEST_UTIL_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/QR>
#include <vector>

#include "mltvd/types.hpp"

namespace mltvd::test
{

// Uniform frequencies, powers w^2 + 0.5.
inline AtomicModel random_model(const Shape& shape, int r, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    AtomicModel m;
    for (int j = 0; j < r; ++j)
    {
        std::vector<double> f(static_cast<std::size_t>(shape.dims()));
        for (auto& c : f)
            c = unif(rng);
        m.freqs.emplace_back(std::move(f));
        const double w = normal(rng);
        m.powers.push_back(w * w + 0.5);
    }
    return m;
}

// Max wrap error between two tuple sets, matched greedily by nearest tuple.
inline double set_error(std::vector<FrequencyTuple> est, const std::vector<FrequencyTuple>& truth)
{
    if (est.size() != truth.size())
        return 1.0;
    double worst = 0.0;
    for (const auto& t : truth)
    {
        auto it = std::min_element(est.begin(), est.end(), [&](const auto& a, const auto& b) {
            return a.distance(t) < b.distance(t);
        });
        worst = std::max(worst, it->distance(t));
        est.erase(it);
    }
    return worst;
}

// r uniform tuples with wrap-l_inf separation >= min_sep, by rejection.
inline std::vector<FrequencyTuple> separated_freqs(int dims, int r, double min_sep, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<FrequencyTuple> out;
    while (static_cast<int>(out.size()) < r)
    {
        std::vector<double> f(static_cast<std::size_t>(dims));
        for (auto& c : f)
            c = unif(rng);
        FrequencyTuple cand(std::move(f));
        if (std::all_of(out.begin(), out.end(), [&](const auto& g) { return g.distance(cand) >= min_sep; }))
            out.push_back(std::move(cand));
    }
    return out;
}

inline Complex complex_normal(std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const double re = normal(rng);
    const double im = normal(rng);
    return Complex(re, im) / std::sqrt(2.0);
}

// Sorted random subset of {0..n-1} of size m.
inline std::vector<Index> random_samples(Index n, Index m, std::mt19937_64& rng)
{
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(m));
    std::sort(idx.begin(), idx.end());
    return idx;
}

inline ComplexMatrix random_unitary(Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexMatrix g(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            g(i, j) = Complex(normal(rng), normal(rng));
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    return qr.householderQ() * ComplexMatrix::Identity(n, n);
}

} // namespace mltvd::test

#endif
