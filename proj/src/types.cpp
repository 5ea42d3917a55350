// SPDX-License-Identifier: Apache-2.0
//
// mltvd: Vandermonde decomposition of multilevel Toeplitz matrices
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "mltvd/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mltvd
{

double wrap_unit(double f)
{
    double w = f - std::floor(f);
    // floor can round up to exactly 1 for tiny negative inputs
    if (w >= 1.0)
        w = 0.0;
    return w;
}

double wrap_distance(double a, double b)
{
    const double d = std::abs(wrap_unit(a) - wrap_unit(b));
    return std::min(d, 1.0 - d);
}

Shape::Shape(std::vector<int> sizes) : sizes_(std::move(sizes))
{
    if (sizes_.empty())
        throw MltError("Shape: at least one dimension is required");
    total_ = 1;
    for (int n : sizes_)
    {
        if (n < 1)
            throw MltError("Shape: level sizes must be positive");
        total_ *= n;
    }
}

Shape::Shape(std::initializer_list<int> sizes) : Shape(std::vector<int>(sizes)) {}

int Shape::min_size() const
{
    return *std::min_element(sizes_.begin(), sizes_.end());
}

Index Shape::flatten(std::span<const int> k) const
{
    if (static_cast<int>(k.size()) != dims())
        throw MltError("Shape::flatten: index has wrong dimension");
    Index flat = 0;
    for (int l = 0; l < dims(); ++l)
    {
        if (k[l] < 0 || k[l] >= sizes_[l])
            throw MltError("Shape::flatten: index out of range");
        flat = flat * sizes_[l] + k[l];
    }
    return flat;
}

MultiIndex Shape::unflatten(Index flat) const
{
    if (flat < 0 || flat >= total_)
        throw MltError("Shape::unflatten: index out of range");
    MultiIndex k(sizes_.size());
    for (int l = dims() - 1; l >= 0; --l)
    {
        k[l] = static_cast<int>(flat % sizes_[l]);
        flat /= sizes_[l];
    }
    return k;
}

Shape Shape::without(int dim) const
{
    if (dims() < 2)
        throw MltError("Shape::without: cannot drop the only dimension");
    if (dim < 0 || dim >= dims())
        throw MltError("Shape::without: dimension out of range");
    std::vector<int> rest;
    for (int l = 0; l < dims(); ++l)
        if (l != dim)
            rest.push_back(sizes_[l]);
    return Shape(std::move(rest));
}

std::string Shape::to_string() const
{
    std::ostringstream os;
    os << '(';
    for (int l = 0; l < dims(); ++l)
        os << (l ? "," : "") << sizes_[l];
    os << ')';
    return os.str();
}

FrequencyTuple::FrequencyTuple(std::vector<double> coords) : coords_(std::move(coords))
{
    for (double& c : coords_)
        c = wrap_unit(c);
}

FrequencyTuple::FrequencyTuple(std::initializer_list<double> coords)
    : FrequencyTuple(std::vector<double>(coords))
{
}

double FrequencyTuple::distance(const FrequencyTuple& other) const
{
    if (other.dims() != dims())
        throw MltError("FrequencyTuple::distance: dimension mismatch");
    double d = 0.0;
    for (int l = 0; l < dims(); ++l)
        d = std::max(d, wrap_distance(coords_[l], other.coords_[l]));
    return d;
}

void AtomicModel::validate(int dims) const
{
    if (powers.size() != freqs.size())
        throw MltError("AtomicModel: freqs and powers differ in length");
    if (!amplitudes.empty() && amplitudes.size() != freqs.size())
        throw MltError("AtomicModel: freqs and amplitudes differ in length");
    for (const auto& f : freqs)
        if (f.dims() != dims)
            throw MltError("AtomicModel: frequency tuple has wrong dimension");
    for (double p : powers)
        if (!(p > 0.0))
            throw MltError("AtomicModel: powers must be strictly positive");
    for (std::size_t a = 0; a < freqs.size(); ++a)
        for (std::size_t b = a + 1; b < freqs.size(); ++b)
            if (freqs[a].distance(freqs[b]) == 0.0)
                throw MltError("AtomicModel: frequency tuples must be distinct");
}

AtomicModel AtomicModel::from_amplitudes(std::vector<FrequencyTuple> freqs,
                                         std::vector<Complex> amplitudes)
{
    if (freqs.size() != amplitudes.size())
        throw MltError("AtomicModel: freqs and amplitudes differ in length");
    AtomicModel m;
    m.freqs = std::move(freqs);
    m.amplitudes = std::move(amplitudes);
    for (const Complex& c : m.amplitudes)
        m.powers.push_back(std::norm(c));
    return m;
}

double min_separation(std::span<const FrequencyTuple> freqs)
{
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < freqs.size(); ++a)
        for (std::size_t b = a + 1; b < freqs.size(); ++b)
            sep = std::min(sep, freqs[a].distance(freqs[b]));
    return sep;
}

} // namespace mltvd
