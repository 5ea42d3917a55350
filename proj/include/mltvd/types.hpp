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

#ifndef MLTVD_TYPES_HPP
#define MLTVD_TYPES_HPP

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mltvd
{

using Index = Eigen::Index;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Thrown for malformed arguments: dimension mismatches, out-of-range
/// dimension indices, invalid models.
class MltError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Wraps a real number onto the torus [0, 1).
double wrap_unit(double f);

/// Torus distance min(|a - b|, 1 - |a - b|) after wrapping both arguments.
double wrap_distance(double a, double b);

/// A d-dimensional integer index. Used both for grid positions (0 <= k < n)
/// and for sequence lags (-n < k < n).
using MultiIndex = std::vector<int>;

///
/// Level sizes n = (n_1, ..., n_d) of a d-level Toeplitz matrix.
///
/// Grid positions are flattened row-major, i.e. the last dimension runs
/// fastest. This is the ordering of the Kronecker product
/// a_{n_1} (x) ... (x) a_{n_d}.
///
class Shape
{
public:
    Shape() = default;
    explicit Shape(std::vector<int> sizes);
    Shape(std::initializer_list<int> sizes);

    int dims() const noexcept { return static_cast<int>(sizes_.size()); }
    int size(int dim) const { return sizes_.at(static_cast<std::size_t>(dim)); }
    const std::vector<int>& sizes() const noexcept { return sizes_; }

    /// N = prod_l n_l.
    Index total() const noexcept { return total_; }
    int min_size() const;

    Index flatten(std::span<const int> k) const;
    MultiIndex unflatten(Index flat) const;

    /// Shape with dimension `dim` removed. Requires dims() >= 2.
    Shape without(int dim) const;

    bool operator==(const Shape& other) const noexcept { return sizes_ == other.sizes_; }

    std::string to_string() const;

private:
    std::vector<int> sizes_;
    Index total_ = 0;
};

///
/// A point on the torus T^d; coordinates are wrapped to [0, 1) on
/// construction.
///
class FrequencyTuple
{
public:
    FrequencyTuple() = default;
    explicit FrequencyTuple(std::vector<double> coords);
    FrequencyTuple(std::initializer_list<double> coords);

    int dims() const noexcept { return static_cast<int>(coords_.size()); }
    double operator[](int dim) const { return coords_[static_cast<std::size_t>(dim)]; }
    const std::vector<double>& coords() const noexcept { return coords_; }

    /// Max over coordinates of the wrap distance (the wrap-l_inf metric).
    double distance(const FrequencyTuple& other) const;

    bool operator<(const FrequencyTuple& other) const { return coords_ < other.coords_; }
    bool operator==(const FrequencyTuple& other) const { return coords_ == other.coords_; }

private:
    std::vector<double> coords_;
};

///
/// r atoms: frequency tuples with strictly positive powers p_j and,
/// optionally, complex amplitudes c_j (|c_j|^2 = p_j when both are given).
///
struct AtomicModel
{
    std::vector<FrequencyTuple> freqs;
    std::vector<double> powers;
    std::vector<Complex> amplitudes;

    std::size_t order() const noexcept { return freqs.size(); }

    /// Throws MltError unless sizes agree, powers are positive, every tuple
    /// has `dims` coordinates and the tuples are pairwise distinct.
    void validate(int dims) const;

    /// Builds a model with p_j = |c_j|^2.
    static AtomicModel from_amplitudes(std::vector<FrequencyTuple> freqs,
                                       std::vector<Complex> amplitudes);
};

/// Minimum pairwise wrap-l_inf distance; +inf for fewer than two tuples.
double min_separation(std::span<const FrequencyTuple> freqs);

} // namespace mltvd

#endif // MLTVD_TYPES_HPP
