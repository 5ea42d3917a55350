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

#ifndef MLTVD_MLT_HPP
#define MLTVD_MLT_HPP

#include <span>
#include <vector>

#include "mltvd/types.hpp"

namespace mltvd
{

///
/// Coefficients u_k of a d-level Toeplitz matrix on the lag box
/// -n < k < n (elementwise |k_l| <= n_l - 1).
///
/// Storage is dense over the box, flattened row-major with offset n_l - 1
/// per dimension.
///
class MltSequence
{
public:
    MltSequence() = default;
    explicit MltSequence(Shape shape);

    const Shape& shape() const noexcept { return shape_; }

    /// Number of lags, prod_l (2 n_l - 1).
    Index box_size() const noexcept { return static_cast<Index>(values_.size()); }

    Complex& operator[](std::span<const int> lag) { return values_[lag_index(lag)]; }
    Complex operator[](std::span<const int> lag) const { return values_[lag_index(lag)]; }

    /// Throws MltError when a lag component is outside -n_l < k_l < n_l.
    Index lag_index(std::span<const int> lag) const;
    MultiIndex lag_of(Index index) const;

    std::vector<Complex>& values() noexcept { return values_; }
    const std::vector<Complex>& values() const noexcept { return values_; }

    /// Largest |u_{-k} - conj(u_k)| over the box (includes |Im u_0|).
    double hermitian_defect() const;

private:
    Shape shape_;
    std::vector<Index> box_dims_;
    std::vector<Complex> values_;
};

/// a_n(f) = n^{-1/2} [1, e^{i2pi f}, ..., e^{i2pi (n-1) f}]^T.
ComplexVector steering_vector(int n, double f);

/// Kronecker product a_{n_1}(f_1) (x) ... (x) a_{n_d}(f_d).
ComplexVector md_steering_vector(const Shape& shape, const FrequencyTuple& f);

/// N x r matrix whose column j is md_steering_vector(shape, freqs[j]).
ComplexMatrix steering_matrix(const Shape& shape, std::span<const FrequencyTuple> freqs);

/// u_k = sum_j p_j exp(-i2pi k^T f_j) over the lag box.
MltSequence sequence_from_model(const Shape& shape, const AtomicModel& model);

///
/// Dense d-level Toeplitz matrix of a sequence: the entry in row
/// multi-index j and column multi-index m is u_{m - j}. For n = (2, 2)
/// the first row reads (u_00, u_01, u_10, u_11).
///
ComplexMatrix mlt_matrix(const MltSequence& seq);

///
/// T = A(f) P A(f)^H.
///
/// Because the steering vectors have unit norm, this equals
/// mlt_matrix(sequence_from_model(shape, model)) / N.
///
ComplexMatrix mlt_from_model(const Shape& shape, const AtomicModel& model);

///
/// Lag structure of an N x N d-level Toeplitz matrix: every entry (j, m)
/// belongs to the equality class of the lag m - j.
///
class ToeplitzClasses
{
public:
    explicit ToeplitzClasses(const Shape& shape);

    const Shape& shape() const noexcept { return shape_; }
    Index classes() const noexcept { return static_cast<Index>(counts_.size()); }

    /// Class (sequence box index) of entry (row, col).
    Index class_of(Index row, Index col) const { return class_of_[static_cast<std::size_t>(col * n_ + row)]; }

    /// Column-major N*N table of class ids.
    const std::vector<Index>& table() const noexcept { return class_of_; }
    const std::vector<Index>& counts() const noexcept { return counts_; }

    /// Box index of the negated lag.
    Index mirror(Index cls) const { return mirror_[static_cast<std::size_t>(cls)]; }
    Index zero_class() const noexcept { return zero_; }

    /// Per-class averages of the entries of an N x N matrix.
    std::vector<Complex> class_means(const ComplexMatrix& mat) const;

    /// Per-class sums of the entries of an N x N matrix.
    std::vector<Complex> class_sums(const ComplexMatrix& mat) const;

    /// Fills an N x N matrix from per-class values.
    ComplexMatrix expand(std::span<const Complex> values) const;

private:
    Shape shape_;
    Index n_ = 0;
    std::vector<Index> class_of_;
    std::vector<Index> counts_;
    std::vector<Index> mirror_;
    Index zero_ = 0;
};

///
/// Best-fitting sequence for a (possibly perturbed) N x N matrix: averages
/// every lag class.
///
MltSequence project_to_sequence(const ComplexMatrix& mat, const Shape& shape);

///
/// Index permutation realizing P_l: after reordering,
/// (P_l v)[i] = v[perm[i]], the dimension `dim` (0-based) becomes the
/// outermost Kronecker factor and the other dimensions keep their order.
///
std::vector<Index> dimension_permutation(const Shape& shape, int dim);

/// Shape (n_dim, n_1, ..., n_{dim-1}, n_{dim+1}, ..., n_d).
Shape permuted_shape(const Shape& shape, int dim);

/// P_l T P_l^T.
ComplexMatrix permute_symmetric(const ComplexMatrix& mat, std::span<const Index> perm);

/// P_l Y (row reordering).
ComplexMatrix permute_rows(const ComplexMatrix& mat, std::span<const Index> perm);

///
/// Principal submatrix T_{n - e_dim}: drops every row and column whose
/// multi-index has k_dim = n_dim - 1. Throws MltError when n_dim = 1.
///
ComplexMatrix shrink_shape(const ComplexMatrix& mat, const Shape& shape, int dim);

struct StructureReport
{
    double hermitian_err = 0.0;
    double mlt_err = 0.0;
    double min_eig = 0.0;
    double max_eig = 0.0;

    /// Hermitian and Toeplitz defects within `tol` and PSD in the relative
    /// sense min_eig >= -tol * max(1, max_eig).
    bool passes(double tol) const;
};

StructureReport validate_structure(const ComplexMatrix& mat, const Shape& shape);

/// True when every eigenvalue of the Hermitian part is at least
/// -rel_tol * lambda_max.
bool is_psd(const ComplexMatrix& mat, double rel_tol = 1e-9);

} // namespace mltvd

#endif // MLTVD_MLT_HPP
