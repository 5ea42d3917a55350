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

#include "mltvd/mlt.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace mltvd
{

MltSequence::MltSequence(Shape shape) : shape_(std::move(shape))
{
    Index size = 1;
    for (int n : shape_.sizes())
    {
        box_dims_.push_back(2 * n - 1);
        size *= 2 * n - 1;
    }
    values_.assign(static_cast<std::size_t>(size), Complex(0.0, 0.0));
}

Index MltSequence::lag_index(std::span<const int> lag) const
{
    if (static_cast<int>(lag.size()) != shape_.dims())
        throw MltError("MltSequence: lag has wrong dimension");
    Index flat = 0;
    for (int l = 0; l < shape_.dims(); ++l)
    {
        const int n = shape_.size(l);
        if (lag[l] <= -n || lag[l] >= n)
            throw MltError("MltSequence: lag outside the box -n < k < n");
        flat = flat * box_dims_[l] + (lag[l] + n - 1);
    }
    return flat;
}

MultiIndex MltSequence::lag_of(Index index) const
{
    MultiIndex k(static_cast<std::size_t>(shape_.dims()));
    for (int l = shape_.dims() - 1; l >= 0; --l)
    {
        k[l] = static_cast<int>(index % box_dims_[l]) - (shape_.size(l) - 1);
        index /= box_dims_[l];
    }
    return k;
}

double MltSequence::hermitian_defect() const
{
    // negating a lag reverses the flat box index
    const Index size = box_size();
    double err = 0.0;
    for (Index i = 0; i < size; ++i)
        err = std::max(err, std::abs(values_[i] - std::conj(values_[size - 1 - i])));
    return err;
}

ComplexVector steering_vector(int n, double f)
{
    if (n < 1)
        throw MltError("steering_vector: n must be positive");
    const double w = wrap_unit(f);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    ComplexVector a(n);
    for (int m = 0; m < n; ++m)
        a(m) = std::polar(scale, kTwoPi * m * w);
    return a;
}

ComplexVector md_steering_vector(const Shape& shape, const FrequencyTuple& f)
{
    if (f.dims() != shape.dims())
        throw MltError("md_steering_vector: frequency dimension does not match shape");
    ComplexVector a = steering_vector(shape.size(0), f[0]);
    for (int l = 1; l < shape.dims(); ++l)
    {
        const ComplexVector b = steering_vector(shape.size(l), f[l]);
        ComplexVector next(a.size() * b.size());
        for (Index i = 0; i < a.size(); ++i)
            next.segment(i * b.size(), b.size()) = a(i) * b;
        a = std::move(next);
    }
    return a;
}

ComplexMatrix steering_matrix(const Shape& shape, std::span<const FrequencyTuple> freqs)
{
    ComplexMatrix A(shape.total(), static_cast<Index>(freqs.size()));
    for (std::size_t j = 0; j < freqs.size(); ++j)
        A.col(static_cast<Index>(j)) = md_steering_vector(shape, freqs[j]);
    return A;
}

MltSequence sequence_from_model(const Shape& shape, const AtomicModel& model)
{
    model.validate(shape.dims());
    MltSequence seq(shape);
    auto& values = seq.values();
    for (Index i = 0; i < seq.box_size(); ++i)
    {
        const MultiIndex k = seq.lag_of(i);
        Complex u(0.0, 0.0);
        for (std::size_t j = 0; j < model.order(); ++j)
        {
            double phase = 0.0;
            for (int l = 0; l < shape.dims(); ++l)
                phase += k[l] * model.freqs[j][l];
            u += std::polar(model.powers[j], -kTwoPi * phase);
        }
        values[i] = u;
    }
    // exact symmetry, independent of rounding in the phase sums
    const Index size = seq.box_size();
    for (Index i = 0; i < size / 2; ++i)
        values[size - 1 - i] = std::conj(values[i]);
    values[size / 2] = values[size / 2].real();
    return seq;
}

ComplexMatrix mlt_matrix(const MltSequence& seq)
{
    const ToeplitzClasses classes(seq.shape());
    return classes.expand(seq.values());
}

ComplexMatrix mlt_from_model(const Shape& shape, const AtomicModel& model)
{
    model.validate(shape.dims());
    const ComplexMatrix A = steering_matrix(shape, model.freqs);
    const Eigen::Map<const RealVector> p(model.powers.data(), static_cast<Index>(model.powers.size()));
    ComplexMatrix T = A * p.cast<Complex>().asDiagonal() * A.adjoint();
    // symmetrize against rounding
    return (0.5 * (T + T.adjoint())).eval();
}

ToeplitzClasses::ToeplitzClasses(const Shape& shape) : shape_(shape), n_(shape.total())
{
    const MltSequence box(shape);
    const Index box_size = box.box_size();
    counts_.assign(static_cast<std::size_t>(box_size), 0);
    mirror_.resize(static_cast<std::size_t>(box_size));
    for (Index c = 0; c < box_size; ++c)
        mirror_[c] = box_size - 1 - c;
    zero_ = box_size / 2;

    std::vector<MultiIndex> grid(static_cast<std::size_t>(n_));
    for (Index i = 0; i < n_; ++i)
        grid[i] = shape.unflatten(i);

    // strides of the lag box
    std::vector<Index> stride(static_cast<std::size_t>(shape.dims()));
    Index s = 1;
    for (int l = shape.dims() - 1; l >= 0; --l)
    {
        stride[l] = s;
        s *= 2 * shape.size(l) - 1;
    }

    class_of_.resize(static_cast<std::size_t>(n_ * n_));
    for (Index col = 0; col < n_; ++col)
        for (Index row = 0; row < n_; ++row)
        {
            Index cls = 0;
            for (int l = 0; l < shape.dims(); ++l)
                cls += (grid[col][l] - grid[row][l] + shape.size(l) - 1) * stride[l];
            class_of_[static_cast<std::size_t>(col * n_ + row)] = cls;
            ++counts_[cls];
        }
}

std::vector<Complex> ToeplitzClasses::class_sums(const ComplexMatrix& mat) const
{
    if (mat.rows() != n_ || mat.cols() != n_)
        throw MltError("ToeplitzClasses: matrix size does not match shape");
    std::vector<Complex> sums(counts_.size(), Complex(0.0, 0.0));
    const Complex* data = mat.data();
    const std::size_t total = class_of_.size();
    for (std::size_t e = 0; e < total; ++e)
        sums[class_of_[e]] += data[e];
    return sums;
}

std::vector<Complex> ToeplitzClasses::class_means(const ComplexMatrix& mat) const
{
    std::vector<Complex> sums = class_sums(mat);
    for (std::size_t c = 0; c < sums.size(); ++c)
        sums[c] /= static_cast<double>(counts_[c]);
    return sums;
}

ComplexMatrix ToeplitzClasses::expand(std::span<const Complex> values) const
{
    if (static_cast<Index>(values.size()) != classes())
        throw MltError("ToeplitzClasses::expand: wrong number of class values");
    ComplexMatrix mat(n_, n_);
    Complex* data = mat.data();
    const std::size_t total = class_of_.size();
    for (std::size_t e = 0; e < total; ++e)
        data[e] = values[class_of_[e]];
    return mat;
}

MltSequence project_to_sequence(const ComplexMatrix& mat, const Shape& shape)
{
    const ToeplitzClasses classes(shape);
    MltSequence seq(shape);
    seq.values() = classes.class_means(mat);
    return seq;
}

Shape permuted_shape(const Shape& shape, int dim)
{
    if (dim < 0 || dim >= shape.dims())
        throw MltError("permuted_shape: dimension out of range");
    std::vector<int> sizes{shape.size(dim)};
    for (int l = 0; l < shape.dims(); ++l)
        if (l != dim)
            sizes.push_back(shape.size(l));
    return Shape(std::move(sizes));
}

std::vector<Index> dimension_permutation(const Shape& shape, int dim)
{
    const Shape target = permuted_shape(shape, dim);
    std::vector<Index> perm(static_cast<std::size_t>(shape.total()));
    MultiIndex original(static_cast<std::size_t>(shape.dims()));
    for (Index i = 0; i < shape.total(); ++i)
    {
        const MultiIndex k = target.unflatten(i);
        original[dim] = k[0];
        int next = 1;
        for (int l = 0; l < shape.dims(); ++l)
            if (l != dim)
                original[l] = k[next++];
        perm[i] = shape.flatten(original);
    }
    return perm;
}

ComplexMatrix permute_symmetric(const ComplexMatrix& mat, std::span<const Index> perm)
{
    const Index n = static_cast<Index>(perm.size());
    if (mat.rows() != n || mat.cols() != n)
        throw MltError("permute_symmetric: size mismatch");
    ComplexMatrix out(n, n);
    for (Index c = 0; c < n; ++c)
        for (Index r = 0; r < n; ++r)
            out(r, c) = mat(perm[r], perm[c]);
    return out;
}

ComplexMatrix permute_rows(const ComplexMatrix& mat, std::span<const Index> perm)
{
    const Index n = static_cast<Index>(perm.size());
    if (mat.rows() != n)
        throw MltError("permute_rows: size mismatch");
    ComplexMatrix out(n, mat.cols());
    for (Index r = 0; r < n; ++r)
        out.row(r) = mat.row(perm[r]);
    return out;
}

ComplexMatrix shrink_shape(const ComplexMatrix& mat, const Shape& shape, int dim)
{
    if (dim < 0 || dim >= shape.dims())
        throw MltError("shrink_shape: dimension out of range");
    if (shape.size(dim) < 2)
        throw MltError("shrink_shape: level size must be at least 2");
    if (mat.rows() != shape.total() || mat.cols() != shape.total())
        throw MltError("shrink_shape: matrix size does not match shape");
    std::vector<Index> keep;
    for (Index i = 0; i < shape.total(); ++i)
        if (shape.unflatten(i)[dim] < shape.size(dim) - 1)
            keep.push_back(i);
    const Index m = static_cast<Index>(keep.size());
    ComplexMatrix out(m, m);
    for (Index c = 0; c < m; ++c)
        for (Index r = 0; r < m; ++r)
            out(r, c) = mat(keep[r], keep[c]);
    return out;
}

bool StructureReport::passes(double tol) const
{
    return hermitian_err <= tol && mlt_err <= tol && min_eig >= -tol * std::max(1.0, max_eig);
}

StructureReport validate_structure(const ComplexMatrix& mat, const Shape& shape)
{
    if (mat.rows() != shape.total() || mat.cols() != shape.total())
        throw MltError("validate_structure: matrix size does not match shape");
    StructureReport report;
    report.hermitian_err = (mat - mat.adjoint()).cwiseAbs().maxCoeff();

    const ToeplitzClasses classes(shape);
    const std::vector<Complex> means = classes.class_means(mat);
    const Complex* data = mat.data();
    const auto& table = classes.table();
    for (std::size_t e = 0; e < table.size(); ++e)
        report.mlt_err = std::max(report.mlt_err, std::abs(data[e] - means[table[e]]));

    const ComplexMatrix herm = 0.5 * (mat + mat.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
    report.min_eig = es.eigenvalues()(0);
    report.max_eig = es.eigenvalues()(es.eigenvalues().size() - 1);
    return report;
}

bool is_psd(const ComplexMatrix& mat, double rel_tol)
{
    const ComplexMatrix herm = 0.5 * (mat + mat.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const double top = std::max(0.0, ev(ev.size() - 1));
    return ev(0) >= -rel_tol * top;
}

} // namespace mltvd
