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

///
/// \file mapp.hpp
///
/// Matrix pencil and pairing (MaPP): Vandermonde decomposition
/// T = sum_j p_j a(f_j) a(f_j)^H of PSD multilevel Toeplitz matrices.
///
/// Two entry points:
///
///  - mapp_recursive: rank r < min_l n_l. Factor T = Y Y^H, read the
///    first-dimension frequencies off the pencil (Y_U^H Y_L, Y_U^H Y_U),
///    decompose the (d-1)-level block T_0 = V V^H recursively and pair the
///    two through O = P~^{-1/2} A^+ V. The decomposition is unique.
///
///  - mapp_search: r up to N - N / min_l n_l. One pencil per dimension on
///    the permuted matrices P_l T P_l^T, then every combination of the
///    per-dimension frequencies is scored against the signal subspace and
///    the tuples reaching the maximal score 1 are kept. When more than r
///    survive, the r best-scoring ones are tried before giving up.
///
#ifndef MLTVD_MAPP_HPP
#define MLTVD_MAPP_HPP

#include <optional>
#include <string>
#include <vector>

#include "mltvd/mlt.hpp"

namespace mltvd
{

enum class DecompStatus
{
    ok,
    not_psd,
    rank_precondition,  ///< r >= min_l n_l in the recursive algorithm
    pencil_degenerate,  ///< Y_U rank deficient along some dimension
    ambiguous_pairing,  ///< search kept fewer or more than r tuples
    ill_posed,          ///< atom Gram matrix numerically singular
    nonpositive_power,
    residual_too_large,
};

const char* to_string(DecompStatus status);

struct RankEstimate
{
    int rank = 0;
    RealVector eigenvalues; ///< descending
    double threshold = 0.0;
};

/// T = Y Y^H with Y = [sqrt(lambda_m) q_m] over the kept eigenpairs.
struct Factorization
{
    ComplexMatrix Y;
    Shape shape;
    RankEstimate rank;
    double residual = 0.0; ///< ||T - Y Y^H||_F / ||T||_F
};

struct PencilResult
{
    ComplexVector eigenvalues;      ///< z_j
    std::vector<double> frequencies; ///< arg(z_j) / 2pi wrapped to [0, 1)
    ComplexMatrix eigenvectors;     ///< columns u~_j, orthonormal
    double condition = 0.0;         ///< cond(Y_U)
    bool degenerate = false;
    bool ill_conditioned = false;   ///< cond(Y_U^H Y_U) above 1e10
    bool completed = false;         ///< Y_U rank deficient, U completed to a unitary
};

struct VandermondeDecomposition
{
    AtomicModel model;
    double residual = 0.0; ///< ||T - sum_j p_j a_j a_j^H||_F / ||T||_F
    int order = 0;
    DecompStatus status = DecompStatus::ok;
    std::string diagnostic;

    bool ok() const noexcept { return status == DecompStatus::ok; }
};

struct MappOptions
{
    double rank_tol = 1e-6;      ///< eigenvalues above rank_tol * lambda_max count
    double psd_tol = 1e-9;       ///< accepted negative eigenvalues, relative
    double cluster_tol = 1e-7;   ///< first-dimension eigenvalues closer than this are grouped
    double pairing_tol = 1e-6;   ///< entries of O below this fraction of the column max are zero
    double score_tol = 1e-6;     ///< search keeps tuples with g >= 1 - score_tol
    double residual_tol = 1e-6;  ///< accepted relative reconstruction error
    double dedup_tol = 1e-7;     ///< search tuples closer than this are merged
    double degenerate_cond = 1e12; ///< cond(Y_U) above this makes Y_U rank deficient
    double unitary_tol = 1e-6;     ///< accepted ||B B^H - I||_F when completing a deficient pencil
};

///
/// Factors a Hermitian PSD matrix. With `rank` unset the rank is the number
/// of eigenvalues above options.rank_tol * lambda_max. Throws MltError when
/// T is not PSD within options.psd_tol or rank > N.
///
Factorization low_rank_factor(const ComplexMatrix& T, const Shape& shape,
                              std::optional<int> rank = std::nullopt,
                              const MappOptions& options = {});

///
/// Generalized eigenproblem Y_U^H Y_L x = z Y_U^H Y_U x along dimension
/// `dim` (0-based). For dim > 0 the rows of Y are first reordered by
/// dimension_permutation so that `dim` becomes the outer block level.
///
/// Solved as z = eig(Y_U^+ Y_L) with an SVD pseudo-inverse. The pencil is
/// degenerate when r > N - N / n_dim, or when Y_U is rank deficient and no
/// unitary U with Y_U U = Y_L exists. A deficient Y_U that admits one (the
/// non-unique regime) gets a deterministic unitary completion.
///
PencilResult pencil_eigen(const Factorization& fac, int dim, const MappOptions& options = {});

/// g(f) = sum_m |u_m^H a(f)|^2 for orthonormal columns u_m.
double pairing_score(const ComplexMatrix& eigbasis, const Shape& shape, const FrequencyTuple& f);

struct PowerFit
{
    std::vector<double> powers;
    double residual = 0.0;
    bool ill_posed = false;
};

/// Real least squares min_p ||T - sum_j p_j a_j a_j^H||_F.
PowerFit fit_powers(std::span<const FrequencyTuple> freqs, const ComplexMatrix& T, const Shape& shape);

VandermondeDecomposition mapp_recursive(const ComplexMatrix& T, const Shape& shape,
                                        const MappOptions& options = {});

struct SearchResult
{
    std::optional<VandermondeDecomposition> decomposition;
    DecompStatus status = DecompStatus::ok;
    std::string diagnostic;
    int candidates = 0; ///< tuples surviving the score threshold
};

SearchResult mapp_search(const ComplexMatrix& T, const Shape& shape, int rank,
                         const MappOptions& options = {});

enum class MappMode
{
    recursive,
    search,
    automatic, ///< recursive when r < min_l n_l, search otherwise or on failure
};

/// Dispatches on `mode`; the rank is estimated when not given.
VandermondeDecomposition vandermonde_decompose(const ComplexMatrix& T, const Shape& shape,
                                               MappMode mode, std::optional<int> rank = std::nullopt,
                                               const MappOptions& options = {});

} // namespace mltvd

#endif // MLTVD_MAPP_HPP
