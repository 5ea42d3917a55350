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
/// \file sdp.hpp
///
/// Weighted trace minimization over the lifted multilevel Toeplitz cone
///
///     min  t + Re tr(W T'(u'))
///     s.t. [[t, y'^H], [y', T'(u')]] >= 0,  data constraint on y',
///
/// solved by ADMM on the split D X D = Z, Z PSD, with D = diag(1, W^{1/2}).
/// X ranges over the affine set of structured blocks, so its update is a
/// small linear solve; the Z update is an eigenvalue clip.
///
#ifndef MLTVD_SDP_HPP
#define MLTVD_SDP_HPP

#include <optional>
#include <vector>

#include "mltvd/mlt.hpp"

namespace mltvd
{

///
/// Linear measurements z = L y of a signal y on the base grid.
///
/// L is a row selection when `sensing` is unset (`samples` lists the
/// observed flat indices, in measurement order) and the dense M x N matrix
/// `sensing` otherwise. eta2 = 0 asks for equality, eta2 > 0 for
/// ||z - L y||^2 <= eta2.
///
struct ObservationModel
{
    Shape shape;
    std::vector<Index> samples;
    std::optional<ComplexMatrix> sensing;
    ComplexVector z;
    double eta2 = 0.0;

    Index measurements() const noexcept { return z.size(); }

    /// Throws MltError on inconsistent sizes, repeated or out-of-range
    /// samples, or negative eta2.
    void validate() const;

    /// Every sample of y observed.
    static ObservationModel full(const Shape& shape, const ComplexVector& y, double eta2 = 0.0);

    /// Entries `samples` of y observed.
    static ObservationModel selection(const Shape& shape, std::vector<Index> samples, const ComplexVector& y,
                                      double eta2 = 0.0);
};

struct Lift
{
    Shape lifted;
    std::vector<Index> embedding; ///< base flat index -> lifted flat index
};

/// n'_l = max(n_l, rbar); the base grid sits at the same multi-indices.
Lift lift_shape(const Shape& shape, int rbar);

struct LiftedProblem
{
    Shape base;
    Lift lift;
    ComplexMatrix weight; ///< N' x N' Hermitian PSD; empty means identity

    static LiftedProblem make(const Shape& base, int rbar);

    Index lifted_size() const noexcept { return lift.lifted.total(); }
};

struct AdmmConfig
{
    double tol = 1e-7;         ///< relative primal and dual residual target
    int max_iters = 50000;
    double rho = 32.0;
    double relaxation = 1.6;   ///< over-relaxation factor in (0, 2)
    double balance_ratio = 100.0; ///< residual balancing threshold, 0 disables
    int balance_every = 100;
};

struct SolverStats
{
    int iterations = 0;
    double primal_residual = 0.0; ///< ||X - Z||_F / max(||X||_F, ||Z||_F)
    double dual_residual = 0.0;   ///< rho ||Z - Z_prev||_F / ||rho U||_F
    double rho = 1.0;
    bool converged = false;
};

struct SdpSolution
{
    double t = 0.0;
    MltSequence u;     ///< lifted sequence, T' = mlt_matrix(u)
    ComplexVector y;   ///< lifted signal y'
    double objective = 0.0;
    SolverStats stats;

    // ADMM state for warm starts
    ComplexMatrix Z;
    ComplexMatrix U;

    ComplexMatrix T() const { return mlt_matrix(u); }

    /// Structured block [[t, y^H], [y, T]].
    ComplexMatrix block() const;
};

///
/// Solves the weighted trace problem. `warm` (same lifted size) seeds the
/// split variables and the penalty. Never throws on non-convergence; check
/// stats.converged.
///
SdpSolution solve_weighted_trace(const ObservationModel& obs, const LiftedProblem& problem,
                                 const AdmmConfig& config = {}, const SdpSolution* warm = nullptr);

} // namespace mltvd

#endif // MLTVD_SDP_HPP
