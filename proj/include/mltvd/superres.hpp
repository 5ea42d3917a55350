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
/// \file superres.hpp
///
/// Multidimensional super-resolution from compressive samples: convex
/// relaxation (one weighted trace solve with W = I), reweighted trace
/// minimization (RWTM) and frequency retrieval from the lifted Toeplitz
/// block with MaPP.
///
#ifndef MLTVD_SUPERRES_HPP
#define MLTVD_SUPERRES_HPP

#include <optional>
#include <string>
#include <vector>

#include "mltvd/mapp.hpp"
#include "mltvd/sdp.hpp"

namespace mltvd
{

/// eta^2 = (M + 2 sqrt(M)) sigma^2, mean plus two standard deviations of
/// the noise energy.
double noise_bound(Index M, double sigma2);

struct RwtmConfig
{
    int max_outer = 20;
    double rel_change_tol = 1e-6; ///< on ||y'_j - y'_{j-1}|| / ||y'_{j-1}||
    double eps_scale = 0.1;       ///< eps_1 = eps_scale * lambda_max(T'_1)
    int halving_until = 8;        ///< eps_j = eps_{j-1} / 2 for j = 2..halving_until
    double eps_floor = 1e-10;     ///< relative to lambda_max(T'_1)
    std::optional<double> fixed_epsilon; ///< replaces the schedule from iteration 1 on
    double rank_tol = 1e-6;       ///< rank reported in the trace
    bool warm_start = true;
    AdmmConfig admm;

    void validate() const;
};

struct RwtmIterate
{
    int index = 0;          ///< 1-based outer iteration
    double epsilon = 0.0;   ///< eps_j, used for the next weight
    RealVector eigenvalues; ///< of T'_j, descending
    int rank = 0;
    double objective = 0.0; ///< t_j + Re tr(W_j T'_j)
    double surrogate = 0.0; ///< t_j + ln det(T'_j + eps_j I)
    double rel_change = 0.0;
    double seconds = 0.0;   ///< wall time of the inner solve
    SolverStats stats;
};

struct RwtmResult
{
    SdpSolution solution; ///< last iterate
    SdpSolution first;    ///< iteration 1, the convex relaxation
    std::vector<RwtmIterate> trace;
    bool converged = false;     ///< stopped on the relative-change rule
    int unconverged_inner = 0;  ///< first outer iteration whose solve hit its cap, 0 if none
};

/// Convex relaxation: a single solve with W = I.
SdpSolution conv_relax(const ObservationModel& obs, const LiftedProblem& problem, const AdmmConfig& config = {});

///
/// Reweighted trace minimization. Iteration j solves the weighted problem
/// with W_j = (T'_{j-1} + eps_{j-1} I)^{-1}, T'_0 = 0, eps_0 = 1, so the
/// first iteration is the convex relaxation. `problem.weight` is ignored.
///
RwtmResult rwtm(const ObservationModel& obs, const LiftedProblem& problem, const RwtmConfig& config = {});

enum class Cert
{
    guaranteed,       ///< rank(T') < min n'_l, decomposition unique
    verified_by_mapp, ///< rank too high for uniqueness, MaPP found a decomposition
    unverified,
};

const char* to_string(Cert cert);

struct RetrievalOptions
{
    double rank_tol = 1e-6;
    std::optional<int> top_r; ///< keep the r strongest atoms by |c_j|
    MappOptions mapp;
};

struct Retrieval
{
    AtomicModel model;   ///< powers of T', amplitudes on the base-grid atoms
    Cert cert = Cert::unverified;
    int rank = 0;
    double residual = 0.0; ///< Vandermonde reconstruction error of T'
    DecompStatus status = DecompStatus::ok;
    std::string diagnostic;
};

///
/// Reads the frequencies off T' with MaPP and fits amplitudes to y'.
/// The amplitudes refer to base-grid atoms a_n(f), which agree with the
/// lifted atoms on the embedded samples up to sqrt(N / N').
///
Retrieval retrieve_and_check(const SdpSolution& sol, const LiftedProblem& problem,
                             const RetrievalOptions& options = {});

/// Signal estimate y'_Omega on the base grid.
ComplexVector base_signal(const SdpSolution& sol, const LiftedProblem& problem);

} // namespace mltvd

#endif // MLTVD_SUPERRES_HPP
