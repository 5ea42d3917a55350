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

#include "mltvd/superres.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace mltvd
{

double noise_bound(Index M, double sigma2)
{
    if (M < 0 || !(sigma2 >= 0.0))
        throw MltError("noise_bound: M and sigma2 must be nonnegative");
    const double m = static_cast<double>(M);
    return (m + 2.0 * std::sqrt(m)) * sigma2;
}

void RwtmConfig::validate() const
{
    if (max_outer < 1)
        throw MltError("RwtmConfig: max_outer must be at least 1");
    if (!(rel_change_tol > 0.0) || !(eps_scale > 0.0) || !(eps_floor > 0.0) || !(rank_tol > 0.0))
        throw MltError("RwtmConfig: tolerances must be positive");
    if (fixed_epsilon && !(*fixed_epsilon > 0.0))
        throw MltError("RwtmConfig: fixed epsilon must be positive");
    if (!(admm.tol > 0.0) || admm.max_iters < 1)
        throw MltError("RwtmConfig: invalid ADMM settings");
}

SdpSolution conv_relax(const ObservationModel& obs, const LiftedProblem& problem, const AdmmConfig& config)
{
    LiftedProblem plain = problem;
    plain.weight = ComplexMatrix();
    return solve_weighted_trace(obs, plain, config);
}

namespace
{

RealVector descending_eigenvalues(const ComplexMatrix& T)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (T + T.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().reverse();
}

int count_above(const RealVector& desc, double rel)
{
    if (desc.size() == 0 || !(desc(0) > 0.0))
        return 0;
    int r = 0;
    while (r < desc.size() && desc(r) > rel * desc(0))
        ++r;
    return r;
}

ComplexMatrix weight_from(const ComplexMatrix& T, double eps)
{
    const Index n = T.rows();
    ComplexMatrix A = 0.5 * (T + T.adjoint());
    A.diagonal().array() += eps;
    Eigen::LLT<ComplexMatrix> llt(A);
    if (llt.info() != Eigen::Success)
    {
        // T' slightly indefinite within solver tolerance: clip and retry
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(A);
        const RealVector ev = es.eigenvalues().cwiseMax(eps);
        return es.eigenvectors() * ev.cwiseInverse().cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    }
    ComplexMatrix W = llt.solve(ComplexMatrix::Identity(n, n));
    return 0.5 * (W + W.adjoint());
}

} // namespace

RwtmResult rwtm(const ObservationModel& obs, const LiftedProblem& problem, const RwtmConfig& config)
{
    config.validate();
    LiftedProblem weighted = problem;
    weighted.weight = ComplexMatrix(); // W_1 = (0 + 1 I)^{-1}

    RwtmResult out;
    double lambda1 = 0.0;
    double eps = 1.0;
    for (int j = 1; j <= config.max_outer; ++j)
    {
        if (j > 1)
            weighted.weight = weight_from(out.solution.T(), eps);
        const SdpSolution* warm = (j > 1 && config.warm_start) ? &out.solution : nullptr;
        const auto start = std::chrono::steady_clock::now();
        SdpSolution next = solve_weighted_trace(obs, weighted, config.admm, warm);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        if (!next.stats.converged && out.unconverged_inner == 0)
            out.unconverged_inner = j;

        RwtmIterate it;
        it.index = j;
        it.eigenvalues = descending_eigenvalues(next.T());
        it.rank = count_above(it.eigenvalues, config.rank_tol);
        const double top = it.eigenvalues.size() ? std::max(0.0, it.eigenvalues(0)) : 0.0;
        if (j == 1)
            lambda1 = top;

        if (config.fixed_epsilon)
            eps = *config.fixed_epsilon;
        else if (j == 1)
            eps = config.eps_scale * lambda1;
        else if (j <= config.halving_until)
            eps *= 0.5;
        if (!config.fixed_epsilon)
            eps = std::max(eps, config.eps_floor * lambda1);
        if (!(eps > 0.0))
            eps = 1.0; // zero solution, any positive value

        it.epsilon = eps;
        it.objective = next.objective;
        it.surrogate = next.t;
        for (Index i = 0; i < it.eigenvalues.size(); ++i)
            it.surrogate += std::log(std::max(it.eigenvalues(i) + eps, std::numeric_limits<double>::min()));
        if (j == 1)
            it.rel_change = std::numeric_limits<double>::infinity();
        else
        {
            const double prev = out.solution.y.norm();
            const double diff = (next.y - out.solution.y).norm();
            it.rel_change = prev > 0.0 ? diff / prev : diff;
        }
        it.stats = next.stats;
        it.seconds = elapsed.count();
        out.trace.push_back(std::move(it));
        if (j == 1)
            out.first = next;
        out.solution = std::move(next);

        if ((j > 1 && out.trace.back().rel_change < config.rel_change_tol) || lambda1 == 0.0)
        {
            out.converged = true;
            break;
        }
    }
    return out;
}

const char* to_string(Cert cert)
{
    switch (cert)
    {
    case Cert::guaranteed: return "guaranteed";
    case Cert::verified_by_mapp: return "verified_by_mapp";
    case Cert::unverified: return "unverified";
    }
    return "unknown";
}

ComplexVector base_signal(const SdpSolution& sol, const LiftedProblem& problem)
{
    const auto& emb = problem.lift.embedding;
    ComplexVector y(static_cast<Index>(emb.size()));
    for (std::size_t i = 0; i < emb.size(); ++i)
        y(static_cast<Index>(i)) = sol.y(emb[i]);
    return y;
}

namespace
{

// Least-squares amplitudes of y' on sqrt(N'/N) a'(f_j).
std::vector<Complex> fit_amplitudes(const std::vector<FrequencyTuple>& freqs, const ComplexVector& y,
                                    const LiftedProblem& problem)
{
    if (freqs.empty())
        return {};
    const Shape& lifted = problem.lift.lifted;
    const double scale = std::sqrt(static_cast<double>(lifted.total()) / static_cast<double>(problem.base.total()));
    const ComplexMatrix B = scale * steering_matrix(lifted, freqs);
    const ComplexVector c = B.completeOrthogonalDecomposition().solve(y);
    return std::vector<Complex>(c.data(), c.data() + c.size());
}

} // namespace

Retrieval retrieve_and_check(const SdpSolution& sol, const LiftedProblem& problem, const RetrievalOptions& options)
{
    const Shape& lifted = problem.lift.lifted;
    if (sol.y.size() != lifted.total() || sol.u.box_size() == 0)
        throw MltError("retrieve_and_check: solution does not match the lifted problem");
    if (options.top_r && *options.top_r < 0)
        throw MltError("retrieve_and_check: top_r must be nonnegative");

    const ComplexMatrix T = sol.T();
    Retrieval out;
    const RealVector ev = descending_eigenvalues(T);
    out.rank = count_above(ev, options.rank_tol);
    if (out.rank == 0)
    {
        out.cert = Cert::guaranteed;
        return out;
    }

    MappOptions mopts = options.mapp;
    mopts.rank_tol = options.rank_tol;
    // solver output is PSD only up to its residual
    mopts.psd_tol = std::max(mopts.psd_tol, 1e-6);

    VandermondeDecomposition dec;
    if (out.rank < lifted.min_size())
    {
        dec = vandermonde_decompose(T, lifted, MappMode::recursive, out.rank, mopts);
        out.cert = dec.ok() ? Cert::guaranteed : Cert::unverified;
    }
    else
    {
        dec = vandermonde_decompose(T, lifted, MappMode::search, out.rank, mopts);
        out.cert = dec.ok() ? Cert::verified_by_mapp : Cert::unverified;
    }
    out.status = dec.status;
    out.diagnostic = dec.diagnostic;
    out.residual = dec.residual;
    if (dec.model.order() == 0)
        return out;

    out.model = dec.model;
    out.model.amplitudes = fit_amplitudes(out.model.freqs, sol.y, problem);

    if (options.top_r && out.model.order() > static_cast<std::size_t>(*options.top_r))
    {
        std::vector<std::size_t> idx(out.model.order());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(out.model.amplitudes[a]) > std::abs(out.model.amplitudes[b]);
        });
        idx.resize(static_cast<std::size_t>(*options.top_r));
        std::sort(idx.begin(), idx.end());
        AtomicModel kept;
        for (std::size_t i : idx)
        {
            kept.freqs.push_back(out.model.freqs[i]);
            kept.powers.push_back(out.model.powers[i]);
        }
        kept.amplitudes = fit_amplitudes(kept.freqs, sol.y, problem);
        out.model = std::move(kept);
    }
    return out;
}

} // namespace mltvd
