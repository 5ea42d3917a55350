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

#include "mltvd/mapp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <sstream>
#include <variant>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace mltvd
{

const char* to_string(DecompStatus status)
{
    switch (status)
    {
    case DecompStatus::ok: return "ok";
    case DecompStatus::not_psd: return "not_psd";
    case DecompStatus::rank_precondition: return "rank_precondition";
    case DecompStatus::pencil_degenerate: return "pencil_degenerate";
    case DecompStatus::ambiguous_pairing: return "ambiguous_pairing";
    case DecompStatus::ill_posed: return "ill_posed";
    case DecompStatus::nonpositive_power: return "nonpositive_power";
    case DecompStatus::residual_too_large: return "residual_too_large";
    }
    return "unknown";
}

namespace
{

struct Failure
{
    DecompStatus status;
    std::string diagnostic;
};

double relative_residual(const ComplexMatrix& T, const ComplexMatrix& approx)
{
    const double scale = T.norm();
    const double err = (T - approx).norm();
    return scale > 0.0 ? err / scale : err;
}

// Factorization with the orthonormal eigenbasis kept alongside Y.
struct EigenFactor
{
    Factorization fac;
    ComplexMatrix basis;
};

EigenFactor factor_impl(const ComplexMatrix& T, const Shape& shape, std::optional<int> rank,
                        const MappOptions& options)
{
    const Index N = shape.total();
    if (T.rows() != N || T.cols() != N)
        throw MltError("low_rank_factor: matrix size does not match shape");
    if (rank && (*rank < 0 || *rank > N))
        throw MltError("low_rank_factor: rank must lie in [0, N]");

    const ComplexMatrix herm = 0.5 * (T + T.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm);
    const RealVector& ev = es.eigenvalues();
    const double top = std::max(0.0, ev(N - 1));
    if (ev(0) < -options.psd_tol * top || (top == 0.0 && ev(0) < 0.0))
    {
        std::ostringstream os;
        os << "low_rank_factor: matrix is not PSD (min eigenvalue " << ev(0) << ", max " << top << ")";
        throw MltError(os.str());
    }

    EigenFactor out;
    Factorization& fac = out.fac;
    fac.shape = shape;
    fac.rank.eigenvalues = ev.reverse();
    fac.rank.threshold = options.rank_tol * top;
    if (rank)
        fac.rank.rank = *rank;
    else
    {
        int r = 0;
        while (r < N && top > 0.0 && fac.rank.eigenvalues(r) > fac.rank.threshold)
            ++r;
        fac.rank.rank = r;
    }

    const int r = fac.rank.rank;
    out.basis = es.eigenvectors().rightCols(r).rowwise().reverse();
    fac.Y.resize(N, r);
    for (int m = 0; m < r; ++m)
        fac.Y.col(m) = std::sqrt(std::max(0.0, fac.rank.eigenvalues(m))) * out.basis.col(m);
    fac.residual = relative_residual(herm, fac.Y * fac.Y.adjoint());
    return out;
}

// Groups sorted-by-value frequencies whose wrap distance to a neighbour is
// below `tol`. Returns cluster ids per input position.
std::vector<int> cluster_frequencies(const std::vector<double>& freqs, double tol)
{
    const std::size_t r = freqs.size();
    std::vector<int> id(r, -1);
    int next = 0;
    for (std::size_t a = 0; a < r; ++a)
    {
        if (id[a] >= 0)
            continue;
        id[a] = next;
        // single linkage
        std::vector<std::size_t> stack{a};
        while (!stack.empty())
        {
            const std::size_t cur = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < r; ++b)
                if (id[b] < 0 && wrap_distance(freqs[cur], freqs[b]) < tol)
                {
                    id[b] = next;
                    stack.push_back(b);
                }
        }
        ++next;
    }
    return id;
}

// Circular mean of nearby frequencies.
double mean_frequency(const std::vector<double>& freqs, const std::vector<std::size_t>& members)
{
    const double ref = freqs[members.front()];
    double acc = 0.0;
    for (std::size_t m : members)
    {
        double d = freqs[m] - ref;
        d -= std::round(d);
        acc += d;
    }
    return wrap_unit(ref + acc / static_cast<double>(members.size()));
}

// Frequency tuples of T = Y Y^H, rank r < min n_l.
std::variant<std::vector<FrequencyTuple>, Failure> recursive_tuples(const ComplexMatrix& Y, const Shape& shape,
                                                                    const MappOptions& options)
{
    const Index r = Y.cols();
    if (r == 0)
        return std::vector<FrequencyTuple>{};

    Factorization fac;
    fac.Y = Y;
    fac.shape = shape;
    fac.rank.rank = static_cast<int>(r);
    const PencilResult pencil = pencil_eigen(fac, 0, options);
    if (pencil.degenerate)
    {
        std::ostringstream os;
        os << "pencil degenerate along dimension 1 of " << shape.to_string() << " (cond " << pencil.condition << ")";
        return Failure{DecompStatus::pencil_degenerate, os.str()};
    }

    const std::vector<int> cluster = cluster_frequencies(pencil.frequencies, options.cluster_tol);
    const int clusters = cluster.empty() ? 0 : *std::max_element(cluster.begin(), cluster.end()) + 1;
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(clusters));
    for (std::size_t j = 0; j < cluster.size(); ++j)
        members[cluster[j]].push_back(j);

    if (shape.dims() == 1)
    {
        std::vector<FrequencyTuple> out;
        for (const auto& group : members)
            out.push_back(FrequencyTuple{mean_frequency(pencil.frequencies, group)});
        return out;
    }

    // T = sum_j n_1 a(f_1j) a(f_1j)^H (x) v_j v_j^H with V = Y_0 U~
    const Index block = shape.total() / shape.size(0);
    const ComplexMatrix V = Y.topRows(block) * pencil.eigenvectors;
    const Shape rest = shape.without(0);
    const ComplexMatrix T0 = V * V.adjoint();

    // The eigenvalue threshold can drop atoms of T0 whose frequencies nearly
    // coincide; the rank is then raised until A O reproduces V.
    std::optional<Failure> first_failure;
    std::optional<int> sub_rank;
    std::vector<FrequencyTuple> rest_tuples;
    ComplexMatrix O;
    for (;;)
    {
        EigenFactor sub;
        try
        {
            sub = factor_impl(T0, rest, sub_rank, options);
        }
        catch (const MltError& e)
        {
            return Failure{DecompStatus::not_psd, e.what()};
        }
        const int k = sub.fac.rank.rank;
        std::optional<Failure> failure;
        if (k >= rest.min_size())
        {
            std::ostringstream os;
            os << "sub-block rank " << k << " not below min level size of " << rest.to_string();
            failure = Failure{DecompStatus::rank_precondition, os.str()};
        }
        else
        {
            auto inner = recursive_tuples(sub.fac.Y, rest, options);
            if (std::holds_alternative<Failure>(inner))
                failure = std::get<Failure>(inner);
            else
            {
                rest_tuples = std::get<std::vector<FrequencyTuple>>(std::move(inner));
                const PowerFit inner_fit = fit_powers(rest_tuples, T0, rest);
                if (inner_fit.ill_posed)
                    failure = Failure{DecompStatus::ill_posed, "sub-block atoms are linearly dependent"};
                else if (std::any_of(inner_fit.powers.begin(), inner_fit.powers.end(), [](double p) { return !(p > 0.0); }))
                    failure = Failure{DecompStatus::nonpositive_power, "sub-block decomposition has a nonpositive power"};
                else
                {
                    // O = P~^{-1/2} A^+ V
                    const ComplexMatrix A = steering_matrix(rest, rest_tuples);
                    O = A.completeOrthogonalDecomposition().solve(V);
                    const double vnorm = V.norm();
                    const double miss = (A * O - V).norm();
                    for (Index m = 0; m < O.rows(); ++m)
                        O.row(m) /= std::sqrt(inner_fit.powers[static_cast<std::size_t>(m)]);
                    if (miss <= options.residual_tol * std::max(vnorm, 1e-300))
                        break;
                    failure = Failure{DecompStatus::residual_too_large, "sub-block atoms do not span the pairing factor"};
                }
            }
        }
        if (!first_failure)
            first_failure = failure;
        if (k + 1 >= rest.min_size() || k + 1 > r || k + 1 > rest.total())
            return *first_failure;
        sub_rank = k + 1;
    }

    // pairs (group, m) ranked by their weight in O; at most r atoms exist
    struct Candidate
    {
        double energy;
        FrequencyTuple tuple;
    };
    std::vector<Candidate> found;
    for (const auto& group : members)
    {
        RealVector energy = RealVector::Zero(O.rows());
        for (std::size_t j : group)
            energy += O.col(static_cast<Index>(j)).cwiseAbs2();
        const double peak = energy.maxCoeff();
        const double f1 = mean_frequency(pencil.frequencies, group);
        for (Index m = 0; m < O.rows(); ++m)
        {
            if (std::sqrt(energy(m)) <= options.pairing_tol * std::sqrt(peak))
                continue;
            std::vector<double> coords{f1};
            const auto& tail = rest_tuples[static_cast<std::size_t>(m)].coords();
            coords.insert(coords.end(), tail.begin(), tail.end());
            found.push_back({energy(m), FrequencyTuple(std::move(coords))});
        }
    }
    if (found.size() > static_cast<std::size_t>(r))
    {
        std::stable_sort(found.begin(), found.end(),
                         [](const Candidate& a, const Candidate& b) { return a.energy > b.energy; });
        found.resize(static_cast<std::size_t>(r));
    }
    std::vector<FrequencyTuple> out;
    for (auto& c : found)
        out.push_back(std::move(c.tuple));
    return out;
}

std::vector<FrequencyTuple> dedup(std::vector<FrequencyTuple> tuples, double tol)
{
    std::vector<FrequencyTuple> out;
    for (auto& f : tuples)
    {
        bool seen = false;
        for (const auto& g : out)
            if (f.distance(g) < tol)
            {
                seen = true;
                break;
            }
        if (!seen)
            out.push_back(std::move(f));
    }
    return out;
}

// Least-squares powers on fixed tuples, then the acceptance checks shared by
// both algorithms.
VandermondeDecomposition finish(std::vector<FrequencyTuple> tuples, const ComplexMatrix& T, const Shape& shape,
                                const MappOptions& options)
{
    std::sort(tuples.begin(), tuples.end());
    VandermondeDecomposition out;
    out.order = static_cast<int>(tuples.size());
    const PowerFit fit = fit_powers(tuples, T, shape);
    out.model.freqs = std::move(tuples);
    out.model.powers = fit.powers;
    out.residual = fit.residual;
    if (fit.ill_posed)
    {
        out.status = DecompStatus::ill_posed;
        out.diagnostic = "atom Gram matrix is numerically singular";
        return out;
    }
    for (double p : fit.powers)
        if (!(p > 0.0))
        {
            out.status = DecompStatus::nonpositive_power;
            out.diagnostic = "least-squares power is not positive";
            return out;
        }
    if (!(fit.residual <= options.residual_tol))
    {
        std::ostringstream os;
        os << "relative reconstruction error " << fit.residual << " above " << options.residual_tol;
        out.status = DecompStatus::residual_too_large;
        out.diagnostic = os.str();
    }
    return out;
}

VandermondeDecomposition failed(DecompStatus status, std::string diagnostic, int order = 0)
{
    VandermondeDecomposition out;
    out.status = status;
    out.diagnostic = std::move(diagnostic);
    out.order = order;
    return out;
}

VandermondeDecomposition recursive_impl(const ComplexMatrix& T, const Shape& shape, std::optional<int> rank,
                                        const MappOptions& options)
{
    EigenFactor ef;
    try
    {
        ef = factor_impl(T, shape, rank, options);
    }
    catch (const MltError& e)
    {
        if (T.rows() != shape.total() || T.cols() != shape.total())
            throw;
        return failed(DecompStatus::not_psd, e.what());
    }
    const int r = ef.fac.rank.rank;
    if (r == 0)
        return finish({}, T, shape, options);
    if (r >= shape.min_size())
    {
        std::ostringstream os;
        os << "rank " << r << " is not below min level size " << shape.min_size();
        return failed(DecompStatus::rank_precondition, os.str(), r);
    }

    auto tuples = recursive_tuples(ef.fac.Y, shape, options);
    if (std::holds_alternative<Failure>(tuples))
    {
        auto& f = std::get<Failure>(tuples);
        return failed(f.status, f.diagnostic, r);
    }
    auto found = dedup(std::get<std::vector<FrequencyTuple>>(std::move(tuples)), options.dedup_tol);
    const std::size_t count = found.size();
    VandermondeDecomposition out = finish(std::move(found), T, shape, options);
    if (count != static_cast<std::size_t>(r) && out.ok())
    {
        std::ostringstream os;
        os << "pairing produced " << count << " atoms for rank " << r;
        out.status = DecompStatus::ambiguous_pairing;
        out.diagnostic = os.str();
    }
    return out;
}

} // namespace

Factorization low_rank_factor(const ComplexMatrix& T, const Shape& shape, std::optional<int> rank,
                              const MappOptions& options)
{
    return factor_impl(T, shape, rank, options).fac;
}

PencilResult pencil_eigen(const Factorization& fac, int dim, const MappOptions& options)
{
    const Shape& shape = fac.shape;
    if (dim < 0 || dim >= shape.dims())
        throw MltError("pencil_eigen: dimension out of range");
    const Index N = shape.total();
    if (fac.Y.rows() != N)
        throw MltError("pencil_eigen: factor does not match shape");

    PencilResult out;
    const Index r = fac.Y.cols();
    if (r == 0)
        return out;

    const Index block = N / shape.size(dim);
    if (shape.size(dim) < 2 || r > N - block)
    {
        out.degenerate = true;
        out.condition = std::numeric_limits<double>::infinity();
        return out;
    }

    ComplexMatrix Y = dim == 0 ? fac.Y : permute_rows(fac.Y, dimension_permutation(shape, dim));
    const Index rows = N - block;
    const ComplexMatrix YU = Y.topRows(rows);
    const ComplexMatrix YL = Y.bottomRows(rows);

    Eigen::JacobiSVD<ComplexMatrix> svd(YU, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    out.ill_conditioned = out.condition * out.condition > 1e10;

    ComplexMatrix U;
    if (out.condition <= options.degenerate_cond)
    {
        // U = Y_U^+ Y_L solves the pencil (Y_U^H Y_L, Y_U^H Y_U)
        U = svd.matrixV() * sv.cwiseInverse().cast<Complex>().asDiagonal() * (svd.matrixU().adjoint() * YL);
    }
    else
    {
        // Rank-deficient Y_U: Y_U U = Y_L fixes U only on the row space of
        // Y_U. A unitary solution exists iff B = S_k^{-1} W_k^H Y_L has
        // orthonormal rows; complete it on the null space.
        Index k = 0;
        while (k < sv.size() && sv(k) > smax / options.degenerate_cond)
            ++k;
        if (k == 0)
        {
            out.degenerate = true;
            return out;
        }
        const ComplexMatrix B = sv.head(k).cwiseInverse().cast<Complex>().asDiagonal() *
                                (svd.matrixU().leftCols(k).adjoint() * YL);
        if ((B * B.adjoint() - ComplexMatrix::Identity(k, k)).norm() > options.unitary_tol)
        {
            out.degenerate = true;
            return out;
        }
        Eigen::HouseholderQR<ComplexMatrix> qr(B.adjoint());
        const ComplexMatrix Q = qr.householderQ() * ComplexMatrix::Identity(r, r);
        U = svd.matrixV().leftCols(k) * B + svd.matrixV().rightCols(r - k) * Q.rightCols(r - k).adjoint();
        out.completed = true;
    }

    // U is unitary when a decomposition exists, so its Schur form is
    // diagonal and the Schur vectors are orthonormal eigenvectors, also for
    // repeated eigenvalues.
    Eigen::ComplexSchur<ComplexMatrix> schur(U);
    out.eigenvalues = schur.matrixT().diagonal();
    out.eigenvectors = schur.matrixU();
    out.frequencies.resize(static_cast<std::size_t>(r));
    for (Index j = 0; j < r; ++j)
        out.frequencies[j] = wrap_unit(std::arg(out.eigenvalues(j)) / kTwoPi);
    return out;
}

double pairing_score(const ComplexMatrix& eigbasis, const Shape& shape, const FrequencyTuple& f)
{
    if (eigbasis.rows() != shape.total())
        throw MltError("pairing_score: basis does not match shape");
    const ComplexVector a = md_steering_vector(shape, f);
    return (eigbasis.adjoint() * a).squaredNorm();
}

PowerFit fit_powers(std::span<const FrequencyTuple> freqs, const ComplexMatrix& T, const Shape& shape)
{
    const Index N = shape.total();
    if (T.rows() != N || T.cols() != N)
        throw MltError("fit_powers: matrix size does not match shape");
    const Index r = static_cast<Index>(freqs.size());
    PowerFit out;
    out.powers.assign(static_cast<std::size_t>(r), 0.0);
    if (r == 0)
    {
        out.residual = T.norm() > 0.0 ? 1.0 : 0.0;
        return out;
    }

    const ComplexMatrix A = steering_matrix(shape, freqs);
    // columns vec(a_j a_j^H), real and imaginary parts stacked
    RealMatrix B(2 * N * N, r);
    RealVector rhs(2 * N * N);
    for (Index j = 0; j < r; ++j)
    {
        Index row = 0;
        for (Index c = 0; c < N; ++c)
            for (Index i = 0; i < N; ++i, ++row)
            {
                const Complex v = A(i, j) * std::conj(A(c, j));
                B(row, j) = v.real();
                B(row + N * N, j) = v.imag();
            }
    }
    {
        Index row = 0;
        for (Index c = 0; c < N; ++c)
            for (Index i = 0; i < N; ++i, ++row)
            {
                rhs(row) = T(i, c).real();
                rhs(row + N * N) = T(i, c).imag();
            }
    }

    Eigen::ColPivHouseholderQR<RealMatrix> qr(B);
    qr.setThreshold(1e-10);
    if (qr.rank() < r)
    {
        out.ill_posed = true;
        out.residual = std::numeric_limits<double>::infinity();
        return out;
    }
    const RealVector p = qr.solve(rhs);
    for (Index j = 0; j < r; ++j)
        out.powers[j] = p(j);
    const ComplexMatrix approx = A * p.cast<Complex>().asDiagonal() * A.adjoint();
    out.residual = relative_residual(T, approx);
    return out;
}

VandermondeDecomposition mapp_recursive(const ComplexMatrix& T, const Shape& shape, const MappOptions& options)
{
    return recursive_impl(T, shape, std::nullopt, options);
}

SearchResult mapp_search(const ComplexMatrix& T, const Shape& shape, int rank, const MappOptions& options)
{
    const Index N = shape.total();
    if (rank < 0 || rank > N)
        throw MltError("mapp_search: rank must lie in [0, N]");

    SearchResult out;
    EigenFactor ef;
    try
    {
        ef = factor_impl(T, shape, rank, options);
    }
    catch (const MltError& e)
    {
        if (T.rows() != N || T.cols() != N)
            throw;
        out.status = DecompStatus::not_psd;
        out.diagnostic = e.what();
        return out;
    }
    if (rank == 0)
    {
        out.decomposition = finish({}, T, shape, options);
        return out;
    }

    const int d = shape.dims();
    std::vector<std::vector<double>> lists;
    for (int l = 0; l < d; ++l)
    {
        const PencilResult pencil = pencil_eigen(ef.fac, l, options);
        if (pencil.degenerate)
        {
            std::ostringstream os;
            os << "pencil degenerate along dimension " << (l + 1) << " for rank " << rank;
            out.status = DecompStatus::pencil_degenerate;
            out.diagnostic = os.str();
            return out;
        }
        std::vector<double> uniq;
        for (double f : pencil.frequencies)
        {
            bool seen = false;
            for (double g : uniq)
                seen = seen || wrap_distance(f, g) < options.dedup_tol;
            if (!seen)
                uniq.push_back(f);
        }
        lists.push_back(std::move(uniq));
    }

    // all combinations of the per-dimension frequencies; per-dimension
    // projections are precomputed so a score costs O(N r)
    std::vector<std::vector<ComplexVector>> atoms(static_cast<std::size_t>(d));
    for (int l = 0; l < d; ++l)
        for (double f : lists[l])
            atoms[l].push_back(steering_vector(shape.size(l), f));

    const ComplexMatrix basis_h = ef.basis.adjoint();
    std::vector<FrequencyTuple> kept;
    std::vector<double> scores;
    std::vector<std::size_t> counter(static_cast<std::size_t>(d), 0);
    while (true)
    {
        ComplexVector a = atoms[0][counter[0]];
        for (int l = 1; l < d; ++l)
        {
            const ComplexVector& b = atoms[l][counter[l]];
            ComplexVector next(a.size() * b.size());
            for (Index i = 0; i < a.size(); ++i)
                next.segment(i * b.size(), b.size()) = a(i) * b;
            a = std::move(next);
        }
        const double g = (basis_h * a).squaredNorm();
        if (g >= 1.0 - options.score_tol)
        {
            std::vector<double> coords(static_cast<std::size_t>(d));
            for (int l = 0; l < d; ++l)
                coords[l] = lists[l][counter[l]];
            kept.emplace_back(std::move(coords));
            scores.push_back(g);
        }
        int l = d - 1;
        while (l >= 0 && ++counter[l] == lists[l].size())
            counter[l--] = 0;
        if (l < 0)
            break;
    }
    // best scores first, so dedup keeps the stronger of two merged tuples
    std::vector<std::size_t> order(kept.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<FrequencyTuple> ranked;
    for (std::size_t i : order)
        ranked.push_back(kept[i]);
    kept = dedup(std::move(ranked), options.dedup_tol);
    out.candidates = static_cast<int>(kept.size());

    // A near-coincidence of two atoms in one coordinate puts a cross tuple
    // within score_tol of 1. Try the r best; the residual check decides.
    if (kept.size() > static_cast<std::size_t>(rank))
    {
        std::vector<FrequencyTuple> top(kept.begin(), kept.begin() + rank);
        VandermondeDecomposition dec = finish(std::move(top), T, shape, options);
        if (dec.ok())
        {
            out.status = DecompStatus::ok;
            out.decomposition = std::move(dec);
            return out;
        }
    }
    if (kept.size() != static_cast<std::size_t>(rank))
    {
        std::ostringstream os;
        os << kept.size() << " candidate tuples reach the maximal pairing score, expected " << rank;
        out.status = DecompStatus::ambiguous_pairing;
        out.diagnostic = os.str();
        return out;
    }

    VandermondeDecomposition dec = finish(std::move(kept), T, shape, options);
    out.status = dec.status;
    out.diagnostic = dec.diagnostic;
    if (dec.ok())
        out.decomposition = std::move(dec);
    return out;
}

VandermondeDecomposition vandermonde_decompose(const ComplexMatrix& T, const Shape& shape, MappMode mode,
                                               std::optional<int> rank, const MappOptions& options)
{
    if (mode == MappMode::recursive)
        return recursive_impl(T, shape, rank, options);

    int r = 0;
    if (rank)
        r = *rank;
    else
    {
        try
        {
            r = low_rank_factor(T, shape, std::nullopt, options).rank.rank;
        }
        catch (const MltError& e)
        {
            if (T.rows() != shape.total() || T.cols() != shape.total())
                throw;
            return failed(DecompStatus::not_psd, e.what());
        }
    }
    if (mode == MappMode::automatic && r < shape.min_size())
    {
        VandermondeDecomposition rec = recursive_impl(T, shape, r, options);
        if (rec.ok())
            return rec;
    }

    SearchResult found = mapp_search(T, shape, r, options);
    if (found.decomposition)
        return *found.decomposition;
    return failed(found.status, found.diagnostic, r);
}

} // namespace mltvd
