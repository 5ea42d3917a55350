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

#include "mltvd/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace mltvd
{

void ObservationModel::validate() const
{
    if (!(eta2 >= 0.0))
        throw MltError("ObservationModel: eta2 must be nonnegative");
    const Index N = shape.total();
    if (sensing)
    {
        if (sensing->cols() != N || sensing->rows() != z.size())
            throw MltError("ObservationModel: sensing matrix must be M x N");
        return;
    }
    if (static_cast<Index>(samples.size()) != z.size())
        throw MltError("ObservationModel: one measurement per sample is required");
    if (z.size() > N)
        throw MltError("ObservationModel: more samples than grid points");
    std::vector<Index> seen = samples;
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i)
    {
        if (seen[i] < 0 || seen[i] >= N)
            throw MltError("ObservationModel: sample index out of range");
        if (i > 0 && seen[i] == seen[i - 1])
            throw MltError("ObservationModel: repeated sample index");
    }
}

ObservationModel ObservationModel::full(const Shape& shape, const ComplexVector& y, double eta2)
{
    std::vector<Index> all(static_cast<std::size_t>(shape.total()));
    std::iota(all.begin(), all.end(), Index{0});
    return selection(shape, std::move(all), y, eta2);
}

ObservationModel ObservationModel::selection(const Shape& shape, std::vector<Index> samples, const ComplexVector& y,
                                             double eta2)
{
    if (y.size() != shape.total())
        throw MltError("ObservationModel: signal length does not match shape");
    ObservationModel obs;
    obs.shape = shape;
    obs.eta2 = eta2;
    obs.z.resize(static_cast<Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        if (samples[i] < 0 || samples[i] >= y.size())
            throw MltError("ObservationModel: sample index out of range");
        obs.z(static_cast<Index>(i)) = y(samples[i]);
    }
    obs.samples = std::move(samples);
    obs.validate();
    return obs;
}

Lift lift_shape(const Shape& shape, int rbar)
{
    if (rbar < 1)
        throw MltError("lift_shape: rbar must be positive");
    std::vector<int> sizes = shape.sizes();
    for (int& n : sizes)
        n = std::max(n, rbar);
    Lift out{Shape(sizes), {}};
    out.embedding.resize(static_cast<std::size_t>(shape.total()));
    for (Index i = 0; i < shape.total(); ++i)
        out.embedding[i] = out.lifted.flatten(shape.unflatten(i));
    return out;
}

LiftedProblem LiftedProblem::make(const Shape& base, int rbar)
{
    return LiftedProblem{base, lift_shape(base, rbar), ComplexMatrix()};
}

ComplexMatrix SdpSolution::block() const
{
    const Index n = y.size();
    ComplexMatrix X(n + 1, n + 1);
    X(0, 0) = t;
    X.col(0).tail(n) = y;
    X.row(0).tail(n) = y.adjoint();
    X.bottomRightCorner(n, n) = T();
    return X;
}

namespace
{

// Euclidean projection onto {x : ||L x_P - z||^2 <= eta2} (equality when
// eta2 = 0), where x_P are the entries of x at `positions`.
class DataConstraint
{
public:
    // row selection: L x_P = x at positions
    DataConstraint(std::vector<Index> positions, ComplexVector z, double eta2)
        : eta2_(eta2), z_(std::move(z)), positions_(std::move(positions))
    {
    }

    DataConstraint(const ComplexMatrix& L, std::vector<Index> positions, ComplexVector z, double eta2)
        : eta2_(eta2), z_(std::move(z)), positions_(std::move(positions)), dense_(true)
    {
        Eigen::JacobiSVD<ComplexMatrix> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const RealVector& s = svd.singularValues();
        Index k = 0;
        while (k < s.size() && s(k) > 1e-12 * s(0))
            ++k;
        s_ = s.head(k);
        Q_ = svd.matrixV().leftCols(k);
        beta_ = svd.matrixU().leftCols(k).adjoint() * z_;
        rest2_ = (z_ - svd.matrixU().leftCols(k) * beta_).squaredNorm();
    }

    void apply(ComplexVector& y) const
    {
        if (!dense_)
        {
            if (eta2_ == 0.0)
            {
                for (std::size_t i = 0; i < positions_.size(); ++i)
                    y(positions_[i]) = z_(static_cast<Index>(i));
                return;
            }
            double dist2 = 0.0;
            for (std::size_t i = 0; i < positions_.size(); ++i)
                dist2 += std::norm(y(positions_[i]) - z_(static_cast<Index>(i)));
            if (dist2 <= eta2_)
                return;
            const double scale = std::sqrt(eta2_ / dist2);
            for (std::size_t i = 0; i < positions_.size(); ++i)
            {
                const Complex zi = z_(static_cast<Index>(i));
                y(positions_[i]) = zi + scale * (y(positions_[i]) - zi);
            }
            return;
        }

        ComplexVector x(static_cast<Index>(positions_.size()));
        for (std::size_t i = 0; i < positions_.size(); ++i)
            x(static_cast<Index>(i)) = y(positions_[i]);
        const ComplexVector alpha = Q_.adjoint() * x;
        ComplexVector target = beta_.cwiseQuotient(s_.cast<Complex>());
        if (eta2_ > 0.0 && rest2_ < eta2_)
        {
            // x(mu) = argmin ||x - a||^2 + mu ||L x - z||^2, bisection on mu
            auto misfit = [&](double mu) {
                double acc = rest2_;
                for (Index i = 0; i < s_.size(); ++i)
                    acc += std::norm((s_(i) * alpha(i) - beta_(i)) / (1.0 + mu * s_(i) * s_(i)));
                return acc;
            };
            if (misfit(0.0) <= eta2_)
                return;
            double lo = 0.0, hi = 1.0;
            while (misfit(hi) > eta2_ && hi < 1e300)
                hi *= 4.0;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it)
            {
                const double mid = 0.5 * (lo + hi);
                (misfit(mid) > eta2_ ? lo : hi) = mid;
            }
            for (Index i = 0; i < s_.size(); ++i)
                target(i) = (alpha(i) + hi * s_(i) * beta_(i)) / (1.0 + hi * s_(i) * s_(i));
        }
        x += Q_ * (target - alpha);
        for (std::size_t i = 0; i < positions_.size(); ++i)
            y(positions_[i]) = x(static_cast<Index>(i));
    }

private:
    double eta2_;
    ComplexVector z_;
    std::vector<Index> positions_;
    bool dense_ = false;
    RealVector s_;
    ComplexMatrix Q_;
    ComplexVector beta_;
    double rest2_ = 0.0;
};

// Projection onto the PSD cone, from the positive part of the spectrum.
void project_psd(const ComplexMatrix& A, ComplexMatrix& out, Eigen::SelfAdjointEigenSolver<ComplexMatrix>& es)
{
    es.compute(A);
    const RealVector& ev = es.eigenvalues();
    Index first = 0;
    while (first < ev.size() && ev(first) <= 0.0)
        ++first;
    const Index k = ev.size() - first;
    if (k == 0)
    {
        out.setZero(A.rows(), A.cols());
        return;
    }
    const ComplexMatrix scaled = es.eigenvectors().rightCols(k) * ev.tail(k).cwiseSqrt().cast<Complex>().asDiagonal();
    out.noalias() = scaled * scaled.adjoint();
}

// Real coordinates of a Hermitian lag sequence: Re u_0, and (Re u_c, Im u_c)
// for each lag c with c < mirror(c). The basis matrix E_b has the unit
// coefficient on class c and its conjugate on the mirror class.
struct HermitianBasis
{
    struct Param
    {
        Index cls;
        bool imag;
    };
    std::vector<Param> params;

    explicit HermitianBasis(const ToeplitzClasses& classes)
    {
        for (Index c = 0; c < classes.classes(); ++c)
        {
            const Index m = classes.mirror(c);
            if (c == m)
                params.push_back({c, false});
            else if (c < m)
            {
                params.push_back({c, false});
                params.push_back({c, true});
            }
        }
    }

    Index size() const noexcept { return static_cast<Index>(params.size()); }

    // Re tr(E_b B) for every b, from the class sums s of B.
    RealVector pair(const ToeplitzClasses& classes, const std::vector<Complex>& s) const
    {
        RealVector out(size());
        for (Index b = 0; b < size(); ++b)
        {
            const Index c = params[b].cls;
            const Index m = classes.mirror(c);
            if (c == m)
                out(b) = s[c].real();
            else if (!params[b].imag)
                out(b) = s[c].real() + s[m].real();
            else
                out(b) = s[c].imag() - s[m].imag();
        }
        return out;
    }

    void fill(const ToeplitzClasses& classes, const RealVector& theta, std::vector<Complex>& u) const
    {
        for (Index b = 0; b < size(); ++b)
        {
            const Index c = params[b].cls;
            const Index m = classes.mirror(c);
            if (c == m)
                u[c] = theta(b);
            else if (!params[b].imag)
            {
                u[c].real(theta(b));
                u[m].real(theta(b));
            }
            else
            {
                u[c].imag(theta(b));
                u[m].imag(-theta(b));
            }
        }
    }
};

} // namespace

SdpSolution solve_weighted_trace(const ObservationModel& obs, const LiftedProblem& problem, const AdmmConfig& config,
                                 const SdpSolution* warm)
{
    obs.validate();
    if (!(obs.shape == problem.base))
        throw MltError("solve_weighted_trace: observation and problem shapes differ");
    if (!(config.relaxation > 0.0 && config.relaxation < 2.0))
        throw MltError("solve_weighted_trace: relaxation must lie in (0, 2)");
    const Shape& lifted = problem.lift.lifted;
    const Index n = lifted.total();
    const Index dim = n + 1;
    const bool weighted = problem.weight.size() != 0;
    if (weighted && (problem.weight.rows() != n || problem.weight.cols() != n))
        throw MltError("solve_weighted_trace: weight must be N' x N'");

    const ToeplitzClasses classes(lifted);
    const HermitianBasis basis(classes);
    const auto& counts = classes.counts();
    const Index P = basis.size();

    // The split is X~ = D X D = Z with D = diag(1, S), S = W^{1/2}: the cost
    // becomes t + tr(T~), and the PSD cone is invariant under congruence.
    ComplexMatrix W, S, Sinv;
    RealMatrix G(P, P);
    RealVector cost(P);
    if (!weighted)
    {
        G.setZero();
        cost.setZero();
        for (Index b = 0; b < P; ++b)
        {
            const Index c = basis.params[b].cls;
            const bool self = classes.mirror(c) == c;
            G(b, b) = static_cast<double>(self ? counts[c] : 2 * counts[c]);
            if (self)
                cost(b) = static_cast<double>(n);
        }
    }
    else
    {
        W = 0.5 * (problem.weight + problem.weight.adjoint());
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(W);
        const RealVector ev = es.eigenvalues();
        if (!(ev(0) > 0.0))
            throw MltError("solve_weighted_trace: weight must be positive definite");
        const ComplexMatrix& V = es.eigenvectors();
        S = V * ev.cwiseSqrt().cast<Complex>().asDiagonal() * V.adjoint();
        Sinv = V * ev.cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() * V.adjoint();
        cost = basis.pair(classes, classes.class_sums(W));

        // G(a, b) = Re tr(E_a W E_b W); per lag class c, F_c = W E_c W and
        // the mirror class gives F_c^H.
        std::vector<std::vector<std::pair<Index, Index>>> entries(static_cast<std::size_t>(classes.classes()));
        for (Index col = 0; col < n; ++col)
            for (Index row = 0; row < n; ++row)
                entries[classes.class_of(row, col)].emplace_back(row, col);
        ComplexMatrix F(n, n);
        for (Index b = 0; b < P; ++b)
        {
            if (basis.params[b].imag)
                continue; // handled with its real partner
            const Index c = basis.params[b].cls;
            F.setZero();
            for (const auto& [k, l] : entries[c])
                F.noalias() += W.col(k) * W.row(l);
            const Index m = classes.mirror(c);
            if (m == c)
            {
                G.col(b) = basis.pair(classes, classes.class_sums(F));
                continue;
            }
            const ComplexMatrix Fre = F + F.adjoint();
            const ComplexMatrix Fim = Complex(0.0, 1.0) * (F - F.adjoint());
            G.col(b) = basis.pair(classes, classes.class_sums(Fre));
            G.col(b + 1) = basis.pair(classes, classes.class_sums(Fim));
        }
        G = 0.5 * (G + G.transpose()).eval();
    }
    const Eigen::LLT<RealMatrix> gram(G);
    if (gram.info() != Eigen::Success)
        throw MltError("solve_weighted_trace: structured Gram matrix is not positive definite");

    // data constraint: on y directly, or on v = S y with L' = L S^{-1}
    std::vector<Index> sampled;
    for (Index s : obs.samples)
        sampled.push_back(problem.lift.embedding[static_cast<std::size_t>(s)]);
    std::optional<DataConstraint> data;
    if (!weighted)
    {
        if (obs.sensing)
            data.emplace(*obs.sensing, problem.lift.embedding, obs.z, obs.eta2);
        else
            data.emplace(sampled, obs.z, obs.eta2);
    }
    else
    {
        ComplexMatrix Lemb = ComplexMatrix::Zero(obs.measurements(), n);
        if (obs.sensing)
        {
            for (std::size_t i = 0; i < problem.lift.embedding.size(); ++i)
                Lemb.col(problem.lift.embedding[i]) = obs.sensing->col(static_cast<Index>(i));
        }
        else
        {
            for (std::size_t i = 0; i < sampled.size(); ++i)
                Lemb(static_cast<Index>(i), sampled[i]) = 1.0;
        }
        std::vector<Index> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), Index{0});
        data.emplace(Lemb * Sinv, std::move(all), obs.z, obs.eta2);
    }
    const bool exact_selection = !obs.sensing && obs.eta2 == 0.0;

    auto transformed = [&](double t, const ComplexVector& y, const std::vector<Complex>& u, ComplexMatrix& X) {
        const ComplexMatrix T = classes.expand(u);
        X(0, 0) = t;
        if (!weighted)
        {
            X.col(0).tail(n) = y;
            X.bottomRightCorner(n, n) = T;
        }
        else
        {
            X.col(0).tail(n) = S * y;
            X.bottomRightCorner(n, n) = S * T * S;
        }
        X.row(0).tail(n) = X.col(0).tail(n).adjoint();
    };

    SdpSolution sol;
    double rho = config.rho;
    ComplexMatrix Z = ComplexMatrix::Zero(dim, dim);
    ComplexMatrix U = ComplexMatrix::Zero(dim, dim);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(dim);
    if (warm && warm->y.size() == n && warm->U.rows() == dim && warm->u.box_size() == classes.classes())
    {
        ComplexMatrix X0(dim, dim);
        transformed(warm->t, warm->y, warm->u.values(), X0);
        project_psd(0.5 * (X0 + X0.adjoint()), Z, es);
        U = warm->U;
        rho = warm->stats.rho;
    }

    std::vector<Complex> u(static_cast<std::size_t>(classes.classes()), Complex(0.0, 0.0));
    ComplexVector y(n);
    double t = 0.0;
    ComplexMatrix X(dim, dim), Zprev(dim, dim), lower(n, n);
    RealVector theta(P);

    int it = 0;
    double primal = 0.0, dual = 0.0;
    while (it < config.max_iters)
    {
        ++it;
        // X-update: least-squares fit of the structured block to Z - U, shifted by the cost
        const ComplexMatrix M = Z - U;
        t = M(0, 0).real() - 1.0 / rho;
        y = 0.5 * (M.col(0).tail(n) + M.row(0).tail(n).adjoint());
        data->apply(y);
        if (weighted)
        {
            y = Sinv * y;
            if (exact_selection)
                for (std::size_t i = 0; i < sampled.size(); ++i)
                    y(sampled[i]) = obs.z(static_cast<Index>(i));
        }
        lower = M.bottomRightCorner(n, n);
        if (weighted)
            lower = S * lower * S;
        const RealVector h = basis.pair(classes, classes.class_sums(lower));
        theta = gram.solve(h - cost / rho);
        basis.fill(classes, theta, u);
        transformed(t, y, u, X);

        // Z-update and dual ascent, over-relaxed
        const ComplexMatrix Xh = config.relaxation * X + (1.0 - config.relaxation) * Z;
        Zprev.swap(Z);
        ComplexMatrix A = Xh + U;
        A = 0.5 * (A + A.adjoint()).eval();
        project_psd(A, Z, es);
        U += Xh - Z;

        const double xz = std::max(X.norm(), Z.norm());
        const double rnorm = (X - Z).norm();
        primal = xz > 0.0 ? rnorm / xz : rnorm;
        const double unorm = rho * U.norm();
        const double snorm = rho * (Z - Zprev).norm();
        dual = unorm > 0.0 ? snorm / unorm : snorm;
        if (primal < config.tol && dual < config.tol)
        {
            sol.stats.converged = true;
            break;
        }
        if (config.balance_ratio > 0.0 && it % std::max(1, config.balance_every) == 0)
        {
            if (primal > config.balance_ratio * dual)
            {
                rho *= 2.0;
                U /= 2.0;
            }
            else if (dual > config.balance_ratio * primal)
            {
                rho /= 2.0;
                U *= 2.0;
            }
        }
    }

    sol.t = t;
    sol.u = MltSequence(lifted);
    sol.u.values() = u;
    sol.y = y;
    sol.objective = t + theta.dot(cost);
    sol.stats.iterations = it;
    sol.stats.primal_residual = primal;
    sol.stats.dual_residual = dual;
    sol.stats.rho = rho;
    sol.Z = std::move(Z);
    sol.U = std::move(U);
    return sol;
}

} // namespace mltvd
