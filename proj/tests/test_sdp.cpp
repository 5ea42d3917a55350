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


#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "mltvd/superres.hpp"
#include "test_util.hpp"

using namespace mltvd;

namespace
{

double min_eig(const ComplexMatrix& X)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (X + X.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

void check_block_feasible(const SdpSolution& sol)
{
    const double scale = 1.0 + sol.t + sol.T().trace().real();
    CHECK(min_eig(sol.block()) >= -1e-7 * scale);
}

ComplexVector signal(const Shape& shape, const std::vector<FrequencyTuple>& freqs, const std::vector<Complex>& c)
{
    ComplexVector y = ComplexVector::Zero(shape.total());
    for (std::size_t j = 0; j < freqs.size(); ++j)
        y += c[j] * md_steering_vector(shape, freqs[j]);
    return y;
}

double sampled_misfit2(const ObservationModel& obs, const SdpSolution& sol, const LiftedProblem& problem)
{
    const ComplexVector yb = base_signal(sol, problem);
    if (obs.sensing)
        return (obs.z - *obs.sensing * yb).squaredNorm();
    double acc = 0.0;
    for (std::size_t i = 0; i < obs.samples.size(); ++i)
        acc += std::norm(obs.z(static_cast<Index>(i)) - yb(obs.samples[i]));
    return acc;
}

} // namespace

TEST_CASE("lift_shape examples")
{
    SUBCASE("(10,10), rbar 12")
    {
        const Lift l = lift_shape(Shape{10, 10}, 12);
        CHECK(l.lifted == Shape{12, 12});
        CHECK(l.embedding.size() == 100);
    }
    SUBCASE("no lift keeps the identity embedding")
    {
        for (int rbar : {1, 4, 8})
        {
            const Lift l = lift_shape(Shape{8, 8}, rbar);
            CHECK(l.lifted == Shape{8, 8});
            for (Index i = 0; i < 64; ++i)
                CHECK(l.embedding[static_cast<std::size_t>(i)] == i);
        }
    }
    SUBCASE("(4,6), rbar 5")
    {
        const Lift l = lift_shape(Shape{4, 6}, 5);
        CHECK(l.lifted == Shape{5, 6});
        // rows k1 = 0..3 of each 6-block, in order
        std::vector<Index> expect;
        for (Index k1 = 0; k1 < 4; ++k1)
            for (Index k2 = 0; k2 < 6; ++k2)
                expect.push_back(6 * k1 + k2);
        CHECK(l.embedding == expect);
    }
    SUBCASE("embedded atoms agree with base atoms up to scale")
    {
        const Shape base{3, 4};
        const Lift l = lift_shape(base, 6);
        const FrequencyTuple f{0.21, 0.77};
        const ComplexVector a = md_steering_vector(base, f);
        const ComplexVector al = md_steering_vector(l.lifted, f);
        const double s = std::sqrt(double(l.lifted.total()) / double(base.total()));
        for (Index i = 0; i < base.total(); ++i)
            CHECK(std::abs(a(i) - s * al(l.embedding[static_cast<std::size_t>(i)])) < 1e-14);
    }
    CHECK_THROWS_AS(lift_shape(Shape{4}, 0), MltError);
}

TEST_CASE("noise_bound examples")
{
    CHECK(noise_bound(100, 0.01) == doctest::Approx(1.2).epsilon(1e-14));
    CHECK(noise_bound(0, 3.0) == 0.0);
    CHECK(noise_bound(4, 1.0) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK_THROWS_AS(noise_bound(4, -1.0), MltError);
}

TEST_CASE("ObservationModel validation")
{
    const Shape s{3, 3};
    const ComplexVector y = ComplexVector::Ones(9);
    CHECK_THROWS_AS(ObservationModel::selection(s, {0, 0}, y), MltError);
    CHECK_THROWS_AS(ObservationModel::selection(s, {9}, y), MltError);
    CHECK_THROWS_AS(ObservationModel::full(s, y, -1.0), MltError);
    const ComplexVector short_y = ComplexVector::Ones(4);
    CHECK_THROWS_AS(ObservationModel::full(s, short_y), MltError);
    ObservationModel dense;
    dense.shape = s;
    dense.sensing = ComplexMatrix::Ones(2, 8);
    dense.z = ComplexVector::Ones(2);
    CHECK_THROWS_AS(dense.validate(), MltError);
}

TEST_CASE("solve_weighted_trace on zero data")
{
    const Shape s{4, 4};
    const auto obs = ObservationModel::full(s, ComplexVector::Zero(16));
    const auto sol = solve_weighted_trace(obs, LiftedProblem::make(s, 4));
    CHECK(sol.stats.converged);
    CHECK(std::abs(sol.t) < 1e-12);
    CHECK(sol.y.norm() < 1e-12);
    CHECK(sol.T().norm() < 1e-12);
    CHECK(std::abs(sol.objective) < 1e-12);
}

TEST_CASE("single atom: objective is twice the amplitude")
{
    // Any feasible block satisfies t + tr T' >= 2 Re(v^H y) for v = c a(f) / |c|,
    // since max_g |a(g)^H v| = 1; (|c|, |c| a a^H, y) attains 2|c|.
    std::mt19937_64 rng(7);
    const Shape s{4, 4};
    for (int trial = 0; trial < 5; ++trial)
    {
        const auto freqs = test::separated_freqs(2, 1, 0.0, rng);
        const Complex c = 3.0 * test::complex_normal(rng);
        const ComplexVector y = c * md_steering_vector(s, freqs[0]);
        const auto obs = ObservationModel::full(s, y);
        const auto problem = LiftedProblem::make(s, 4);
        const AdmmConfig cfg;
        const auto sol = conv_relax(obs, problem, cfg);
        REQUIRE(sol.stats.converged);
        CHECK(sol.stats.primal_residual < cfg.tol);
        CHECK(sol.stats.dual_residual < cfg.tol);
        CHECK(std::abs(sol.objective - 2.0 * std::abs(c)) <= 1e-4 * 2.0 * std::abs(c));
        check_block_feasible(sol);

        const auto ret = retrieve_and_check(sol, problem);
        CHECK(ret.cert == Cert::guaranteed);
        REQUIRE(ret.model.order() == 1);
        CHECK(ret.model.freqs[0].distance(freqs[0]) < 1e-6);
        CHECK(std::abs(ret.model.amplitudes[0] - c) < 1e-5 * std::abs(c));
    }
}

TEST_CASE("convex relaxation recovers well-separated sparse signals")
{
    std::mt19937_64 rng(11);
    const Shape s{8, 8};
    const auto freqs = test::separated_freqs(2, 4, 2.0 / 8.0, rng);
    std::vector<Complex> c;
    for (int j = 0; j < 4; ++j)
        c.push_back(test::complex_normal(rng));
    const ComplexVector y = signal(s, freqs, c);
    const auto obs = ObservationModel::selection(s, test::random_samples(64, 32, rng), y);
    const auto problem = LiftedProblem::make(s, 8);
    const auto sol = conv_relax(obs, problem);
    CHECK(sol.stats.converged);
    CHECK((base_signal(sol, problem) - y).norm() < 1e-6 * y.norm());
    check_block_feasible(sol);
    CHECK(sampled_misfit2(obs, sol, problem) < 1e-14);

    // exactness transfer: a low-rank solution reproduces the data
    const auto ret = retrieve_and_check(sol, problem);
    REQUIRE(ret.rank < 8);
    CHECK(ret.cert == Cert::guaranteed);
    CHECK(test::set_error(ret.model.freqs, freqs) < 1e-6);
    const ComplexVector fit = std::sqrt(64.0 / 64.0) * steering_matrix(s, ret.model.freqs) *
                              Eigen::Map<const ComplexVector>(ret.model.amplitudes.data(), ret.model.order());
    for (std::size_t i = 0; i < obs.samples.size(); ++i)
        CHECK(std::abs(fit(obs.samples[i]) - obs.z(static_cast<Index>(i))) < 1e-7 * y.norm());
}

TEST_CASE("objective is a lower bound on twice the atomic norm")
{
    std::mt19937_64 rng(3);
    const Shape s{5, 5};
    for (int trial = 0; trial < 3; ++trial)
    {
        const int r = 3 + trial;
        const auto freqs = test::separated_freqs(2, r, 0.0, rng);
        std::vector<Complex> c;
        double l1 = 0.0;
        for (int j = 0; j < r; ++j)
        {
            c.push_back(test::complex_normal(rng));
            l1 += std::abs(c.back());
        }
        const auto obs = ObservationModel::selection(s, test::random_samples(25, 15, rng), signal(s, freqs, c));
        const auto sol = conv_relax(obs, LiftedProblem::make(s, 5));
        CHECK(sol.stats.converged);
        CHECK(sol.objective <= 2.0 * l1 * (1.0 + 1e-6));
        check_block_feasible(sol);
    }
}

TEST_CASE("noisy ball constraint")
{
    std::mt19937_64 rng(5);
    const Shape s{5, 5};
    const auto freqs = test::separated_freqs(2, 2, 0.3, rng);
    const std::vector<Complex> c{Complex(1.0, 0.5), Complex(-0.7, 0.2)};
    ComplexVector y = signal(s, freqs, c);
    const double sigma2 = 0.1 / 25.0;
    for (Index i = 0; i < y.size(); ++i)
        y(i) += std::sqrt(sigma2) * test::complex_normal(rng);
    const double eta2 = noise_bound(25, sigma2);
    const auto obs = ObservationModel::full(s, y, eta2);
    const auto problem = LiftedProblem::make(s, 5);
    const auto sol = conv_relax(obs, problem);
    CHECK(sol.stats.converged);
    CHECK(sampled_misfit2(obs, sol, problem) <= eta2 * (1.0 + 1e-7));
    check_block_feasible(sol);
    // the ball lets the solver shrink the signal: cheaper than fitting the noise exactly
    const auto exact = conv_relax(ObservationModel::full(s, y), problem);
    CHECK(sol.objective < exact.objective);
}

TEST_CASE("dense sensing matrix")
{
    std::mt19937_64 rng(9);
    const Shape s{4, 4};
    const auto freqs = test::separated_freqs(2, 1, 0.0, rng);
    const Complex c(0.8, -1.1);
    const ComplexVector y = c * md_steering_vector(s, freqs[0]);
    ObservationModel obs;
    obs.shape = s;
    ComplexMatrix L(10, 16);
    for (Index i = 0; i < L.rows(); ++i)
        for (Index j = 0; j < L.cols(); ++j)
            L(i, j) = test::complex_normal(rng);
    obs.sensing = L;
    obs.z = L * y;
    const auto problem = LiftedProblem::make(s, 4);
    SUBCASE("equality")
    {
        const auto sol = conv_relax(obs, problem);
        CHECK(sol.stats.converged);
        CHECK(sampled_misfit2(obs, sol, problem) < 1e-14 * obs.z.squaredNorm());
        CHECK((base_signal(sol, problem) - y).norm() < 1e-6 * y.norm());
    }
    SUBCASE("ball")
    {
        obs.eta2 = 0.01 * obs.z.squaredNorm();
        const auto sol = conv_relax(obs, problem);
        CHECK(sol.stats.converged);
        CHECK(sampled_misfit2(obs, sol, problem) <= obs.eta2 * (1.0 + 1e-7));
        check_block_feasible(sol);
    }
}

TEST_CASE("weighted solve with an explicit weight")
{
    std::mt19937_64 rng(13);
    const Shape s{4, 4};
    const auto freqs = test::separated_freqs(2, 3, 0.0, rng);
    const ComplexVector y = signal(s, freqs, {1.0, Complex(0.0, 1.0), -0.5});
    const auto obs = ObservationModel::selection(s, test::random_samples(16, 10, rng), y);
    auto problem = LiftedProblem::make(s, 4);
    const ComplexMatrix Q = test::random_unitary(16, rng);
    RealVector d(16);
    for (Index i = 0; i < 16; ++i)
        d(i) = 0.2 + 0.3 * double(i);
    problem.weight = Q * d.cast<Complex>().asDiagonal() * Q.adjoint();
    const auto sol = solve_weighted_trace(obs, problem);
    CHECK(sol.stats.converged);
    check_block_feasible(sol);
    CHECK(sampled_misfit2(obs, sol, problem) < 1e-20);
    const double direct = sol.t + (problem.weight * sol.T()).trace().real();
    CHECK(sol.objective == doctest::Approx(direct).epsilon(1e-6));

    SUBCASE("rejects an indefinite weight")
    {
        problem.weight(0, 0) = -100.0;
        CHECK_THROWS_AS(solve_weighted_trace(obs, problem), MltError);
    }
}

TEST_CASE("rwtm")
{
    std::mt19937_64 rng(21);
    const Shape s{6, 6};
    const auto freqs = test::separated_freqs(2, 5, 0.0, rng);
    std::vector<Complex> c;
    for (int j = 0; j < 5; ++j)
        c.push_back(test::complex_normal(rng));
    const ComplexVector y = signal(s, freqs, c);
    const auto obs = ObservationModel::selection(s, test::random_samples(36, 20, rng), y);
    const auto problem = LiftedProblem::make(s, 6);

    SUBCASE("first iteration is the convex relaxation")
    {
        RwtmConfig cfg;
        cfg.max_outer = 1;
        const auto res = rwtm(obs, problem, cfg);
        const auto cr = conv_relax(obs, problem, cfg.admm);
        CHECK(res.trace.size() == 1);
        CHECK(res.solution.t == cr.t);
        CHECK(res.solution.y == cr.y);
        CHECK(res.solution.u.values() == cr.u.values());
        CHECK(res.trace[0].epsilon == doctest::Approx(0.1 * res.trace[0].eigenvalues(0)));
    }

    SUBCASE("epsilon schedule")
    {
        RwtmConfig cfg;
        cfg.max_outer = 10;
        cfg.rel_change_tol = 1e-300; // run every iteration
        const auto res = rwtm(obs, problem, cfg);
        REQUIRE(res.trace.size() == 10);
        const double eps1 = res.trace[0].epsilon;
        for (int j = 2; j <= 10; ++j)
        {
            const double expect = eps1 * std::pow(0.5, std::min(j, 8) - 1);
            CHECK(res.trace[static_cast<std::size_t>(j - 1)].epsilon == doctest::Approx(expect).epsilon(1e-12));
        }
        for (const auto& it : res.trace)
        {
            CHECK(it.stats.converged);
            CHECK(it.stats.primal_residual < cfg.admm.tol);
            CHECK(it.stats.dual_residual < cfg.admm.tol);
        }
        check_block_feasible(res.solution);
    }

    SUBCASE("surrogate is non-increasing at fixed epsilon")
    {
        RwtmConfig cfg;
        cfg.max_outer = 5;
        cfg.rel_change_tol = 1e-300;
        cfg.fixed_epsilon = 0.05;
        const auto res = rwtm(obs, problem, cfg);
        REQUIRE(res.trace.size() == 5);
        for (std::size_t j = 1; j < res.trace.size(); ++j)
        {
            const double prev = res.trace[j - 1].surrogate;
            CHECK(res.trace[j].surrogate <= prev + 1e-5 * (1.0 + std::abs(prev)));
        }
    }

    SUBCASE("trailing eigenvalues shrink with epsilon")
    {
        // continuation over eps: majorize-minimize steps at each fixed eps,
        // warm from the previous level; eigenvalues past the model order
        // must decay at least linearly in eps
        const std::vector<double> eps{1e-2, 1e-3, 1e-4};
        std::vector<double> tail;
        SdpSolution sol = conv_relax(obs, problem);
        for (double e : eps)
        {
            for (int step = 0; step < 6; ++step)
            {
                LiftedProblem weighted = problem;
                ComplexMatrix A = sol.T();
                A.diagonal().array() += e;
                weighted.weight = A.inverse();
                weighted.weight = 0.5 * (weighted.weight + weighted.weight.adjoint()).eval();
                sol = solve_weighted_trace(obs, weighted, {}, &sol);
                CHECK(sol.stats.converged);
            }
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sol.T(), Eigen::EigenvaluesOnly);
            const RealVector ev = es.eigenvalues().reverse();
            tail.push_back(std::max(ev(5), 0.0));
        }
        const double C = std::max(tail[0] / eps[0], 1e-6);
        for (std::size_t k = 1; k < eps.size(); ++k)
            CHECK(tail[k] <= 2.0 * C * eps[k]);
    }

    SUBCASE("config validation")
    {
        RwtmConfig cfg;
        cfg.max_outer = 0;
        CHECK_THROWS_AS(rwtm(obs, problem, cfg), MltError);
        cfg = RwtmConfig{};
        cfg.fixed_epsilon = 0.0;
        CHECK_THROWS_AS(rwtm(obs, problem, cfg), MltError);
    }
}

TEST_CASE("retrieve_and_check")
{
    SUBCASE("zero solution")
    {
        const Shape s{4, 4};
        const auto problem = LiftedProblem::make(s, 4);
        const auto sol = conv_relax(ObservationModel::full(s, ComplexVector::Zero(16)), problem);
        const auto ret = retrieve_and_check(sol, problem);
        CHECK(ret.cert == Cert::guaranteed);
        CHECK(ret.model.order() == 0);
        CHECK(ret.rank == 0);
    }
    SUBCASE("lifted single atom keeps base-grid amplitudes")
    {
        const Shape s{3, 3};
        const FrequencyTuple f{0.3, 0.6};
        const Complex c(2.0, -1.0);
        const auto problem = LiftedProblem::make(s, 5);
        const auto sol = conv_relax(ObservationModel::full(s, c * md_steering_vector(s, f)), problem);
        const auto ret = retrieve_and_check(sol, problem);
        CHECK(ret.cert == Cert::guaranteed);
        REQUIRE(ret.model.order() == 1);
        CHECK(ret.model.freqs[0].distance(f) < 1e-6);
        CHECK(std::abs(ret.model.amplitudes[0] - c) < 1e-5 * std::abs(c));
    }
    SUBCASE("top-r keeps the strongest atoms")
    {
        const Shape s{6, 6};
        const std::vector<FrequencyTuple> freqs{{0.1, 0.2}, {0.5, 0.5}, {0.8, 0.3}};
        const auto problem = LiftedProblem::make(s, 6);
        const auto sol = conv_relax(ObservationModel::full(s, signal(s, freqs, {2.0, 1.5, 0.01})), problem);
        RetrievalOptions opts;
        opts.top_r = 2;
        const auto ret = retrieve_and_check(sol, problem, opts);
        REQUIRE(ret.model.order() == 2);
        CHECK(test::set_error(ret.model.freqs, {freqs[0], freqs[1]}) < 1e-6);
    }
    SUBCASE("rank at or above min n' goes through the search")
    {
        std::mt19937_64 rng(4);
        const Shape s{4, 4};
        const auto freqs = test::separated_freqs(2, 6, 0.0, rng);
        std::vector<Complex> c;
        for (int j = 0; j < 6; ++j)
            c.push_back(test::complex_normal(rng));
        const auto problem = LiftedProblem::make(s, 4);
        const auto sol = conv_relax(ObservationModel::selection(s, test::random_samples(16, 8, rng), signal(s, freqs, c)),
                                    problem);
        const auto ret = retrieve_and_check(sol, problem);
        CHECK(ret.rank >= 4);
        CHECK(ret.cert != Cert::guaranteed);
        if (ret.cert == Cert::verified_by_mapp)
            CHECK(ret.residual <= 1e-6);
        else
            CHECK(ret.status != DecompStatus::ok);
    }
}
