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


// Acceptance runner: `acceptance <1..7|all>` prints one PASS/FAIL line per
// criterion and exits non-zero when any of them fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mltvd/harness.hpp"
#include "mltvd/mapp.hpp"
#include "mltvd/superres.hpp"
#include "test_util.hpp"

using namespace mltvd;

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome
{
    bool passed = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok)
        {
            passed = false;
            detail << " [failed: " << what << "]";
        }
    }
};

// Runs a harness experiment and folds its threshold checks into `out`.
ExperimentResult run_checked(const ExperimentConfig& cfg, Outcome& out)
{
    const ExperimentResult res = run_experiment(cfg);
    for (const Check& c : res.checks)
    {
        std::cout << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << c.detail << "\n";
        out.require(c.passed, c.name);
    }
    out.require(!res.checks.empty(), "no threshold checks ran");
    return res;
}

bool admm_clean(const SolverStats& s, double tol)
{
    return s.converged && s.primal_residual < tol && s.dual_residual < tol;
}

Outcome decomp_round_trip()
{
    Outcome out;
    auto cfg = ExperimentConfig::defaults(ExperimentKind::decomp_sweep);
    cfg.ranks = {1, 2, 3, 4, 5};
    cfg.thresholds.low_rank_rate = 0.99;
    cfg.mapp_mode = MappMode::recursive;
    const auto t0 = Clock::now();
    const auto res = run_checked(cfg, out);
    const double dt = seconds_since(t0);
    int ok = 0;
    for (const auto& r : res.records)
        ok += r.success ? 1 : 0;
    out.detail << ok << "/" << res.records.size() << " trials within 1e-6, " << dt << " s";
    out.require(dt < 10.0, "runtime < 10 s");
    return out;
}

Outcome high_rank_mapp()
{
    Outcome out;
    auto cfg = ExperimentConfig::defaults(ExperimentKind::decomp_sweep);
    cfg.ranks.clear();
    for (int r = 6; r <= 30; ++r)
        cfg.ranks.push_back(r);
    for (int r = 41; r <= 48; ++r)
        cfg.ranks.push_back(r);
    cfg.thresholds.search_rate = 0.95;
    cfg.thresholds.search_median_err = 1e-3;
    cfg.thresholds.degenerate_beyond_bound = true;
    cfg.mapp_mode = MappMode::search;
    const auto t0 = Clock::now();
    const auto res = run_checked(cfg, out);
    const double dt = seconds_since(t0);
    double worst = 1.0;
    for (const auto& s : res.summary)
        if (s.r <= 30)
            worst = std::min(worst, s.success_rate);
    out.detail << "lowest residual pass rate over r=6..30 " << worst << ", " << dt << " s";
    out.require(dt < 300.0, "runtime < 5 min");
    return out;
}

Outcome single_atom_exactness()
{
    Outcome out;
    const Shape s{4, 4};
    const auto problem = LiftedProblem::make(s, 4);
    const AdmmConfig admm;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst_obj = 0.0, worst_freq = 0.0, worst_bound = 0.0;
    int solved = 0;
    const auto t0 = Clock::now();
    for (int trial = 0; trial < 20; ++trial)
    {
        const FrequencyTuple f{unif(rng), unif(rng)};
        const Complex c = (0.5 + 2.0 * unif(rng)) * std::polar(1.0, 2.0 * M_PI * unif(rng));
        const ComplexVector a = md_steering_vector(s, f);
        const ComplexVector y = c * a;
        const auto sol = conv_relax(ObservationModel::full(s, y), problem, admm);
        const double target = 2.0 * std::abs(c);
        worst_obj = std::max(worst_obj, std::abs(sol.objective - target) / target);
        solved += admm_clean(sol.stats, admm.tol) ? 1 : 0;

        // Dual certificate v = c a / |c|: sup_g |a(g)^H v| <= 1 on a fine grid
        // makes 2 Re(v^H y) = 2|c| a lower bound for every feasible point.
        const ComplexVector v = c / std::abs(c) * a;
        double sup = 0.0;
        for (int i = 0; i < 200; ++i)
            for (int j = 0; j < 200; ++j)
                sup = std::max(sup, std::abs(md_steering_vector(s, FrequencyTuple{i / 200.0, j / 200.0}).dot(v)));
        const double bound = 2.0 * (v.dot(y)).real();
        worst_bound = std::max(worst_bound, std::abs(bound - target) / target);
        out.require(sup <= 1.0 + 1e-12, "dual certificate bounded by 1");

        const auto ret = retrieve_and_check(sol, problem);
        if (ret.model.order() == 1)
            worst_freq = std::max(worst_freq, ret.model.freqs[0].distance(f));
        else
            worst_freq = 1.0;
    }
    const double dt = seconds_since(t0);
    out.detail << "max rel objective gap " << worst_obj << ", max freq err " << worst_freq << ", dual bound gap "
               << worst_bound << ", " << solved << "/20 solves within ADMM residual " << admm.tol << ", " << dt
               << " s";
    out.require(worst_obj <= 1e-4, "objective within 1e-4 of 2|c|");
    out.require(worst_freq < 1e-6, "one atom within 1e-6");
    out.require(worst_bound <= 1e-12, "dual bound attains 2|c|");
    out.require(solved == 20, "ADMM residuals below tolerance");
    out.require(dt < 60.0, "runtime < 1 min");
    return out;
}

Outcome illustrative_example()
{
    Outcome out;
    // Eight atoms on (10,10) with a 0.045-separated pair (0.55,0.80)/(0.586,0.827).
    const std::vector<FrequencyTuple> freqs = {{0.10, 0.20}, {0.10, 0.70}, {0.35, 0.45},  {0.80, 0.45},
                                               {0.55, 0.80}, {0.586, 0.827}, {0.30, 0.95}, {0.75, 0.10}};
    const Shape s{10, 10};
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexVector y = ComplexVector::Zero(s.total());
    for (const auto& f : freqs)
    {
        const Complex c(normal(rng) / std::sqrt(2.0), normal(rng) / std::sqrt(2.0));
        y += c * md_steering_vector(s, f);
    }
    std::vector<Index> idx(static_cast<std::size_t>(s.total()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(50);
    std::sort(idx.begin(), idx.end());

    const auto obs = ObservationModel::selection(s, idx, y);
    const auto problem = LiftedProblem::make(s, 12);
    const auto t0 = Clock::now();
    const RwtmResult res = rwtm(obs, problem);
    const double dt = seconds_since(t0);
    const Retrieval ret = retrieve_and_check(res.solution, problem);
    const double err = ret.model.order() == 8 ? test::set_error(ret.model.freqs, freqs) : 1.0;
    const int first_rank = res.trace.empty() ? 0 : res.trace.front().rank;
    out.detail << "lifted " << problem.lift.lifted.size(0) << "x" << problem.lift.lifted.size(1) << ", " << res.trace.size()
               << " outer iterations, ConvRelax rank " << first_rank << ", final rank " << ret.rank
               << ", max freq err " << err << ", cert " << to_string(ret.cert) << ", " << dt << " s";
    out.require(problem.lift.lifted == Shape{12, 12}, "lifted shape (12,12)");
    out.require(res.trace.size() <= 20 && res.converged, "terminates within 20 outer iterations");
    out.require(ret.rank == 8, "final rank 8");
    out.require(err < 1e-6, "frequencies within 1e-6");
    out.require(dt < 900.0, "runtime < 15 min");
    return out;
}

Outcome phase_transition()
{
    Outcome out;
    const auto cfg = ExperimentConfig::defaults(ExperimentKind::phase_transition);
    const auto t0 = Clock::now();
    const auto res = run_checked(cfg, out);
    const double dt = seconds_since(t0);
    for (const auto& c : res.summary)
        std::cout << "  " << (c.method ? to_string(*c.method) : "-") << " r=" << c.r << " delta_f=" << c.delta_f << ": " << c.successes
                  << "/" << c.generated << "\n";
    out.detail << res.records.size() << " trials over " << res.summary.size() << " cells, " << dt << " s";
    out.require(dt < 7200.0, "runtime < 2 h");
    return out;
}

Outcome property_suites()
{
    Outcome out;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // steering vectors have unit norm
    double norm_err = 0.0;
    for (const Shape& s : {Shape{7}, Shape{6, 8}, Shape{3, 4, 2}})
        for (int t = 0; t < 100; ++t)
        {
            std::vector<double> f(static_cast<std::size_t>(s.dims()));
            for (auto& x : f)
                x = unif(rng);
            norm_err = std::max(norm_err, std::abs(md_steering_vector(s, FrequencyTuple(f)).norm() - 1.0));
        }
    out.require(norm_err < 1e-12, "steering unit norm");

    // built matrices validate, and the sequence route agrees with the atom route
    double struct_err = 0.0;
    for (int t = 0; t < 50; ++t)
    {
        const Shape s{6, 8};
        const AtomicModel m = test::random_model(s, 1 + t % 10, rng);
        const ComplexMatrix T = mlt_from_model(s, m);
        const auto rep = validate_structure(T, s);
        out.require(rep.passes(1e-10), "built matrix validates");
        struct_err = std::max(struct_err, (mlt_matrix(sequence_from_model(s, m)) / double(s.total()) - T).norm() /
                                              T.norm());
        struct_err = std::max(struct_err, (mlt_matrix(project_to_sequence(T, s)) - T).norm() / T.norm());
    }
    out.require(struct_err < 1e-12, "build/validate consistency");

    // T_(2,2) layout: entry (j, m) holds u_{m - j}
    MltSequence u(Shape{2, 2});
    auto marker = [](int k1, int k2) { return Complex(100.0 + 10.0 * k1 + k2); };
    for (int k1 = -1; k1 <= 1; ++k1)
        for (int k2 = -1; k2 <= 1; ++k2)
            u[MultiIndex{k1, k2}] = marker(k1, k2);
    const ComplexMatrix T22 = mlt_matrix(u);
    const Complex golden[4][4] = {
        {marker(0, 0), marker(0, 1), marker(1, 0), marker(1, 1)},
        {marker(0, -1), marker(0, 0), marker(1, -1), marker(1, 0)},
        {marker(-1, 0), marker(-1, 1), marker(0, 0), marker(0, 1)},
        {marker(-1, -1), marker(-1, 0), marker(0, -1), marker(0, 0)},
    };
    bool layout = true;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            layout = layout && T22(i, j) == golden[i][j];
    out.require(layout, "T_(2,2) golden layout");

    // P_l a(f) is the Kronecker product with dimension l moved to the front
    double perm_err = 0.0;
    const Shape s3{3, 4, 2};
    for (int t = 0; t < 100; ++t)
    {
        const FrequencyTuple f{unif(rng), unif(rng), unif(rng)};
        const ComplexVector a = md_steering_vector(s3, f);
        for (int l = 0; l < 3; ++l)
        {
            const auto p = dimension_permutation(s3, l);
            std::vector<double> reordered{f[l]};
            for (int m = 0; m < 3; ++m)
                if (m != l)
                    reordered.push_back(f[m]);
            const ComplexVector expected = md_steering_vector(permuted_shape(s3, l), FrequencyTuple(reordered));
            for (Index i = 0; i < a.size(); ++i)
                perm_err = std::max(perm_err, std::abs(a(p[static_cast<std::size_t>(i)]) - expected(i)));
        }
    }
    out.require(perm_err < 1e-13, "permutation steering identity");

    // pencil eigenvalues are unit modulus and invariant to Y -> Y Q
    double modulus_err = 0.0, invariance_err = 0.0;
    for (int t = 0; t < 20; ++t)
    {
        const Shape s{6, 8};
        const int r = 1 + t % 5;
        const AtomicModel m = test::random_model(s, r, rng);
        const Factorization fac = low_rank_factor(mlt_from_model(s, m), s);
        Factorization rotated = fac;
        rotated.Y = fac.Y * test::random_unitary(r, rng);
        for (int dim = 0; dim < 2; ++dim)
        {
            const PencilResult a = pencil_eigen(fac, dim);
            const PencilResult b = pencil_eigen(rotated, dim);
            std::vector<FrequencyTuple> fa, fb;
            for (Index j = 0; j < a.eigenvalues.size(); ++j)
            {
                modulus_err = std::max(modulus_err, std::abs(std::abs(a.eigenvalues(j)) - 1.0));
                fa.push_back(FrequencyTuple{a.frequencies[static_cast<std::size_t>(j)]});
            }
            for (double x : b.frequencies)
                fb.push_back(FrequencyTuple{x});
            invariance_err = std::max(invariance_err, test::set_error(fa, fb));
        }
    }
    out.require(modulus_err < 1e-8, "pencil unit modulus");
    out.require(invariance_err < 1e-9, "pencil invariance under unitary rotation");

    // frozen-epsilon MM is monotone on a fixed instance
    const Shape s{6, 6};
    const auto freqs = test::separated_freqs(2, 5, 0.0, rng);
    ComplexVector y = ComplexVector::Zero(s.total());
    for (const auto& f : freqs)
        y += test::complex_normal(rng) * md_steering_vector(s, f);
    const auto obs = ObservationModel::selection(s, test::random_samples(36, 20, rng), y);
    const auto problem = LiftedProblem::make(s, 6);
    RwtmConfig mm;
    mm.max_outer = 5;
    mm.rel_change_tol = 1e-300;
    mm.fixed_epsilon = 0.05;
    const RwtmResult res = rwtm(obs, problem, mm);
    bool monotone = res.trace.size() == 5;
    for (std::size_t j = 1; j < res.trace.size(); ++j)
    {
        const double prev = res.trace[j - 1].surrogate;
        monotone = monotone && res.trace[j].surrogate <= prev + 1e-5 * (1.0 + std::abs(prev));
    }
    out.require(monotone, "MM surrogate monotone over 5 iterations");

    // every solve above reached the residual target
    int solves = 0, clean = 0;
    for (const auto& it : res.trace)
    {
        ++solves;
        clean += admm_clean(it.stats, 1e-7) ? 1 : 0;
    }
    for (int t = 0; t < 5; ++t)
    {
        const FrequencyTuple f{unif(rng), unif(rng)};
        const auto sol = conv_relax(ObservationModel::full(Shape{4, 4}, md_steering_vector(Shape{4, 4}, f)),
                                    LiftedProblem::make(Shape{4, 4}, 4));
        ++solves;
        clean += admm_clean(sol.stats, 1e-7) ? 1 : 0;
    }
    out.require(clean == solves, "ADMM residuals < 1e-7");

    const double dt = seconds_since(t0);
    out.detail << "norm err " << norm_err << ", structure err " << struct_err << ", permutation err " << perm_err
               << ", |z|-1 " << modulus_err << ", rotation err " << invariance_err << ", ADMM " << clean << "/"
               << solves << " clean, " << dt << " s";
    out.require(dt < 60.0, "runtime < 1 min");
    return out;
}

Outcome noisy_mse()
{
    Outcome out;
    const auto cfg = ExperimentConfig::defaults(ExperimentKind::noisy_mse);
    const auto t0 = Clock::now();
    const auto res = run_checked(cfg, out);
    const double dt = seconds_since(t0);
    for (const auto& c : res.summary)
        std::cout << "  n=" << c.n << " fraction=" << c.fraction << ": mse " << c.mse << " ("
                  << 10.0 * std::log10(c.mse) << " dB)\n";
    out.detail << res.records.size() << " trials, " << dt << " s";
    out.require(dt < 3600.0, "runtime < 1 h");
    return out;
}

struct Criterion
{
    const char* name;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria = {
        {"decomposition round trip, (6,8), r=1..5", decomp_round_trip},
        {"high-rank MaPP, r=6..30 and pencil degeneracy at r=41..48", high_rank_mapp},
        {"single-atom SDP exactness on (4,4)", single_atom_exactness},
        {"illustrative RWTM example, (10,10) lifted to (12,12)", illustrative_example},
        {"phase-transition ordering, (8,8), M=32", phase_transition},
        {"property suites", property_suites},
        {"noisy MSE, n=5,6", noisy_mse},
    };
    std::vector<int> which;
    const std::string arg = argc > 1 ? argv[1] : "all";
    if (arg == "all")
        for (int k = 1; k <= 7; ++k)
            which.push_back(k);
    else
    {
        const int k = std::atoi(arg.c_str());
        if (k < 1 || k > 7)
        {
            std::cerr << "usage: acceptance <1..7|all>\n";
            return 2;
        }
        which.push_back(k);
    }

    bool all = true;
    for (int k : which)
    {
        Outcome out;
        try
        {
            out = criteria[static_cast<std::size_t>(k - 1)].run();
        }
        catch (const std::exception& e)
        {
            out.passed = false;
            out.detail << "exception: " << e.what();
        }
        std::cout << (out.passed ? "PASS" : "FAIL") << " criterion " << k << ": "
                  << criteria[static_cast<std::size_t>(k - 1)].name << ": " << out.detail.str() << std::endl;
        all = all && out.passed;
    }
    return all ? 0 : 1;
}
