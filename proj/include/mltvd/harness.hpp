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
/// \file harness.hpp
///
/// Seeded Monte Carlo experiments: decomposition sweeps, sparsity versus
/// separation phase transitions and noisy frequency MSE.
///
/// Every trial draws from its own generator keyed by (seed, cell, trial),
/// so results do not depend on the number of worker threads or on the
/// order in which trials finish.
///
#ifndef MLTVD_HARNESS_HPP
#define MLTVD_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mltvd/mapp.hpp"
#include "mltvd/superres.hpp"

namespace mltvd
{

enum class ExperimentKind
{
    decomp_sweep,
    phase_transition,
    noisy_mse,
};

enum class Method
{
    convrelax,
    rwtm,
};

const char* to_string(ExperimentKind kind);
const char* to_string(Method method);
/// Throws MltError on unknown names.
ExperimentKind parse_kind(const std::string& name);
Method parse_method(const std::string& name);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Stream key of one trial of one cell.
std::uint64_t trial_key(std::uint64_t seed, std::uint64_t cell, std::uint64_t trial);
std::mt19937_64 trial_rng(std::uint64_t key);

enum class PowerDist
{
    chi_square,     ///< p = w^2 + 0.5, w standard normal
    complex_normal, ///< c standard complex normal, p = |c|^2
};

struct GeneratedModel
{
    AtomicModel model;
    bool ok = false;    ///< false when the draw budget ran out
    long draws = 0;
};

///
/// r uniform tuples, each accepted only if its wrap-l_inf distance to all
/// earlier ones is at least min_sep. Gives up after `budget` draws.
///
GeneratedModel random_model(const Shape& shape, int r, double min_sep, PowerDist dist, std::mt19937_64& rng,
                            long budget = 1'000'000);

struct Evaluation
{
    bool success = false;
    double freq_err = 0.0; ///< max wrap-l_inf error over matched pairs
    double rmse = 0.0;     ///< ||y_est - y_true|| / ||y_true||
    double sq_err = 0.0;   ///< mean squared wrap error per true coordinate
    bool counts_match = false;
    /// (estimate, truth) index pairs
    std::vector<std::pair<std::size_t, std::size_t>> matches;
};

///
/// Greedy matching: pairs are taken in order of increasing wrap-l_inf
/// distance, ties broken by the larger true power. A true atom left
/// without a partner contributes the distance to its nearest estimate
/// (0.5 with no estimates). Success needs equal atom counts and both
/// errors below `tol`. Empty signals give rmse 0.
///
Evaluation evaluate_success(const AtomicModel& est, const AtomicModel& truth, const ComplexVector& y_est,
                            const ComplexVector& y_true, double tol = 1e-6);

/// Pass/fail thresholds checked after a run; unset entries are skipped.
struct Thresholds
{
    // decomp_sweep
    std::optional<double> low_rank_rate;    ///< r < min n: share with freq_err < 1e-6
    std::optional<double> search_rate;      ///< min n <= r <= bound: share with residual < 1e-6
    std::optional<double> search_median_err;
    int search_max_r = 30;                  ///< upper end of the search-rate range
    bool degenerate_beyond_bound = false;   ///< r > bound: every trial pencil_degenerate

    // phase_transition
    bool rwtm_dominates = false;            ///< RWTM successes >= ConvRelax successes per cell
    std::optional<double> easy_min_rate;    ///< at (easy_r, easy_delta_f), both methods
    int easy_r = 2;
    double easy_delta_f = 0.25;
    std::optional<double> hard_max_rate;    ///< at (hard_r, hard_delta_f), both methods
    int hard_r = 14;
    double hard_delta_f = 0.0;

    // noisy_mse
    std::optional<double> full_mse_max;     ///< RWTM full-data MSE
    std::optional<double> compressive_gap_db; ///< RWTM partial-data MSE over full-data MSE
};

struct ExperimentConfig
{
    ExperimentKind kind = ExperimentKind::decomp_sweep;
    Shape shape{6, 8};             ///< decomp_sweep and phase_transition
    std::vector<int> sizes;        ///< noisy_mse: n for shape (n, n)
    int trials = 100;
    std::vector<int> ranks;
    std::vector<double> delta_f{0.0};
    int samples = 32;              ///< phase_transition: M
    double sample_fraction = 0.8;  ///< noisy_mse: compressive share of the n x n samples
    double sigma2_scale = 0.1;     ///< noisy_mse: sigma^2 = sigma2_scale / n
    std::uint64_t seed = 1;
    std::vector<Method> methods{Method::convrelax, Method::rwtm};
    int rbar = 0;                  ///< 0: min n, no lift
    std::optional<MappMode> mapp_mode; ///< decomp_sweep; unset: recursive below min n, search above
    AdmmConfig admm;
    int rwtm_max_outer = 20;
    int top_r = 3;                 ///< noisy_mse
    int parallel = 1;
    std::string out;
    Thresholds thresholds;

    /// Desk-scale setup and acceptance thresholds for each kind.
    static ExperimentConfig defaults(ExperimentKind kind);

    /// Throws MltError on invalid settings.
    void validate() const;
};

struct TrialRecord
{
    // cell
    int n = 0;               ///< noisy_mse grid size
    int r = 0;
    double delta_f = 0.0;
    Method method = Method::rwtm;
    double fraction = 1.0;   ///< noisy_mse sampled share
    int trial = 0;
    std::uint64_t seed = 0;

    bool generated = true;
    bool success = false;
    double freq_err = 0.0;
    double rmse = 0.0;       ///< decomp_sweep: relative reconstruction residual of T
    double sq_err = 0.0;
    double runtime_s = 0.0;
    std::string status;      ///< MaPP status or certificate
    int rank = 0;            ///< estimated rank, or atoms found
    int outer = 0;           ///< RWTM outer iterations
    long admm_iters = 0;
    bool solver_converged = true;
};

struct CellSummary
{
    int n = 0;
    int r = 0;
    double delta_f = 0.0;
    std::optional<Method> method;
    double fraction = 1.0;
    int trials = 0;
    int generated = 0;
    int successes = 0;
    double success_rate = 0.0; ///< over generated trials
    double median_err = 0.0;
    double max_err = 0.0;
    double min_err = 0.0;
    double mse = 0.0;          ///< mean sq_err
    int degenerate = 0;        ///< decomp_sweep: pencil_degenerate trials
};

struct Check
{
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentResult
{
    ExperimentConfig config;
    std::vector<TrialRecord> records;
    std::vector<CellSummary> summary;
    std::vector<Check> checks;

    bool passed() const;
};

/// Runs every cell and trial, then summarizes and checks thresholds.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::vector<CellSummary> summarize(const ExperimentConfig& config, const std::vector<TrialRecord>& records);
std::vector<Check> check_thresholds(const ExperimentConfig& config, const std::vector<TrialRecord>& records,
                                    const std::vector<CellSummary>& summary);

/// Per-trial CSV; `with_runtime` false drops the runtime column.
std::string records_csv(const ExperimentConfig& config, const std::vector<TrialRecord>& records,
                        bool with_runtime = true);
std::string summary_csv(const ExperimentConfig& config, const std::vector<CellSummary>& summary);

/// Highest rank the pencil can resolve along every dimension, N - N / min n.
int pencil_bound(const Shape& shape);

} // namespace mltvd

#endif // MLTVD_HARNESS_HPP
