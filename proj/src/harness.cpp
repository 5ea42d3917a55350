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

#include "mltvd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

namespace mltvd
{

const char* to_string(ExperimentKind kind)
{
    switch (kind)
    {
    case ExperimentKind::decomp_sweep: return "decomp_sweep";
    case ExperimentKind::phase_transition: return "phase_transition";
    case ExperimentKind::noisy_mse: return "noisy_mse";
    }
    return "unknown";
}

const char* to_string(Method method)
{
    return method == Method::convrelax ? "convrelax" : "rwtm";
}

ExperimentKind parse_kind(const std::string& name)
{
    if (name == "decomp_sweep" || name == "decomp")
        return ExperimentKind::decomp_sweep;
    if (name == "phase_transition" || name == "phase")
        return ExperimentKind::phase_transition;
    if (name == "noisy_mse" || name == "noisy")
        return ExperimentKind::noisy_mse;
    throw MltError("unknown experiment kind: " + name);
}

Method parse_method(const std::string& name)
{
    if (name == "convrelax")
        return Method::convrelax;
    if (name == "rwtm")
        return Method::rwtm;
    throw MltError("unknown method: " + name);
}

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_key(std::uint64_t seed, std::uint64_t cell, std::uint64_t trial)
{
    return mix64(mix64(mix64(seed) ^ cell) ^ trial);
}

std::mt19937_64 trial_rng(std::uint64_t key)
{
    return std::mt19937_64(key);
}

GeneratedModel random_model(const Shape& shape, int r, double min_sep, PowerDist dist, std::mt19937_64& rng,
                            long budget)
{
    if (r < 0 || !(min_sep >= 0.0))
        throw MltError("random_model: r and min_sep must be nonnegative");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    GeneratedModel out;
    const auto d = static_cast<std::size_t>(shape.dims());
    while (static_cast<int>(out.model.freqs.size()) < r)
    {
        if (out.draws >= budget)
            return out;
        ++out.draws;
        std::vector<double> f(d);
        for (auto& c : f)
            c = unif(rng);
        FrequencyTuple cand(std::move(f));
        const bool far = std::all_of(out.model.freqs.begin(), out.model.freqs.end(),
                                     [&](const FrequencyTuple& g) { return g.distance(cand) >= min_sep; });
        if (far)
            out.model.freqs.push_back(std::move(cand));
    }
    for (int j = 0; j < r; ++j)
    {
        if (dist == PowerDist::chi_square)
        {
            const double w = normal(rng);
            out.model.powers.push_back(w * w + 0.5);
        }
        else
        {
            const double re = normal(rng);
            const double im = normal(rng);
            const Complex c = Complex(re, im) / std::sqrt(2.0);
            out.model.amplitudes.push_back(c);
            out.model.powers.push_back(std::norm(c));
        }
    }
    out.ok = true;
    return out;
}

Evaluation evaluate_success(const AtomicModel& est, const AtomicModel& truth, const ComplexVector& y_est,
                            const ComplexVector& y_true, double tol)
{
    Evaluation ev;
    const std::size_t ne = est.order();
    const std::size_t nt = truth.order();
    struct Pair
    {
        double dist;
        double power;
        std::size_t e, t;
    };
    std::vector<Pair> pairs;
    pairs.reserve(ne * nt);
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t t = 0; t < nt; ++t)
        {
            const double p = t < truth.powers.size() ? truth.powers[t] : 0.0;
            pairs.push_back({est.freqs[e].distance(truth.freqs[t]), p, e, t});
        }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist)
            return a.dist < b.dist;
        return a.power > b.power;
    });
    std::vector<bool> used_e(ne, false), used_t(nt, false);
    std::vector<std::size_t> partner(nt, ne);
    for (const Pair& p : pairs)
    {
        if (used_e[p.e] || used_t[p.t])
            continue;
        used_e[p.e] = used_t[p.t] = true;
        partner[p.t] = p.e;
        ev.matches.emplace_back(p.e, p.t);
    }

    double sq = 0.0;
    int coords = 0;
    for (std::size_t t = 0; t < nt; ++t)
    {
        std::size_t e = partner[t];
        if (e == ne && ne > 0)
        {
            // unmatched: nearest estimate
            e = 0;
            for (std::size_t k = 1; k < ne; ++k)
                if (est.freqs[k].distance(truth.freqs[t]) < est.freqs[e].distance(truth.freqs[t]))
                    e = k;
        }
        for (int l = 0; l < truth.freqs[t].dims(); ++l)
        {
            const double err = e < ne ? wrap_distance(est.freqs[e][l], truth.freqs[t][l]) : 0.5;
            sq += err * err;
            ++coords;
        }
        ev.freq_err = std::max(ev.freq_err, e < ne ? est.freqs[e].distance(truth.freqs[t]) : 0.5);
    }
    ev.sq_err = coords > 0 ? sq / coords : 0.0;

    if (y_true.size() > 0 && y_est.size() == y_true.size())
    {
        const double ref = y_true.norm();
        const double diff = (y_est - y_true).norm();
        ev.rmse = ref > 0.0 ? diff / ref : diff;
    }
    else if (y_true.size() > 0)
        ev.rmse = std::numeric_limits<double>::infinity();

    ev.counts_match = ne == nt;
    ev.success = ev.counts_match && ev.freq_err < tol && ev.rmse < tol;
    return ev;
}

int pencil_bound(const Shape& shape)
{
    return static_cast<int>(shape.total() - shape.total() / shape.min_size());
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind)
{
    ExperimentConfig c;
    c.kind = kind;
    switch (kind)
    {
    case ExperimentKind::decomp_sweep:
        c.shape = Shape{6, 8};
        c.trials = 100;
        for (int r = 1; r <= 30; ++r)
            c.ranks.push_back(r);
        for (int r = 41; r <= 48; ++r)
            c.ranks.push_back(r);
        c.methods.clear();
        c.thresholds.low_rank_rate = 0.99;
        c.thresholds.search_rate = 0.95;
        c.thresholds.search_median_err = 1e-3;
        c.thresholds.degenerate_beyond_bound = true;
        break;
    case ExperimentKind::phase_transition:
        c.shape = Shape{8, 8};
        c.trials = 20;
        c.ranks = {2, 6, 10, 14};
        c.delta_f = {0.0, 1.0 / 8.0, 2.0 / 8.0};
        c.samples = 32;
        c.thresholds.rwtm_dominates = true;
        c.thresholds.easy_min_rate = 1.0;
        c.thresholds.hard_max_rate = 0.2;
        break;
    case ExperimentKind::noisy_mse:
        c.shape = Shape{5, 5};
        c.sizes = {5, 6};
        c.trials = 50;
        c.ranks = {3};
        c.methods = {Method::rwtm};
        c.rwtm_max_outer = 5;
        c.thresholds.full_mse_max = std::pow(10.0, -2.5);
        c.thresholds.compressive_gap_db = 5.0;
        break;
    }
    return c;
}

void ExperimentConfig::validate() const
{
    if (trials < 1)
        throw MltError("ExperimentConfig: trials must be at least 1");
    if (parallel < 1)
        throw MltError("ExperimentConfig: parallel must be at least 1");
    if (rbar < 0 || rwtm_max_outer < 1 || top_r < 1)
        throw MltError("ExperimentConfig: rbar, rwtm_max_outer and top_r out of range");
    for (double df : delta_f)
        if (!(df >= 0.0 && df <= 0.5))
            throw MltError("ExperimentConfig: delta_f must lie in [0, 0.5]");
    if (kind == ExperimentKind::noisy_mse)
    {
        if (sizes.empty())
            throw MltError("ExperimentConfig: noisy_mse needs sizes");
        for (int n : sizes)
            if (n < 2)
                throw MltError("ExperimentConfig: sizes must be at least 2");
        if (!(sample_fraction > 0.0 && sample_fraction <= 1.0) || !(sigma2_scale >= 0.0))
            throw MltError("ExperimentConfig: sample_fraction in (0, 1] and sigma2_scale >= 0 required");
        if (methods.empty())
            throw MltError("ExperimentConfig: no method selected");
        return;
    }
    if (ranks.empty() || delta_f.empty())
        throw MltError("ExperimentConfig: ranks and delta_f must be nonempty");
    for (int r : ranks)
        if (r < 1)
            throw MltError("ExperimentConfig: ranks must be positive");
    if (kind == ExperimentKind::phase_transition)
    {
        if (samples < 1 || samples > shape.total())
            throw MltError("ExperimentConfig: samples must lie in [1, N]");
        if (methods.empty())
            throw MltError("ExperimentConfig: no method selected");
    }
}

bool ExperimentResult::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t cell_key(int n, int r, double delta_f)
{
    return mix64(static_cast<std::uint64_t>(n) * 1000003ULL + static_cast<std::uint64_t>(r)) ^
           mix64(std::bit_cast<std::uint64_t>(delta_f));
}

bool has(const std::vector<Method>& methods, Method m)
{
    return std::find(methods.begin(), methods.end(), m) != methods.end();
}

std::vector<Index> draw_samples(Index n, Index m, std::mt19937_64& rng)
{
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(m));
    std::sort(idx.begin(), idx.end());
    return idx;
}

ComplexVector synthesize(const Shape& shape, const AtomicModel& model)
{
    if (model.order() == 0)
        return ComplexVector::Zero(shape.total());
    const ComplexVector c = Eigen::Map<const ComplexVector>(model.amplitudes.data(),
                                                            static_cast<Index>(model.amplitudes.size()));
    return steering_matrix(shape, model.freqs) * c;
}

struct Task
{
    int n = 0;
    int r = 0;
    double delta_f = 0.0;
    int trial = 0;
};

std::vector<TrialRecord> decomp_trial(const ExperimentConfig& cfg, const Task& task)
{
    TrialRecord rec;
    rec.r = task.r;
    rec.delta_f = task.delta_f;
    rec.trial = task.trial;
    rec.seed = trial_key(cfg.seed, cell_key(0, task.r, task.delta_f), static_cast<std::uint64_t>(task.trial));
    auto rng = trial_rng(rec.seed);
    const auto gen = random_model(cfg.shape, task.r, task.delta_f, PowerDist::chi_square, rng);
    rec.generated = gen.ok;
    if (!gen.ok)
    {
        rec.status = "generation_failed";
        return {rec};
    }
    const ComplexMatrix T = mlt_from_model(cfg.shape, gen.model);
    const MappMode mode =
        cfg.mapp_mode.value_or(task.r < cfg.shape.min_size() ? MappMode::recursive : MappMode::search);
    const auto start = Clock::now();
    const auto dec = vandermonde_decompose(T, cfg.shape, mode, task.r);
    rec.runtime_s = seconds_since(start);
    rec.status = to_string(dec.status);
    rec.rank = static_cast<int>(dec.model.order());
    rec.rmse = dec.model.order() ? dec.residual : 1.0;
    const auto ev = evaluate_success(dec.model, gen.model, {}, {});
    rec.freq_err = ev.freq_err;
    rec.sq_err = ev.sq_err;
    rec.success = dec.ok() && dec.residual < 1e-6;
    return {rec};
}

TrialRecord superres_record(const ExperimentConfig& cfg, const Task& task, Method method, std::uint64_t key)
{
    TrialRecord rec;
    rec.n = task.n;
    rec.r = task.r;
    rec.delta_f = task.delta_f;
    rec.method = method;
    rec.trial = task.trial;
    rec.seed = key;
    (void)cfg;
    return rec;
}

void fill_from(TrialRecord& rec, const RwtmResult& res, bool first_only, const Retrieval& ret, const Evaluation& ev,
               double seconds)
{
    rec.runtime_s = seconds;
    rec.freq_err = ev.freq_err;
    rec.rmse = ev.rmse;
    rec.sq_err = ev.sq_err;
    rec.status = to_string(ret.cert);
    rec.rank = ret.rank;
    rec.outer = first_only ? 1 : static_cast<int>(res.trace.size());
    rec.admm_iters = 0;
    rec.solver_converged = true;
    for (std::size_t j = 0; j < static_cast<std::size_t>(rec.outer); ++j)
    {
        rec.admm_iters += res.trace[j].stats.iterations;
        rec.solver_converged = rec.solver_converged && res.trace[j].stats.converged;
    }
}

// Runs RWTM once; the convex relaxation is its first iterate.
std::vector<TrialRecord> solve_and_score(const ExperimentConfig& cfg, const Task& task, const ObservationModel& obs,
                                         const AtomicModel& truth, const ComplexVector& y_true, std::uint64_t key,
                                         double fraction, std::optional<int> top_r, bool score_success)
{
    const LiftedProblem problem = LiftedProblem::make(obs.shape, cfg.rbar > 0 ? cfg.rbar : obs.shape.min_size());
    RwtmConfig rc;
    rc.admm = cfg.admm;
    rc.max_outer = has(cfg.methods, Method::rwtm) ? cfg.rwtm_max_outer : 1;
    RetrievalOptions ro;
    ro.top_r = top_r;

    const auto start = Clock::now();
    const RwtmResult res = rwtm(obs, problem, rc);
    const double total = seconds_since(start);

    std::vector<TrialRecord> out;
    for (Method m : {Method::convrelax, Method::rwtm})
    {
        if (!has(cfg.methods, m))
            continue;
        const bool first = m == Method::convrelax;
        const SdpSolution& sol = first ? res.first : res.solution;
        const auto rstart = Clock::now();
        const Retrieval ret = retrieve_and_check(sol, problem, ro);
        const double rsec = seconds_since(rstart);
        const ComplexVector y_est = base_signal(sol, problem);
        const Evaluation ev = evaluate_success(ret.model, truth, y_est, y_true);
        TrialRecord rec = superres_record(cfg, task, m, key);
        rec.fraction = fraction;
        fill_from(rec, res, first, ret, ev, (first ? res.trace.front().seconds : total) + rsec);
        rec.success = score_success ? ev.success : ev.counts_match;
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<TrialRecord> phase_trial(const ExperimentConfig& cfg, const Task& task)
{
    const std::uint64_t key =
        trial_key(cfg.seed, cell_key(0, task.r, task.delta_f), static_cast<std::uint64_t>(task.trial));
    auto rng = trial_rng(key);
    const auto gen = random_model(cfg.shape, task.r, task.delta_f, PowerDist::complex_normal, rng);
    if (!gen.ok)
    {
        std::vector<TrialRecord> out;
        for (Method m : {Method::convrelax, Method::rwtm})
            if (has(cfg.methods, m))
            {
                TrialRecord rec = superres_record(cfg, task, m, key);
                rec.generated = false;
                rec.status = "generation_failed";
                out.push_back(rec);
            }
        return out;
    }
    const ComplexVector y = synthesize(cfg.shape, gen.model);
    const auto samples = draw_samples(cfg.shape.total(), cfg.samples, rng);
    const auto obs = ObservationModel::selection(cfg.shape, samples, y);
    return solve_and_score(cfg, task, obs, gen.model, y, key, 1.0, std::nullopt, true);
}

// Three atoms with fixed frequencies and unit-modulus amplitudes.
AtomicModel noisy_truth()
{
    const double pi = std::acos(-1.0);
    std::vector<Complex> c;
    for (double phase : {0.793, 0.385, 0.076})
        c.push_back(std::polar(1.0, phase * pi));
    return AtomicModel::from_amplitudes({{0.25, 0.55}, {0.45, 0.55}, {0.45, 0.35}}, c);
}

std::vector<TrialRecord> noisy_trial(const ExperimentConfig& cfg, const Task& task)
{
    const Shape shape{task.n, task.n};
    const std::uint64_t key = trial_key(cfg.seed, cell_key(task.n, 3, 0.0), static_cast<std::uint64_t>(task.trial));
    auto rng = trial_rng(key);
    const AtomicModel truth = noisy_truth();
    const ComplexVector y = synthesize(shape, truth);
    const double sigma2 = cfg.sigma2_scale / task.n;
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexVector noisy = y;
    for (Index i = 0; i < noisy.size(); ++i)
    {
        const double re = normal(rng);
        const double im = normal(rng);
        noisy(i) += std::sqrt(sigma2 / 2.0) * Complex(re, im);
    }
    const Index N = shape.total();
    const auto partial = static_cast<Index>(std::lround(cfg.sample_fraction * static_cast<double>(N)));
    const auto subset = draw_samples(N, partial, rng);

    std::vector<TrialRecord> out;
    std::vector<double> fractions{1.0};
    if (cfg.sample_fraction < 1.0)
        fractions.push_back(cfg.sample_fraction);
    for (double fraction : fractions)
    {
        std::vector<Index> samples(static_cast<std::size_t>(N));
        std::iota(samples.begin(), samples.end(), Index{0});
        if (fraction < 1.0)
            samples = subset;
        const auto M = static_cast<Index>(samples.size());
        const auto obs = ObservationModel::selection(shape, std::move(samples), noisy, noise_bound(M, sigma2));
        auto recs = solve_and_score(cfg, task, obs, truth, y, key, fraction, cfg.top_r, false);
        out.insert(out.end(), recs.begin(), recs.end());
    }
    return out;
}

std::vector<Task> make_tasks(const ExperimentConfig& cfg)
{
    std::vector<Task> tasks;
    if (cfg.kind == ExperimentKind::noisy_mse)
    {
        for (int n : cfg.sizes)
            for (int t = 0; t < cfg.trials; ++t)
                tasks.push_back({n, 3, 0.0, t});
        return tasks;
    }
    for (int r : cfg.ranks)
        for (double df : cfg.delta_f)
            for (int t = 0; t < cfg.trials; ++t)
                tasks.push_back({0, r, df, t});
    return tasks;
}

std::vector<TrialRecord> run_task(const ExperimentConfig& cfg, const Task& task)
{
    switch (cfg.kind)
    {
    case ExperimentKind::decomp_sweep: return decomp_trial(cfg, task);
    case ExperimentKind::phase_transition: return phase_trial(cfg, task);
    case ExperimentKind::noisy_mse: return noisy_trial(cfg, task);
    }
    return {};
}

double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

bool same_cell(const CellSummary& s, const TrialRecord& r, bool with_method)
{
    return s.n == r.n && s.r == r.r && s.delta_f == r.delta_f && s.fraction == r.fraction &&
           (!with_method || (s.method && *s.method == r.method));
}

std::string cell_name(const CellSummary& s, ExperimentKind kind)
{
    std::ostringstream os;
    if (kind == ExperimentKind::noisy_mse)
        os << "n=" << s.n << " fraction=" << s.fraction;
    else
        os << "r=" << s.r << " delta_f=" << s.delta_f;
    if (s.method)
        os << " " << to_string(*s.method);
    return os.str();
}

} // namespace

std::vector<CellSummary> summarize(const ExperimentConfig& config, const std::vector<TrialRecord>& records)
{
    const bool with_method = config.kind != ExperimentKind::decomp_sweep;
    std::vector<CellSummary> out;
    std::vector<std::vector<const TrialRecord*>> members;
    for (const TrialRecord& rec : records)
    {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const CellSummary& s) { return same_cell(s, rec, with_method); });
        if (it == out.end())
        {
            CellSummary s;
            s.n = rec.n;
            s.r = rec.r;
            s.delta_f = rec.delta_f;
            s.fraction = rec.fraction;
            if (with_method)
                s.method = rec.method;
            out.push_back(s);
            members.emplace_back();
            it = out.end() - 1;
        }
        members[static_cast<std::size_t>(it - out.begin())].push_back(&rec);
    }
    for (std::size_t k = 0; k < out.size(); ++k)
    {
        CellSummary& s = out[k];
        std::vector<double> errs;
        double sq = 0.0;
        for (const TrialRecord* rec : members[k])
        {
            ++s.trials;
            if (rec->status == to_string(DecompStatus::pencil_degenerate))
                ++s.degenerate;
            if (!rec->generated)
                continue;
            ++s.generated;
            s.successes += rec->success ? 1 : 0;
            errs.push_back(rec->freq_err);
            sq += rec->sq_err;
        }
        if (s.generated > 0)
        {
            s.success_rate = static_cast<double>(s.successes) / s.generated;
            s.median_err = median(errs);
            s.max_err = *std::max_element(errs.begin(), errs.end());
            s.min_err = *std::min_element(errs.begin(), errs.end());
            s.mse = sq / s.generated;
        }
    }
    return out;
}

std::vector<Check> check_thresholds(const ExperimentConfig& config, const std::vector<TrialRecord>& records,
                                    const std::vector<CellSummary>& summary)
{
    const Thresholds& th = config.thresholds;
    std::vector<Check> checks;
    auto add = [&](std::string name, bool ok, std::string detail) {
        checks.push_back({std::move(name), ok, std::move(detail)});
    };

    if (config.kind == ExperimentKind::decomp_sweep)
    {
        const int minn = config.shape.min_size();
        const int bound = pencil_bound(config.shape);
        for (const CellSummary& s : summary)
        {
            std::vector<const TrialRecord*> cell;
            for (const TrialRecord& rec : records)
                if (rec.r == s.r && rec.delta_f == s.delta_f && rec.generated)
                    cell.push_back(&rec);
            const std::string where = cell_name(s, config.kind);
            if (s.r < minn && th.low_rank_rate)
            {
                const auto good = std::count_if(cell.begin(), cell.end(),
                                                [](const TrialRecord* r) { return r->freq_err < 1e-6; });
                const double rate = cell.empty() ? 0.0 : static_cast<double>(good) / cell.size();
                add("low-rank recovery " + where, rate >= *th.low_rank_rate,
                    "freq_err < 1e-6 in " + fmt(rate * 100) + "% of trials");
            }
            if (s.r >= minn && s.r <= std::min(bound, th.search_max_r))
            {
                if (th.search_rate)
                    add("search residual " + where, s.success_rate >= *th.search_rate,
                        "residual < 1e-6 in " + fmt(s.success_rate * 100) + "% of trials");
                if (th.search_median_err)
                    add("search median error " + where, s.median_err < *th.search_median_err,
                        "median freq_err " + fmt(s.median_err));
            }
            if (s.r > bound && th.degenerate_beyond_bound)
                add("pencil degeneracy " + where, s.degenerate == s.trials,
                    std::to_string(s.degenerate) + " of " + std::to_string(s.trials) + " degenerate");
        }
    }
    else if (config.kind == ExperimentKind::phase_transition)
    {
        auto find = [&](int r, double df, Method m) -> const CellSummary* {
            for (const CellSummary& s : summary)
                if (s.r == r && std::abs(s.delta_f - df) < 1e-12 && s.method == m)
                    return &s;
            return nullptr;
        };
        if (th.rwtm_dominates && has(config.methods, Method::rwtm) && has(config.methods, Method::convrelax))
        {
            for (const CellSummary& s : summary)
            {
                if (s.method != Method::rwtm)
                    continue;
                const CellSummary* cr = find(s.r, s.delta_f, Method::convrelax);
                if (!cr)
                    continue;
                add("rwtm >= convrelax r=" + std::to_string(s.r) + " delta_f=" + fmt(s.delta_f),
                    s.successes >= cr->successes,
                    "rwtm " + std::to_string(s.successes) + ", convrelax " + std::to_string(cr->successes));
            }
        }
        for (Method m : config.methods)
        {
            if (th.easy_min_rate)
                if (const CellSummary* s = find(th.easy_r, th.easy_delta_f, m))
                    add(std::string("easy cell ") + cell_name(*s, config.kind),
                        s->generated > 0 && s->success_rate >= *th.easy_min_rate,
                        "success rate " + fmt(s->success_rate));
            if (th.hard_max_rate)
                if (const CellSummary* s = find(th.hard_r, th.hard_delta_f, m))
                    add(std::string("hard cell ") + cell_name(*s, config.kind), s->success_rate <= *th.hard_max_rate,
                        "success rate " + fmt(s->success_rate));
        }
    }
    else
    {
        for (int n : config.sizes)
        {
            const CellSummary* full = nullptr;
            const CellSummary* part = nullptr;
            for (const CellSummary& s : summary)
                if (s.n == n && s.method == Method::rwtm)
                    (s.fraction == 1.0 ? full : part) = &s;
            if (!full)
                continue;
            const double full_db = 10.0 * std::log10(full->mse);
            if (th.full_mse_max)
                add("full-data MSE n=" + std::to_string(n), full->mse < *th.full_mse_max,
                    "MSE " + fmt(full->mse) + " (" + fmt(full_db) + " dB)");
            if (th.compressive_gap_db && part)
            {
                const double gap = 10.0 * std::log10(part->mse) - full_db;
                add("compressive gap n=" + std::to_string(n), gap <= *th.compressive_gap_db,
                    "partial-data MSE " + fmt(part->mse) + ", gap " + fmt(gap) + " dB");
            }
        }
    }
    return checks;
}

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    config.validate();
    const std::vector<Task> tasks = make_tasks(config);
    std::vector<std::vector<TrialRecord>> slots(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++)
            slots[i] = run_task(config, tasks[i]);
    };
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(config.parallel, tasks.size()));
    if (workers <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    ExperimentResult out;
    out.config = config;
    for (auto& s : slots)
        out.records.insert(out.records.end(), s.begin(), s.end());
    out.summary = summarize(config, out.records);
    out.checks = check_thresholds(config, out.records, out.summary);
    return out;
}

std::string records_csv(const ExperimentConfig& config, const std::vector<TrialRecord>& records, bool with_runtime)
{
    std::ostringstream os;
    const std::string rt = with_runtime ? ",runtime_s" : "";
    switch (config.kind)
    {
    case ExperimentKind::decomp_sweep:
        os << "r,delta_f,trial,seed,success,freq_err,rmse" << rt << ",status,order\n";
        for (const auto& r : records)
        {
            os << r.r << ',' << fmt(r.delta_f) << ',' << r.trial << ',' << r.seed << ',' << int(r.success) << ','
               << fmt(r.freq_err) << ',' << fmt(r.rmse);
            if (with_runtime)
                os << ',' << fmt(r.runtime_s);
            os << ',' << r.status << ',' << r.rank << '\n';
        }
        break;
    case ExperimentKind::phase_transition:
        os << "method,r,delta_f,trial,seed,generated,success,freq_err,rmse" << rt
           << ",cert,rank,outer,admm_iters,converged\n";
        for (const auto& r : records)
        {
            os << to_string(r.method) << ',' << r.r << ',' << fmt(r.delta_f) << ',' << r.trial << ',' << r.seed << ','
               << int(r.generated) << ',' << int(r.success) << ',' << fmt(r.freq_err) << ',' << fmt(r.rmse);
            if (with_runtime)
                os << ',' << fmt(r.runtime_s);
            os << ',' << r.status << ',' << r.rank << ',' << r.outer << ',' << r.admm_iters << ','
               << int(r.solver_converged) << '\n';
        }
        break;
    case ExperimentKind::noisy_mse:
        os << "method,n,fraction,trial,seed,success,freq_err,rmse,sq_err" << rt
           << ",cert,rank,outer,admm_iters,converged\n";
        for (const auto& r : records)
        {
            os << to_string(r.method) << ',' << r.n << ',' << fmt(r.fraction) << ',' << r.trial << ',' << r.seed
               << ',' << int(r.success) << ',' << fmt(r.freq_err) << ',' << fmt(r.rmse) << ',' << fmt(r.sq_err);
            if (with_runtime)
                os << ',' << fmt(r.runtime_s);
            os << ',' << r.status << ',' << r.rank << ',' << r.outer << ',' << r.admm_iters << ','
               << int(r.solver_converged) << '\n';
        }
        break;
    }
    return os.str();
}

std::string summary_csv(const ExperimentConfig& config, const std::vector<CellSummary>& summary)
{
    std::ostringstream os;
    os << "kind,method,n,r,delta_f,fraction,trials,generated,successes,success_rate,median_err,max_err,min_err,mse,"
          "degenerate\n";
    for (const auto& s : summary)
        os << to_string(config.kind) << ',' << (s.method ? to_string(*s.method) : "mapp") << ',' << s.n << ','
           << s.r << ',' << fmt(s.delta_f) << ',' << fmt(s.fraction) << ',' << s.trials << ',' << s.generated << ','
           << s.successes << ',' << fmt(s.success_rate) << ',' << fmt(s.median_err) << ',' << fmt(s.max_err) << ','
           << fmt(s.min_err) << ',' << fmt(s.mse) << ',' << s.degenerate << '\n';
    return os.str();
}

} // namespace mltvd
