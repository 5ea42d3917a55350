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

// Command line front end: decompose, superres and bench.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>

#include <CLI11.hpp>

#include "mltvd/json_io.hpp"

using namespace mltvd;

namespace
{

Shape parse_shape(const std::string& text)
{
    std::vector<int> sizes;
    std::string token;
    for (char ch : text + ",")
    {
        if (ch == ',' || ch == 'x')
        {
            if (!token.empty())
                sizes.push_back(std::stoi(token));
            token.clear();
        }
        else if (ch != ' ' && ch != '(' && ch != ')' && ch != '[' && ch != ']')
            token += ch;
    }
    return Shape(sizes);
}

void write_output(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-")
    {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw MltError("cannot write " + path);
    out << text;
}

MappMode mode_from(const std::string& name)
{
    if (name == "recursive")
        return MappMode::recursive;
    if (name == "search")
        return MappMode::search;
    return MappMode::automatic;
}

// T from {"matrix"}, {"model"}, {"sequence"}, a bare model or a bare matrix.
ComplexMatrix load_matrix(const Json& j, const Shape& shape)
{
    if (j.is_array())
        return matrix_from_json(j);
    if (j.contains("matrix"))
        return matrix_from_json(j.at("matrix"));
    if (j.contains("sequence"))
    {
        MltSequence seq(shape);
        const ComplexVector v = vector_from_json(j.at("sequence"));
        if (v.size() != seq.box_size())
            throw MltError("sequence length does not match the lag box of " + shape.to_string());
        for (Index i = 0; i < v.size(); ++i)
            seq.values()[static_cast<std::size_t>(i)] = v(i);
        return mlt_matrix(seq);
    }
    const Json& m = j.contains("model") ? j.at("model") : j;
    AtomicModel model = model_from_json(m);
    model.validate(shape.dims());
    return mlt_from_model(shape, model);
}

int run_decompose(const std::string& input, const std::string& shape_text, std::optional<int> rank, double tol,
                  const std::string& mode, const std::string& out)
{
    const Json j = read_json_file(input);
    Shape shape;
    if (!shape_text.empty())
        shape = parse_shape(shape_text);
    else if (j.is_object() && j.contains("shape"))
        shape = shape_from_json(j.at("shape"));
    else
        throw MltError("decompose: --shape is required when the input has no \"shape\"");
    const ComplexMatrix T = load_matrix(j, shape);
    MappOptions opts;
    opts.rank_tol = tol;
    const auto dec = vandermonde_decompose(T, shape, mode_from(mode), rank, opts);
    Json result = to_json(dec);
    result["shape"] = to_json(shape);
    write_output(out, result.dump(2) + "\n");
    return dec.ok() ? 0 : 2;
}

struct SuperresArgs
{
    std::string obs;
    int rbar = 0;
    std::string method = "rwtm";
    std::optional<double> eta2;
    double tol = 1e-7;
    int max_iters = 50000;
    int max_outer = 20;
    std::optional<int> top_r;
    std::uint64_t seed = 1;
    std::string out;
};

int run_superres(const SuperresArgs& a)
{
    Json j = read_json_file(a.obs);
    // {"y", "sample_count"}: draw the sample set with the given seed
    if (j.contains("y") && j.contains("sample_count") && !j.contains("samples"))
    {
        const auto n = static_cast<Index>(j.at("y").size());
        const auto m = j.at("sample_count").get<Index>();
        if (m < 1 || m > n)
            throw MltError("superres: sample_count must lie in [1, N]");
        std::vector<Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Index{0});
        std::mt19937_64 rng(a.seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(static_cast<std::size_t>(m));
        std::sort(idx.begin(), idx.end());
        j["samples"] = idx;
    }
    j.erase("sample_count");
    if (a.eta2)
        j["eta2"] = *a.eta2;
    const ObservationModel obs = observation_from_json(j);
    const LiftedProblem problem = LiftedProblem::make(obs.shape, a.rbar > 0 ? a.rbar : obs.shape.min_size());

    RwtmConfig cfg;
    cfg.admm.tol = a.tol;
    cfg.admm.max_iters = a.max_iters;
    cfg.max_outer = a.method == "convrelax" ? 1 : a.max_outer;
    const RwtmResult res = rwtm(obs, problem, cfg);
    RetrievalOptions ro;
    ro.top_r = a.top_r;
    const Retrieval ret = retrieve_and_check(res.solution, problem, ro);

    Json iterates = Json::array();
    for (const auto& it : res.trace)
        iterates.push_back(Json{{"index", it.index},
                                {"epsilon", it.epsilon},
                                {"rank", it.rank},
                                {"objective", it.objective},
                                {"surrogate", it.surrogate},
                                {"rel_change", it.rel_change},
                                {"eigenvalues", std::vector<double>(it.eigenvalues.data(),
                                                                    it.eigenvalues.data() + it.eigenvalues.size())},
                                {"stats", to_json(it.stats)}});
    Json result{{"method", a.method},
                {"lifted_shape", to_json(problem.lift.lifted)},
                {"model", to_json(ret.model)},
                {"cert", to_string(ret.cert)},
                {"rank", ret.rank},
                {"mapp_status", to_string(ret.status)},
                {"mapp_residual", ret.residual},
                {"objective", res.solution.objective},
                {"stats", to_json(res.solution.stats)},
                {"rwtm_converged", res.converged},
                {"iterate_eigenvalues", iterates},
                {"signal", to_json(base_signal(res.solution, problem))}};
    if (!ret.diagnostic.empty())
        result["diagnostic"] = ret.diagnostic;
    write_output(a.out, result.dump(2) + "\n");
    return res.solution.stats.converged ? 0 : 3;
}

struct BenchArgs
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string out;
    std::optional<int> parallel;
};

std::string summary_path(const std::string& csv)
{
    const auto dot = csv.rfind(".csv");
    return (dot != std::string::npos && dot + 4 == csv.size() ? csv.substr(0, dot) : csv) + ".summary.csv";
}

int run_bench(ExperimentKind kind, const BenchArgs& a)
{
    Json j = a.config.empty() ? Json::object() : read_json_file(a.config);
    if (j.contains("kind") && parse_kind(j.at("kind").get<std::string>()) != kind)
        throw MltError("bench: config kind does not match the subcommand");
    j["kind"] = to_string(kind);
    ExperimentConfig cfg = config_from_json(j);
    if (a.seed)
        cfg.seed = *a.seed;
    if (a.trials)
        cfg.trials = *a.trials;
    if (a.parallel)
        cfg.parallel = *a.parallel;
    if (!a.out.empty())
        cfg.out = a.out;

    const ExperimentResult res = run_experiment(cfg);
    if (cfg.out.empty())
        std::cout << records_csv(cfg, res.records);
    else
    {
        write_output(cfg.out, records_csv(cfg, res.records));
        write_output(summary_path(cfg.out), summary_csv(cfg, res.summary));
    }
    std::cerr << summary_csv(cfg, res.summary);
    for (const Check& c : res.checks)
        std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    return res.passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Vandermonde decomposition of multilevel Toeplitz matrices and 2D super-resolution"};
    app.require_subcommand(1);

    auto* dec = app.add_subcommand("decompose", "Vandermonde decomposition of a PSD multilevel Toeplitz matrix");
    std::string dec_input, dec_shape, dec_mode = "auto", dec_out;
    std::optional<int> dec_rank;
    double dec_tol = 1e-6;
    dec->add_option("input", dec_input, "JSON matrix, sequence or model")->required()->check(CLI::ExistingFile);
    dec->add_option("--shape", dec_shape, "level sizes, e.g. 6,8");
    dec->add_option("--rank", dec_rank, "rank; estimated when omitted");
    dec->add_option("--tol", dec_tol, "relative eigenvalue threshold for the rank");
    dec->add_option("--mode", dec_mode, "algorithm")->check(CLI::IsMember({"recursive", "search", "auto"}));
    dec->add_option("-o,--out", dec_out, "output file (default stdout)");

    auto* sr = app.add_subcommand("superres", "Frequency recovery from linear samples");
    SuperresArgs sa;
    sr->add_option("--obs", sa.obs, "JSON observation model")->required()->check(CLI::ExistingFile);
    sr->add_option("--rbar", sa.rbar, "lift to n'_l = max(n_l, rbar); default min n_l");
    sr->add_option("--method", sa.method, "solver")->check(CLI::IsMember({"convrelax", "rwtm"}));
    sr->add_option("--eta2", sa.eta2, "noise energy bound, overrides the file");
    sr->add_option("--tol", sa.tol, "ADMM residual tolerance");
    sr->add_option("--max-iters", sa.max_iters, "ADMM iteration cap per solve");
    sr->add_option("--max-outer", sa.max_outer, "RWTM outer iteration cap");
    sr->add_option("--top-r", sa.top_r, "keep the strongest atoms");
    sr->add_option("--seed", sa.seed, "seed for drawing sample_count samples");
    sr->add_option("-o,--out", sa.out, "output file (default stdout)");

    auto* bench = app.add_subcommand("bench", "Monte Carlo experiments");
    bench->require_subcommand(1);
    BenchArgs ba;
    std::vector<std::pair<CLI::App*, ExperimentKind>> kinds;
    for (auto [name, kind, help] :
         {std::tuple{"decomp", ExperimentKind::decomp_sweep, "decomposition sweep over the rank"},
          std::tuple{"phase", ExperimentKind::phase_transition, "sparsity versus separation phase transition"},
          std::tuple{"noisy", ExperimentKind::noisy_mse, "noisy frequency MSE, full and partial data"}})
    {
        auto* sub = bench->add_subcommand(name, help);
        sub->add_option("--config", ba.config, "JSON experiment config")->check(CLI::ExistingFile);
        sub->add_option("--seed", ba.seed, "base seed");
        sub->add_option("--trials", ba.trials, "trials per cell");
        sub->add_option("--out", ba.out, "per-trial CSV; the summary goes next to it");
        sub->add_option("--parallel", ba.parallel, "worker threads");
        kinds.emplace_back(sub, kind);
    }

    CLI11_PARSE(app, argc, argv);
    try
    {
        if (dec->parsed())
            return run_decompose(dec_input, dec_shape, dec_rank, dec_tol, dec_mode, dec_out);
        if (sr->parsed())
            return run_superres(sa);
        for (const auto& [sub, kind] : kinds)
            if (sub->parsed())
                return run_bench(kind, ba);
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
