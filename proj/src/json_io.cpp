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

#include "mltvd/json_io.hpp"

#include <fstream>
#include <set>

namespace mltvd
{

namespace
{

const Json& need(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw MltError(std::string("JSON: missing key \"") + key + "\"");
    return j.at(key);
}

template <class T>
T get_as(const Json& j, const char* what)
{
    try
    {
        return j.get<T>();
    }
    catch (const nlohmann::json::exception&)
    {
        throw MltError(std::string("JSON: bad value for ") + what);
    }
}

MappMode parse_mode(const std::string& name)
{
    if (name == "recursive")
        return MappMode::recursive;
    if (name == "search")
        return MappMode::search;
    if (name == "auto" || name == "automatic")
        return MappMode::automatic;
    throw MltError("unknown MaPP mode: " + name);
}

} // namespace

Json to_json(Complex c)
{
    return Json::array({c.real(), c.imag()});
}

Complex complex_from_json(const Json& j)
{
    if (j.is_number())
        return Complex(j.get<double>(), 0.0);
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw MltError("JSON: complex numbers are [re, im] pairs");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

Json to_json(const Shape& shape)
{
    return Json(shape.sizes());
}

Shape shape_from_json(const Json& j)
{
    return Shape(get_as<std::vector<int>>(j, "shape"));
}

Json to_json(const ComplexVector& v)
{
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i)
        out.push_back(to_json(v(i)));
    return out;
}

ComplexVector vector_from_json(const Json& j)
{
    if (!j.is_array())
        throw MltError("JSON: expected an array of complex numbers");
    ComplexVector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Index>(i)) = complex_from_json(j[i]);
    return v;
}

Json to_json(const ComplexMatrix& m)
{
    Json out = Json::array();
    for (Index r = 0; r < m.rows(); ++r)
        out.push_back(to_json(ComplexVector(m.row(r).transpose())));
    return out;
}

ComplexMatrix matrix_from_json(const Json& j)
{
    if (!j.is_array() || j.empty())
        throw MltError("JSON: expected a nonempty array of rows");
    const auto cols = static_cast<Index>(j[0].size());
    ComplexMatrix m(static_cast<Index>(j.size()), cols);
    for (std::size_t r = 0; r < j.size(); ++r)
    {
        const ComplexVector row = vector_from_json(j[r]);
        if (row.size() != cols)
            throw MltError("JSON: matrix rows differ in length");
        m.row(static_cast<Index>(r)) = row.transpose();
    }
    return m;
}

Json to_json(const AtomicModel& model)
{
    Json freqs = Json::array();
    for (const auto& f : model.freqs)
        freqs.push_back(f.coords());
    Json out{{"freqs", freqs}, {"powers", model.powers}};
    if (!model.amplitudes.empty())
    {
        Json amps = Json::array();
        for (Complex c : model.amplitudes)
            amps.push_back(to_json(c));
        out["amplitudes"] = amps;
    }
    return out;
}

AtomicModel model_from_json(const Json& j)
{
    AtomicModel m;
    for (const auto& f : need(j, "freqs"))
        m.freqs.emplace_back(get_as<std::vector<double>>(f, "freqs"));
    if (j.contains("amplitudes"))
    {
        for (const auto& c : j.at("amplitudes"))
            m.amplitudes.push_back(complex_from_json(c));
        if (!j.contains("powers"))
            return AtomicModel::from_amplitudes(std::move(m.freqs), std::move(m.amplitudes));
    }
    m.powers = get_as<std::vector<double>>(need(j, "powers"), "powers");
    return m;
}

Json to_json(const VandermondeDecomposition& dec)
{
    return Json{{"status", to_string(dec.status)},
                {"diagnostic", dec.diagnostic},
                {"order", dec.order},
                {"residual", dec.residual},
                {"model", to_json(dec.model)}};
}

ObservationModel observation_from_json(const Json& j)
{
    ObservationModel obs;
    obs.shape = shape_from_json(need(j, "shape"));
    obs.eta2 = j.contains("eta2") ? get_as<double>(j.at("eta2"), "eta2") : 0.0;
    if (j.contains("y"))
    {
        const ComplexVector y = vector_from_json(j.at("y"));
        if (j.contains("samples"))
            return ObservationModel::selection(obs.shape, get_as<std::vector<Index>>(j.at("samples"), "samples"), y,
                                               obs.eta2);
        return ObservationModel::full(obs.shape, y, obs.eta2);
    }
    obs.z = vector_from_json(need(j, "z"));
    if (j.contains("sensing"))
        obs.sensing = matrix_from_json(j.at("sensing"));
    else
        obs.samples = get_as<std::vector<Index>>(need(j, "samples"), "samples");
    obs.validate();
    return obs;
}

Json to_json(const ObservationModel& obs)
{
    Json out{{"shape", to_json(obs.shape)}, {"z", to_json(obs.z)}, {"eta2", obs.eta2}};
    if (obs.sensing)
        out["sensing"] = to_json(*obs.sensing);
    else
        out["samples"] = obs.samples;
    return out;
}

Json to_json(const SolverStats& stats)
{
    return Json{{"iterations", stats.iterations},
                {"primal_residual", stats.primal_residual},
                {"dual_residual", stats.dual_residual},
                {"rho", stats.rho},
                {"converged", stats.converged}};
}

ExperimentConfig config_from_json(const Json& j)
{
    if (!j.is_object())
        throw MltError("JSON: experiment config must be an object");
    ExperimentConfig c = ExperimentConfig::defaults(parse_kind(get_as<std::string>(need(j, "kind"), "kind")));
    static const std::set<std::string> known{"kind",   "shape",  "sizes",   "trials",          "ranks",
                                             "delta_f", "samples", "sample_fraction", "sigma2_scale", "seed",
                                             "methods", "rbar",   "mapp_mode", "admm",          "rwtm_max_outer",
                                             "top_r",  "parallel", "out",     "thresholds"};
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            throw MltError("JSON: unknown config key \"" + item.key() + "\"");

    if (j.contains("shape"))
        c.shape = shape_from_json(j.at("shape"));
    if (j.contains("sizes"))
        c.sizes = get_as<std::vector<int>>(j.at("sizes"), "sizes");
    if (j.contains("trials"))
        c.trials = get_as<int>(j.at("trials"), "trials");
    if (j.contains("ranks"))
        c.ranks = get_as<std::vector<int>>(j.at("ranks"), "ranks");
    if (j.contains("delta_f"))
        c.delta_f = get_as<std::vector<double>>(j.at("delta_f"), "delta_f");
    if (j.contains("samples"))
        c.samples = get_as<int>(j.at("samples"), "samples");
    if (j.contains("sample_fraction"))
        c.sample_fraction = get_as<double>(j.at("sample_fraction"), "sample_fraction");
    if (j.contains("sigma2_scale"))
        c.sigma2_scale = get_as<double>(j.at("sigma2_scale"), "sigma2_scale");
    if (j.contains("seed"))
        c.seed = get_as<std::uint64_t>(j.at("seed"), "seed");
    if (j.contains("methods"))
    {
        c.methods.clear();
        for (const auto& m : j.at("methods"))
            c.methods.push_back(parse_method(get_as<std::string>(m, "methods")));
    }
    if (j.contains("rbar"))
        c.rbar = get_as<int>(j.at("rbar"), "rbar");
    if (j.contains("mapp_mode"))
        c.mapp_mode = parse_mode(get_as<std::string>(j.at("mapp_mode"), "mapp_mode"));
    if (j.contains("admm"))
    {
        const Json& a = j.at("admm");
        if (a.contains("tol"))
            c.admm.tol = get_as<double>(a.at("tol"), "admm.tol");
        if (a.contains("max_iters"))
            c.admm.max_iters = get_as<int>(a.at("max_iters"), "admm.max_iters");
        if (a.contains("rho"))
            c.admm.rho = get_as<double>(a.at("rho"), "admm.rho");
    }
    if (j.contains("rwtm_max_outer"))
        c.rwtm_max_outer = get_as<int>(j.at("rwtm_max_outer"), "rwtm_max_outer");
    if (j.contains("top_r"))
        c.top_r = get_as<int>(j.at("top_r"), "top_r");
    if (j.contains("parallel"))
        c.parallel = get_as<int>(j.at("parallel"), "parallel");
    if (j.contains("out"))
        c.out = get_as<std::string>(j.at("out"), "out");
    if (j.contains("thresholds"))
    {
        const Json& t = j.at("thresholds");
        Thresholds& th = c.thresholds;
        auto opt = [&](const char* key, std::optional<double>& dst) {
            if (!t.contains(key))
                return;
            if (t.at(key).is_null())
                dst.reset();
            else
                dst = get_as<double>(t.at(key), key);
        };
        opt("low_rank_rate", th.low_rank_rate);
        opt("search_rate", th.search_rate);
        opt("search_median_err", th.search_median_err);
        opt("easy_min_rate", th.easy_min_rate);
        opt("hard_max_rate", th.hard_max_rate);
        opt("full_mse_max", th.full_mse_max);
        opt("compressive_gap_db", th.compressive_gap_db);
        if (t.contains("search_max_r"))
            th.search_max_r = get_as<int>(t.at("search_max_r"), "search_max_r");
        if (t.contains("degenerate_beyond_bound"))
            th.degenerate_beyond_bound = get_as<bool>(t.at("degenerate_beyond_bound"), "degenerate_beyond_bound");
        if (t.contains("rwtm_dominates"))
            th.rwtm_dominates = get_as<bool>(t.at("rwtm_dominates"), "rwtm_dominates");
        if (t.contains("easy_r"))
            th.easy_r = get_as<int>(t.at("easy_r"), "easy_r");
        if (t.contains("easy_delta_f"))
            th.easy_delta_f = get_as<double>(t.at("easy_delta_f"), "easy_delta_f");
        if (t.contains("hard_r"))
            th.hard_r = get_as<int>(t.at("hard_r"), "hard_r");
        if (t.contains("hard_delta_f"))
            th.hard_delta_f = get_as<double>(t.at("hard_delta_f"), "hard_delta_f");
    }
    c.validate();
    return c;
}

Json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw MltError("cannot open " + path);
    try
    {
        return Json::parse(in);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw MltError(path + ": " + e.what());
    }
}

} // namespace mltvd
