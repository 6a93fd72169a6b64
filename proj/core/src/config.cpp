#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "simineq/error.hpp"
#include "simineq/harness.hpp"

namespace simineq {
namespace {

using nlohmann::json;

void check_keys(json const& obj,
                std::set<std::string> const& allowed,
                std::string const& prefix)
{
    for (auto const& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ConfigError(prefix + key, "unknown key");
}

std::size_t get_count(json const& v, std::string const& key)
{
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(key, "expected a nonnegative integer");
    return v.get<std::size_t>();
}

double get_real(json const& v, std::string const& key)
{
    if (!v.is_number())
        throw ConfigError(key, "expected a number");
    return v.get<double>();
}

bool get_bool(json const& v, std::string const& key)
{
    if (!v.is_boolean())
        throw ConfigError(key, "expected true or false");
    return v.get<bool>();
}

std::string get_string(json const& v, std::string const& key)
{
    if (!v.is_string())
        throw ConfigError(key, "expected a string");
    return v.get<std::string>();
}

std::vector<std::size_t> get_counts(json const& v, std::string const& key)
{
    if (!v.is_array())
        throw ConfigError(key, "expected a list of integers");
    std::vector<std::size_t> out;
    for (auto const& x : v)
        out.push_back(get_count(x, key));
    return out;
}

ModelSpec parse_model(json const& v)
{
    ModelSpec spec;
    auto kind_of = [](std::string const& name) {
        if (name == "intersection")
            return ModelKind::intersection;
        if (name == "entry")
            return ModelKind::entry;
        throw ConfigError("model", "unknown model '" + name + "'");
    };
    if (v.is_string())
    {
        spec.kind = kind_of(v.get<std::string>());
        return spec;
    }
    if (!v.is_object())
        throw ConfigError("model", "expected a string or an object");
    check_keys(v, {"kind", "slackDesign", "firstStage", "entry"}, "model.");
    if (!v.contains("kind"))
        throw ConfigError("model.kind", "missing");
    spec.kind = kind_of(get_string(v["kind"], "model.kind"));
    if (v.contains("slackDesign"))
        spec.slack_design = get_bool(v["slackDesign"], "model.slackDesign");
    if (v.contains("firstStage") && !v["firstStage"].is_null())
        spec.first_stage = get_count(v["firstStage"], "model.firstStage");
    if (v.contains("entry"))
    {
        auto const& e = v["entry"];
        if (!e.is_object())
            throw ConfigError("model.entry", "expected an object");
        check_keys(e, {"beta", "delta", "selectProb"}, "model.entry.");
        if (e.contains("beta"))
            spec.entry.beta = get_real(e["beta"], "model.entry.beta");
        if (e.contains("delta"))
            spec.entry.delta = get_real(e["delta"], "model.entry.delta");
        if (e.contains("selectProb"))
            spec.entry.select_prob
                = get_real(e["selectProb"], "model.entry.selectProb");
    }
    if (spec.kind == ModelKind::entry
        && (spec.slack_design || spec.first_stage))
        throw ConfigError("model",
                          "slackDesign and firstStage apply to intersection");
    return spec;
}

MethodSpec parse_method(json const& v)
{
    MethodSpec m;
    if (v.is_string())
    {
        try
        {
            m.method = method_kind_from_string(v.get<std::string>());
        }
        catch (ParameterError const& e)
        {
            throw ConfigError("methods", e.what());
        }
        return m;
    }
    if (!v.is_object())
        throw ConfigError("methods", "expected a string or an object");
    check_keys(v,
               {"method", "analytic", "B", "kappa", "mu", "R2",
                "criticalValue"},
               "methods.");
    if (!v.contains("method"))
        throw ConfigError("methods.method", "missing");
    try
    {
        m.method = method_kind_from_string(
            get_string(v["method"], "methods.method"));
    }
    catch (ParameterError const& e)
    {
        throw ConfigError("methods.method", e.what());
    }
    if (v.contains("analytic"))
        m.analytic = get_bool(v["analytic"], "methods.analytic");
    if (v.contains("B"))
        m.B = get_count(v["B"], "methods.B");
    if (v.contains("kappa"))
    {
        try
        {
            m.kappa = kappa_rule_from_string(
                get_string(v["kappa"], "methods.kappa"));
        }
        catch (ParameterError const& e)
        {
            throw ConfigError("methods.kappa", e.what());
        }
    }
    if (v.contains("mu"))
        m.mu = get_real(v["mu"], "methods.mu");
    if (v.contains("R2"))
        m.R2 = get_count(v["R2"], "methods.R2");
    if (v.contains("criticalValue") && !v["criticalValue"].is_null())
        m.critical_value = get_real(v["criticalValue"], "methods.criticalValue");
    return m;
}

}  // namespace

ExperimentConfig parse_config(std::string const& text)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (json::parse_error const& e)
    {
        throw ConfigError("<document>", e.what());
    }
    if (!root.is_object())
        throw ConfigError("<document>", "expected an object");
    check_keys(root,
               {"model", "nValues", "RValues", "JValues", "reps", "alpha",
                "methods", "masterSeed", "parallelism"},
               "");

    ExperimentConfig cfg;
    if (!root.contains("model"))
        throw ConfigError("model", "missing");
    cfg.model = parse_model(root["model"]);
    if (root.contains("nValues"))
        cfg.n_values = get_counts(root["nValues"], "nValues");
    if (root.contains("RValues"))
        cfg.R_values = get_counts(root["RValues"], "RValues");
    if (root.contains("JValues"))
        cfg.J_values = get_counts(root["JValues"], "JValues");
    else if (cfg.model.kind == ModelKind::entry)
        cfg.J_values = {2 * cfg.model.entry.cells()};
    if (root.contains("reps"))
        cfg.reps = get_count(root["reps"], "reps");
    if (root.contains("alpha"))
        cfg.alpha = get_real(root["alpha"], "alpha");
    if (!root.contains("methods"))
        throw ConfigError("methods", "missing");
    if (!root["methods"].is_array())
        throw ConfigError("methods", "expected a list");
    for (auto const& m : root["methods"])
        cfg.methods.push_back(parse_method(m));
    if (root.contains("masterSeed"))
    {
        auto const& s = root["masterSeed"];
        if (!s.is_number_integer())
            throw ConfigError("masterSeed", "expected an integer");
        cfg.master_seed = s.is_number_unsigned()
                              ? s.get<std::uint64_t>()
                              : static_cast<std::uint64_t>(s.get<long long>());
    }
    if (root.contains("parallelism"))
        cfg.parallelism = get_count(root["parallelism"], "parallelism");
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(std::string const& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("<file>", "cannot read '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return parse_config(os.str());
}

std::string config_to_string(ExperimentConfig const& cfg)
{
    json model;
    model["kind"] = cfg.model.kind == ModelKind::entry ? "entry"
                                                       : "intersection";
    if (cfg.model.kind == ModelKind::entry)
    {
        model["entry"] = {{"beta", cfg.model.entry.beta},
                          {"delta", cfg.model.entry.delta},
                          {"selectProb", cfg.model.entry.select_prob}};
    }
    else
    {
        model["slackDesign"] = cfg.model.slack_design;
        if (cfg.model.first_stage)
            model["firstStage"] = *cfg.model.first_stage;
    }

    json methods = json::array();
    for (auto const& m : cfg.methods)
    {
        json j;
        j["method"] = std::string(to_string(m.method));
        j["analytic"] = m.analytic;
        if (m.method != MethodKind::naive)
            j["B"] = m.B;
        if (m.method == MethodKind::gms)
            j["kappa"] = std::string(to_string(m.kappa));
        if (m.method == MethodKind::smooth)
        {
            j["mu"] = m.mu;
            j["R2"] = m.R2;
        }
        if (m.critical_value)
            j["criticalValue"] = *m.critical_value;
        methods.push_back(j);
    }

    json root;
    root["model"] = model;
    root["nValues"] = cfg.n_values;
    root["RValues"] = cfg.R_values;
    root["JValues"] = cfg.J_values;
    root["reps"] = cfg.reps;
    root["alpha"] = cfg.alpha;
    root["methods"] = methods;
    root["masterSeed"] = cfg.master_seed;
    root["parallelism"] = cfg.parallelism;
    return root.dump(2);
}

}  // namespace simineq
