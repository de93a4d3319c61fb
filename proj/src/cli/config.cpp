#include "cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <toml.hpp>

#include "collapse_lab/engine.hpp"
#include "collapse_lab/spike_mixture.hpp"
#include "collapse_lab/tail_chain.hpp"

namespace collapse_lab::cli {

namespace {

using nlohmann::json;

const std::set<std::string> kRequired{"family", "theta_star", "n", "T", "seed", "replications", "mle_mode"};
const std::set<std::string> kOptional{"metrics", "collapse_threshold", "output_dir", "plot", "N",
                                      "log_f_mode", "E", "phi", "C", "delta", "min_J"};

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what);
}

double number(const json& doc, const std::string& key) {
    const json& v = doc.at(key);
    if (!v.is_number()) bad(key, "expected a number");
    return v.get<double>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    bad(key, "expected a non-negative integer");
}

std::string text(const json& doc, const std::string& key) {
    const json& v = doc.at(key);
    if (!v.is_string()) bad(key, "expected a string");
    return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& key) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) bad(key, "expected a number or an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
        if (!e.is_number()) bad(key, "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

json convert(const toml::node& node) {
    if (const auto* t = node.as_table()) {
        json obj = json::object();
        for (const auto& [k, v] : *t) obj[std::string(k.str())] = convert(v);
        return obj;
    }
    if (const auto* a = node.as_array()) {
        json arr = json::array();
        for (const auto& v : *a) arr.push_back(convert(v));
        return arr;
    }
    if (const auto* s = node.as_string()) return s->get();
    if (const auto* i = node.as_integer()) return i->get();
    if (const auto* f = node.as_floating_point()) return f->get();
    if (const auto* b = node.as_boolean()) return b->get();
    throw ConfigError("unsupported TOML value (dates and times are not accepted)");
}

}  // namespace

json toml_to_json(std::string_view text) {
    try {
        return convert(toml::parse(text));
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
        throw ConfigError(msg.str());
    }
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("configuration must be a table/object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (!kRequired.count(key) && !kOptional.count(key)) bad(key, "unknown key");
    }
    for (const std::string& key : kRequired) {
        if (!doc.contains(key)) bad(key, "missing required key");
    }

    ExperimentConfig cfg;
    cfg.echo = doc;
    RunConfig& run = cfg.run;

    const std::string family_text = text(doc, "family");
    const auto family = parse_family(family_text);
    if (!family) bad("family", "unknown family '" + family_text + "'");

    ConstructionOptions& c = run.construction;
    if (doc.contains("N")) {
        const auto N = unsigned_integer(doc.at("N"), "N");
        if (N < 1 || N > 1000000) bad("N", "expected an integer in [1, 1e6]");
        c.spike_scale = static_cast<int>(N);
    }
    if (doc.contains("log_f_mode")) {
        const std::string mode = text(doc, "log_f_mode");
        if (mode == "demo") {
            c.width_mode = SpikeWidthMode::demo;
        } else if (mode == "paper") {
            c.width_mode = SpikeWidthMode::paper;
        } else {
            bad("log_f_mode", "expected 'demo' or 'paper'");
        }
    }
    if (doc.contains("E")) c.budget_exponent = number(doc, "E");
    if (doc.contains("phi")) c.phi = text(doc, "phi");
    if (doc.contains("C")) c.psi_constant = number(doc, "C");
    if (doc.contains("delta")) c.delta = number(doc, "delta");
    if (doc.contains("min_J")) {
        const auto j = unsigned_integer(doc.at("min_J"), "min_J");
        if (j < 2 || j > 1000000) bad("min_J", "expected an integer >= 2");
        c.min_J = static_cast<int>(j);
    }
    if (*family == FamilyId::tail_chain) {
        try {
            tail::TailChainFamily::from_options(c);
        } catch (const Error& e) {
            bad("log_f_mode", e.what());
        }
    }

    const std::vector<double> theta = numbers(doc.at("theta_star"), "theta_star");
    switch (*family) {
        case FamilyId::spike_mixture:
            if (theta.size() != 2) bad("theta_star", "spike_mixture expects [alpha, mu]");
            run.theta_star = spike::to_point({theta[0], theta[1]});
            break;
        case FamilyId::tail_chain:
            for (double a : theta) {
                if (!(a >= 0.0 && a <= 0.25)) bad("theta_star", "tail_chain expects alphas in [0, 1/4]");
            }
            run.theta_star = tail::to_point(tail::TailChainParams::make_h(theta));
            break;
        default:
            run.theta_star = {*family, theta};
    }
    try {
        engine::validate_point(run.theta_star, c);
    } catch (const Error& e) {
        bad("theta_star", e.what());
    }

    const json& n = doc.at("n");
    if (n.is_array()) {
        for (const json& e : n) cfg.ns.push_back(unsigned_integer(e, "n"));
    } else {
        cfg.ns.push_back(unsigned_integer(n, "n"));
    }
    if (cfg.ns.empty()) bad("n", "expected at least one sample size");
    for (std::size_t v : cfg.ns) {
        if (v == 0) bad("n", "sample sizes must be >= 1");
    }
    run.n = cfg.ns.front();
    run.T = unsigned_integer(doc.at("T"), "T");
    run.master_seed = unsigned_integer(doc.at("seed"), "seed");
    cfg.replications = unsigned_integer(doc.at("replications"), "replications");
    if (cfg.replications == 0) bad("replications", "expected >= 1");

    const std::string mode = text(doc, "mle_mode");
    if (mode == "exact") {
        run.mle_mode = MleMode::exact;
    } else if (mode == "numeric") {
        run.mle_mode = MleMode::numeric;
        if (!is_smooth(*family)) bad("mle_mode", "numeric mode is only available for smooth families");
    } else {
        bad("mle_mode", "expected 'exact' or 'numeric'");
    }

    if (doc.contains("metrics")) {
        const json& m = doc.at("metrics");
        if (!m.is_array()) bad("metrics", "expected an array of metric names");
        run.metrics = {false, false, false};
        for (const json& e : m) {
            const std::string name = e.is_string() ? e.get<std::string>() : "";
            if (name == "param_error") {
                run.metrics.param_error = true;
            } else if (name == "tv") {
                run.metrics.tv = true;
            } else if (name == "kl") {
                run.metrics.kl = true;
            } else {
                bad("metrics", "unknown metric '" + name + "' (expected param_error, tv, kl)");
            }
        }
    }
    if (doc.contains("collapse_threshold")) {
        run.collapse_threshold = number(doc, "collapse_threshold");
        if (!(run.collapse_threshold > 0.0 && run.collapse_threshold <= 1.0)) {
            bad("collapse_threshold", "expected a value in (0, 1]");
        }
    }
    if (doc.contains("output_dir")) cfg.output_dir = text(doc, "output_dir");
    if (doc.contains("plot")) {
        if (!doc.at("plot").is_boolean()) bad("plot", "expected true or false");
        cfg.plot = doc.at("plot").get<bool>();
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string ext = path.extension().string();
    if (ext == ".toml") {
        return parse_config(toml_to_json(buf.str()));
    }
    if (ext == ".json") {
        json doc;
        try {
            doc = json::parse(buf.str());
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("JSON parse error: ") + e.what());
        }
        return parse_config(doc);
    }
    throw ConfigError("config file must end in .toml or .json: '" + path.string() + "'");
}

}  // namespace collapse_lab::cli
