#include "tggm/config.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "tggm/errors.hpp"
#include "tggm/io.hpp"

namespace tggm {

namespace {

std::string strip(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": bad number '" + value + "'");
    }
    if (used != value.size()) throw ConfigError(key + ": bad number '" + value + "'");
    return out;
}

long parse_long(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long out = 0;
    try {
        out = std::stol(value, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": bad integer '" + value + "'");
    }
    if (used != value.size()) throw ConfigError(key + ": bad integer '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(key + ": bad flag '" + value + "' (use true/false)");
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "model",          "nu",
        "alpha",          "alpha_prior_a",
        "alpha_prior_b",  "delta",
        "phi_scale",      "d",
        "sigma_mu",       "seed",
        "edge_proposals", "proposals_per_edge",
        "tau_every",      "recluster_every",
        "burn_in_frac",   "mu_mode",
        "include_graph_prior", "proposal_weighting",
        "tau_init",       "tau_quantile",
        "trace_every",    "checkpoint_every",
        "checkpoint_path", "record_mu_trace",
    };
    return keys;
}

}  // namespace

KeyValues read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = strip(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = strip(line.substr(0, eq));
        std::string value = strip(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

void apply_override(KeyValues& kv, const std::string& key, const std::string& value) {
    kv[key] = value;
}

ChainConfig chain_config_from(const KeyValues& kv, int p) {
    for (const auto& [key, value] : kv) {
        (void)value;
        if (known_keys().count(key) == 0) throw ConfigError("unknown config key '" + key + "'");
    }

    ChainConfig cfg;
    auto get = [&kv](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    if (auto* v = get("model")) cfg.model = parse_model_kind(*v);
    if (auto* v = get("nu")) cfg.nu = parse_double("nu", *v);
    if (auto* v = get("alpha")) cfg.alpha = parse_double("alpha", *v);
    if (auto* v = get("alpha_prior_a")) cfg.alpha_prior_a = parse_double("alpha_prior_a", *v);
    if (auto* v = get("alpha_prior_b")) cfg.alpha_prior_b = parse_double("alpha_prior_b", *v);
    if (auto* v = get("delta")) cfg.delta = parse_double("delta", *v);
    if (auto* v = get("phi_scale")) cfg.phi_scale = parse_double("phi_scale", *v);
    if (auto* v = get("d")) cfg.d = parse_double("d", *v);
    if (auto* v = get("sigma_mu")) cfg.sigma_mu = parse_double("sigma_mu", *v);
    if (auto* v = get("seed")) cfg.seed = static_cast<std::uint64_t>(parse_long("seed", *v));
    if (auto* v = get("tau_every")) cfg.tau_every = parse_long("tau_every", *v);
    if (auto* v = get("recluster_every")) cfg.recluster_every = parse_long("recluster_every", *v);
    if (auto* v = get("burn_in_frac")) cfg.burn_in_frac = parse_double("burn_in_frac", *v);
    if (auto* v = get("mu_mode")) cfg.mu_mode = parse_mu_mode(*v);
    if (auto* v = get("include_graph_prior"))
        cfg.include_graph_prior = parse_bool("include_graph_prior", *v);
    if (auto* v = get("proposal_weighting")) cfg.proposal_weighting = parse_proposal_weighting(*v);
    if (auto* v = get("tau_quantile")) cfg.tau_quantile = parse_double("tau_quantile", *v);
    if (auto* v = get("trace_every")) cfg.trace_every = parse_long("trace_every", *v);
    if (auto* v = get("checkpoint_every")) cfg.checkpoint_every = parse_long("checkpoint_every", *v);
    if (auto* v = get("checkpoint_path")) cfg.checkpoint_path = *v;
    if (auto* v = get("record_mu_trace")) cfg.record_mu_trace = parse_bool("record_mu_trace", *v);

    const std::string* ep = get("edge_proposals");
    const std::string* ppe = get("proposals_per_edge");
    if (ep && ppe)
        throw ConfigError("give edge_proposals or proposals_per_edge, not both");
    if (!ep && !ppe)
        throw ConfigError("one of edge_proposals or proposals_per_edge is required");
    if (ep) {
        cfg.edge_proposals = parse_long("edge_proposals", *ep);
    } else {
        long per = parse_long("proposals_per_edge", *ppe);
        if (per < 0) throw ConfigError("proposals_per_edge: must be nonnegative");
        if (p < 2) throw ConfigError("proposals_per_edge: needs at least two variables");
        cfg.edge_proposals = per * (static_cast<long>(p) * (p - 1) / 2);
    }

    if (auto* v = get("tau_init")) {
        if (*v == "ones") {
            cfg.tau_init = TauInitKind::Ones;
        } else if (*v == "warmup") {
            cfg.tau_init = TauInitKind::Warmup;
        } else if (v->rfind("file:", 0) == 0) {
            std::string path = v->substr(5);
            if (path.empty()) throw ConfigError("tau_init: empty file path");
            cfg.tau_init = TauInitKind::File;
            cfg.tau_init_values = read_dense_matrix(path);
        } else {
            throw ConfigError("tau_init: expected ones, warmup, or file:<path>");
        }
    }

    return cfg;
}

}  // namespace tggm
