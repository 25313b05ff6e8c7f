#include "harvest/config.hpp"

#include "harvest/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace harvest {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) { fail(ErrorKind::Config, "cli", "config: " + what); }

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) schema_error(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!ok.count(item.key())) schema_error("unknown field '" + item.key() + "' in " + where);
    }
}

double number(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) schema_error(where + " requires '" + key + "'");
    const json& v = obj.at(key);
    if (!v.is_number()) schema_error(where + "." + key + " must be a number");
    return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

std::size_t count_or(const json& obj, const char* key, std::size_t fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) schema_error(where + "." + key + " must be a positive integer");
    return static_cast<std::size_t>(v.get<long long>());
}

bool flag_or(const json& obj, const char* key, bool fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean()) schema_error(where + "." + key + " must be a boolean");
    return obj.at(key).get<bool>();
}

ModelSpec model_from(const json& j) {
    only_keys(j, "model", {"family", "params", "discount", "yield"});
    if (!j.contains("family") || !j.at("family").is_string()) schema_error("model.family must be a string");
    if (!j.contains("params")) schema_error("model requires 'params'");
    if (!j.contains("yield")) schema_error("model requires 'yield'");
    const std::string fam = j.at("family").get<std::string>();
    const json& p = j.at("params");
    Family family;
    if (fam == "drifted_bm") {
        only_keys(p, "model.params", {"mu", "sigma"});
        family = DriftedBM{number(p, "mu", "model.params"), number(p, "sigma", "model.params")};
    } else if (fam == "gbm") {
        only_keys(p, "model.params", {"mu", "sigma"});
        family = GBM{number(p, "mu", "model.params"), number(p, "sigma", "model.params")};
    } else if (fam == "logistic") {
        only_keys(p, "model.params", {"mu", "K", "sigma"});
        family = Logistic{number(p, "mu", "model.params"), number(p, "K", "model.params"),
                          number(p, "sigma", "model.params")};
    } else {
        schema_error("model.family must be one of drifted_bm, gbm, logistic (got '" + fam + "')");
    }
    const double r = number(j, "discount", "model");

    const json& y = j.at("yield");
    only_keys(y, "model.yield", {"kind", "params"});
    if (!y.contains("kind") || !y.at("kind").is_string()) schema_error("model.yield.kind must be a string");
    if (!y.contains("params")) schema_error("model.yield requires 'params'");
    const std::string kind = y.at("kind").get<std::string>();
    const json& yp = y.at("params");
    YieldFn yield;
    if (kind == "constant") {
        only_keys(yp, "model.yield.params", {"p"});
        yield = ConstantYield{number(yp, "p", "model.yield.params")};
    } else if (kind == "exponential" || kind == "rational") {
        only_keys(yp, "model.yield.params", {"p", "alpha"});
        const double pv = number(yp, "p", "model.yield.params");
        const double alpha = number(yp, "alpha", "model.yield.params");
        if (alpha < 0.0) schema_error("model.yield.params.alpha must be >= 0 (yield must be nonincreasing)");
        if (kind == "exponential") {
            yield = ExponentialYield{pv, alpha};
        } else {
            yield = RationalYield{pv, alpha};
        }
    } else {
        schema_error("model.yield.kind must be one of constant, exponential, rational (got '" + kind + "')");
    }
    return ModelSpec(family, r, yield);
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        schema_error(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

ModelSpec parse_model(std::string_view json_text) { return model_from(parse_json(json_text)); }

RunConfig parse_config(std::string_view json_text) {
    const json j = parse_json(json_text);
    only_keys(j, "config", {"model", "x0", "grid", "sim", "lp", "chatter", "output"});
    if (!j.contains("model")) schema_error("config requires 'model'");
    RunConfig cfg{model_from(j.at("model")), {}, {}, std::nullopt, {}, {1, 2, 4, 8, 16, 32, 64}, {}};

    if (j.contains("x0")) {
        const json& xs = j.at("x0");
        if (!xs.is_array()) schema_error("x0 must be an array of numbers");
        for (const json& v : xs) {
            if (!v.is_number()) schema_error("x0 entries must be numbers");
            const double x = v.get<double>();
            if (!(x > 0.0) || !std::isfinite(x)) {
                std::ostringstream msg;
                msg << "x0 entries must be > 0 (got " << x << ")";
                schema_error(msg.str());
            }
            cfg.x0.push_back(x);
        }
    }

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        only_keys(g, "grid", {"x_max", "linear_nodes", "log_nodes_per_decade", "closed_form"});
        cfg.grid.x_max = number_or(g, "x_max", 0.0, "grid");
        cfg.grid.linear_nodes = static_cast<int>(count_or(g, "linear_nodes", 2000, "grid"));
        cfg.grid.log_nodes_per_decade = static_cast<int>(count_or(g, "log_nodes_per_decade", 40, "grid"));
        cfg.grid.use_closed_form = flag_or(g, "closed_form", true, "grid");
    }
    for (double x : cfg.x0) cfg.grid.x_hint = std::max(cfg.grid.x_hint, x);

    if (j.contains("sim")) {
        const json& s = j.at("sim");
        only_keys(s, "sim", {"dt", "T", "paths", "seed", "threads", "bridge_extinction"});
        if (!s.contains("seed")) schema_error("sim requires 'seed' so simulations are reproducible");
        if (!s.at("seed").is_number_unsigned()) schema_error("sim.seed must be a nonnegative integer");
        SimConfig sc;
        sc.dt = number_or(s, "dt", 1e-3 / cfg.model.discount(), "sim");
        sc.horizon = number_or(s, "T", 0.0, "sim");
        sc.n_paths = count_or(s, "paths", sc.n_paths, "sim");
        sc.seed = s.at("seed").get<std::uint64_t>();
        sc.threads = static_cast<unsigned>(s.contains("threads") ? count_or(s, "threads", 1, "sim") : 0);
        sc.bridge_extinction = flag_or(s, "bridge_extinction", true, "sim");
        validate(cfg.model, sc);
        cfg.sim = sc;
    }

    if (j.contains("lp")) {
        const json& l = j.at("lp");
        only_keys(l, "lp", {"states", "jump_levels", "x_max", "basis", "psi_row", "tau_at_states", "mu1star_intervals"});
        cfg.lp.grid.n_states = count_or(l, "states", cfg.lp.grid.n_states, "lp");
        cfg.lp.grid.jump_levels = static_cast<int>(count_or(l, "jump_levels", 16, "lp"));
        cfg.lp.grid.x_max = number_or(l, "x_max", 0.0, "lp");
        cfg.lp.grid.tau_at_states = flag_or(l, "tau_at_states", false, "lp");
        cfg.lp.basis_size = count_or(l, "basis", cfg.lp.basis_size, "lp");
        cfg.lp.psi_row = flag_or(l, "psi_row", true, "lp");
        if (l.contains("mu1star_intervals")) {
            const json& iv = l.at("mu1star_intervals");
            if (!iv.is_array() || iv.empty()) schema_error("lp.mu1star_intervals must be a nonempty array");
            cfg.lp.mu1star_intervals.clear();
            for (const json& v : iv) {
                if (!v.is_number_integer() || v.get<long long>() <= 0) {
                    schema_error("lp.mu1star_intervals entries must be positive integers");
                }
                cfg.lp.mu1star_intervals.push_back(static_cast<std::size_t>(v.get<long long>()));
            }
        }
        if (cfg.lp.basis_size < 5) schema_error("lp.basis must be >= 5");
    }

    if (j.contains("chatter")) {
        const json& c = j.at("chatter");
        only_keys(c, "chatter", {"n"});
        if (c.contains("n")) {
            if (!c.at("n").is_array()) schema_error("chatter.n must be an array");
            cfg.chatter_n.clear();
            for (const json& v : c.at("n")) {
                if (!v.is_number_integer() || v.get<long long>() <= 0) schema_error("chatter.n entries must be positive integers");
                cfg.chatter_n.push_back(static_cast<int>(v.get<long long>()));
            }
            for (std::size_t i = 1; i < cfg.chatter_n.size(); ++i) {
                if (cfg.chatter_n[i] % cfg.chatter_n[i - 1] != 0) schema_error("chatter.n must be nested refinements");
            }
        }
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        only_keys(o, "output", {"dir", "formats"});
        if (o.contains("dir")) {
            if (!o.at("dir").is_string()) schema_error("output.dir must be a string");
            cfg.output.directory = o.at("dir").get<std::string>();
        }
        if (o.contains("formats")) {
            const json& f = o.at("formats");
            if (!f.is_array()) schema_error("output.formats must be an array");
            cfg.output.json = cfg.output.csv = false;
            for (const json& v : f) {
                const std::string s = v.is_string() ? v.get<std::string>() : "";
                if (s == "json") {
                    cfg.output.json = true;
                } else if (s == "csv") {
                    cfg.output.csv = true;
                } else {
                    schema_error("output.formats entries must be \"json\" or \"csv\"");
                }
            }
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Config, "cli", "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace harvest
