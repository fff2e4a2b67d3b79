#include "fch/config.hpp"

#include "fch/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace fch {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what)
{
    throw ConfigError("config: \"" + key + "\" " + what);
}

/// Rejects keys not in `allowed`.
void check_keys(const json& obj, const std::string& prefix, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) {
        fail(prefix, "must be an object");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            fail(prefix.empty() ? it.key() : prefix + "." + it.key(), "is not a recognized key");
        }
    }
}

void read(const json& obj, const std::string& prefix, const char* key, double& out)
{
    if (!obj.contains(key)) {
        return;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        fail(prefix + "." + key, "must be a number");
    }
    out = v.get<double>();
    if (!std::isfinite(out)) {
        fail(prefix + "." + key, "must be finite");
    }
}

void read(const json& obj, const std::string& prefix, const char* key, int& out)
{
    if (!obj.contains(key)) {
        return;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
        fail(prefix + "." + key, "must be an integer");
    }
    const auto x = v.get<long long>();
    if (x < -2147483647LL || x > 2147483647LL) {
        fail(prefix + "." + key, "is out of range");
    }
    out = static_cast<int>(x);
}

void read(const json& obj, const std::string& prefix, const char* key, std::uint64_t& out)
{
    if (!obj.contains(key)) {
        return;
    }
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) {
        fail(prefix + "." + key, "must be a non-negative integer");
    }
    out = v.get<std::uint64_t>();
}

void read(const json& obj, const std::string& prefix, const char* key, bool& out)
{
    if (!obj.contains(key)) {
        return;
    }
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
        fail(prefix + "." + key, "must be a boolean");
    }
    out = v.get<bool>();
}

void read(const json& obj, const std::string& prefix, const char* key, std::string& out)
{
    if (!obj.contains(key)) {
        return;
    }
    const json& v = obj.at(key);
    if (!v.is_string()) {
        fail(prefix + "." + key, "must be a string");
    }
    out = v.get<std::string>();
}

const json* section(const json& root, const char* name)
{
    return root.contains(name) ? &root.at(name) : nullptr;
}

void require(bool cond, const std::string& key, const std::string& what)
{
    if (!cond) {
        fail(key, what);
    }
}

bool one_of(const std::string& v, std::initializer_list<const char*> options)
{
    for (const char* o : options) {
        if (v == o) {
            return true;
        }
    }
    return false;
}

RunConfig from_json(const json& root)
{
    check_keys(root, "",
               {"domain", "mesh", "frac", "potential", "time", "newton", "yosida", "seeds", "output", "initial",
                "quadrature", "analysis"});
    RunConfig cfg;
    if (const json* j = section(root, "domain")) {
        check_keys(*j, "domain", {"a", "b"});
        read(*j, "domain", "a", cfg.domain.a);
        read(*j, "domain", "b", cfg.domain.b);
    }
    if (const json* j = section(root, "mesh")) {
        check_keys(*j, "mesh", {"n_elems"});
        read(*j, "mesh", "n_elems", cfg.mesh.n_elems);
    }
    if (const json* j = section(root, "frac")) {
        check_keys(*j, "frac", {"s", "sigma"});
        read(*j, "frac", "s", cfg.frac.s);
        read(*j, "frac", "sigma", cfg.frac.sigma);
    }
    if (const json* j = section(root, "potential")) {
        check_keys(*j, "potential", {"kind", "m", "lambda", "analytic_class"});
        read(*j, "potential", "kind", cfg.potential.kind);
        read(*j, "potential", "m", cfg.potential.m);
        read(*j, "potential", "analytic_class", cfg.potential.analytic_class);
        if (j->contains("lambda")) {
            const json& l = j->at("lambda");
            if (l.is_string()) {
                require(l.get<std::string>() == "auto", "potential.lambda", "must be a number or \"auto\"");
            } else if (!l.is_null()) {
                double v = 0.0;
                read(*j, "potential", "lambda", v);
                cfg.potential.lambda = v;
            }
        }
    }
    if (const json* j = section(root, "time")) {
        check_keys(*j, "time", {"tau", "t_end", "record_stride"});
        read(*j, "time", "tau", cfg.time.tau);
        read(*j, "time", "t_end", cfg.time.t_end);
        read(*j, "time", "record_stride", cfg.time.record_stride);
    }
    if (const json* j = section(root, "newton")) {
        check_keys(*j, "newton", {"tol", "max_iter"});
        read(*j, "newton", "tol", cfg.newton.tol);
        read(*j, "newton", "max_iter", cfg.newton.max_iter);
    }
    if (const json* j = section(root, "yosida")) {
        check_keys(*j, "yosida", {"enabled", "epsilon"});
        read(*j, "yosida", "enabled", cfg.yosida.enabled);
        read(*j, "yosida", "epsilon", cfg.yosida.epsilon);
    }
    if (const json* j = section(root, "seeds")) {
        check_keys(*j, "seeds", {"rng_seed"});
        read(*j, "seeds", "rng_seed", cfg.seeds.rng_seed);
    }
    if (const json* j = section(root, "output")) {
        check_keys(*j, "output", {"dir"});
        read(*j, "output", "dir", cfg.output.dir);
    }
    if (const json* j = section(root, "initial")) {
        check_keys(*j, "initial", {"kind", "amplitude", "modes", "cells"});
        read(*j, "initial", "kind", cfg.initial.kind);
        read(*j, "initial", "amplitude", cfg.initial.amplitude);
        read(*j, "initial", "modes", cfg.initial.modes);
        read(*j, "initial", "cells", cfg.initial.cells);
    }
    if (const json* j = section(root, "quadrature")) {
        check_keys(*j, "quadrature", {"regular_order", "singular_order", "energy_order"});
        read(*j, "quadrature", "regular_order", cfg.quadrature.regular_order);
        read(*j, "quadrature", "singular_order", cfg.quadrature.singular_order);
        read(*j, "quadrature", "energy_order", cfg.quadrature.energy_order);
    }
    if (const json* j = section(root, "analysis")) {
        check_keys(*j, "analysis",
                   {"theta", "stationary_tol", "stationary_max_iter", "kernel_tol_rel", "equilibrium_seed",
                    "seed_amplitude", "verify_trials", "verify_steps", "fit_t_min"});
        read(*j, "analysis", "theta", cfg.analysis.theta);
        read(*j, "analysis", "stationary_tol", cfg.analysis.stationary_tol);
        read(*j, "analysis", "stationary_max_iter", cfg.analysis.stationary_max_iter);
        read(*j, "analysis", "kernel_tol_rel", cfg.analysis.kernel_tol_rel);
        read(*j, "analysis", "equilibrium_seed", cfg.analysis.equilibrium_seed);
        read(*j, "analysis", "seed_amplitude", cfg.analysis.seed_amplitude);
        read(*j, "analysis", "verify_trials", cfg.analysis.verify_trials);
        read(*j, "analysis", "verify_steps", cfg.analysis.verify_steps);
        read(*j, "analysis", "fit_t_min", cfg.analysis.fit_t_min);
    }
    validate(cfg);
    return cfg;
}

} // namespace

void validate(const RunConfig& cfg)
{
    require(cfg.domain.a < cfg.domain.b, "domain.a", "must be smaller than domain.b");
    require(cfg.mesh.n_elems >= 2, "mesh.n_elems", "must be at least 2");
    require(cfg.frac.s > 0.0 && cfg.frac.s < 1.0, "frac.s", "must lie in (0, 1)");
    require(cfg.frac.sigma > 0.0 && cfg.frac.sigma < 1.0, "frac.sigma", "must lie in (0, 1)");
    require(one_of(cfg.potential.kind, {"double_well", "zero"}), "potential.kind",
            "must be \"double_well\" or \"zero\"");
    require(cfg.potential.m >= 2.0, "potential.m", "must be at least 2");
    if (cfg.potential.lambda) {
        require(*cfg.potential.lambda >= 0.0, "potential.lambda", "must be non-negative");
    }
    require(cfg.time.tau > 0.0, "time.tau", "must be positive");
    require(cfg.time.t_end > 0.0, "time.t_end", "must be positive");
    require(cfg.time.record_stride >= 1, "time.record_stride", "must be at least 1");
    require(cfg.newton.tol > 0.0, "newton.tol", "must be positive");
    require(cfg.newton.max_iter >= 1, "newton.max_iter", "must be at least 1");
    require(cfg.yosida.epsilon > 0.0, "yosida.epsilon", "must be positive");
    require(!cfg.output.dir.empty(), "output.dir", "must not be empty");
    require(one_of(cfg.initial.kind, {"random", "steps", "sine", "bump", "zero"}), "initial.kind",
            "must be one of \"random\", \"steps\", \"sine\", \"bump\", \"zero\"");
    require(cfg.initial.modes >= 1, "initial.modes", "must be at least 1");
    require(cfg.initial.cells >= 1, "initial.cells", "must be at least 1");
    require(cfg.quadrature.regular_order >= 1 && cfg.quadrature.regular_order <= 128, "quadrature.regular_order",
            "must lie in [1, 128]");
    require(cfg.quadrature.singular_order >= 1 && cfg.quadrature.singular_order <= 128,
            "quadrature.singular_order", "must lie in [1, 128]");
    require(cfg.quadrature.energy_order >= 2 && cfg.quadrature.energy_order <= 128, "quadrature.energy_order",
            "must lie in [2, 128]");
    require(cfg.analysis.theta > 0.0 && cfg.analysis.theta <= 0.5, "analysis.theta", "must lie in (0, 1/2]");
    require(cfg.analysis.stationary_tol > 0.0, "analysis.stationary_tol", "must be positive");
    require(cfg.analysis.stationary_max_iter >= 1, "analysis.stationary_max_iter", "must be at least 1");
    require(cfg.analysis.kernel_tol_rel > 0.0, "analysis.kernel_tol_rel", "must be positive");
    require(one_of(cfg.analysis.equilibrium_seed, {"zero", "nontrivial", "final_state"}),
            "analysis.equilibrium_seed", "must be one of \"zero\", \"nontrivial\", \"final_state\"");
    require(cfg.analysis.seed_amplitude > 0.0, "analysis.seed_amplitude", "must be positive");
    require(cfg.analysis.verify_trials >= 1, "analysis.verify_trials", "must be at least 1");
    require(cfg.analysis.verify_steps >= 1, "analysis.verify_steps", "must be at least 1");
    require(cfg.analysis.fit_t_min >= 0.0, "analysis.fit_t_min", "must be non-negative");
}

RunConfig parse_config_text(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line and column.
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << "config: syntax error at line " << line << ", column " << col << ": " << e.what();
        throw ConfigError(msg.str());
    }
    return from_json(root);
}

RunConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw MissingInputError("config: cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace fch
