#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace fch {

/// Validated run configuration. Every key is optional in the JSON file;
/// missing keys take the defaults below.
struct RunConfig {
    struct Domain {
        double a = -1.0;
        double b = 1.0;
    } domain;
    struct Mesh {
        int n_elems = 64;
    } mesh;
    struct Frac {
        double s = 0.5;
        double sigma = 0.5;
    } frac;
    struct PotentialSpec {
        std::string kind = "double_well"; ///< "double_well" or "zero"
        double m = 4.0;
        std::optional<double> lambda;     ///< unset: automatic
        std::string analytic_class;
    } potential;
    struct Time {
        double tau = 1e-2;
        double t_end = 1.0;
        int record_stride = 10;
    } time;
    struct Newton {
        double tol = 1e-10;
        int max_iter = 50;
    } newton;
    struct Yosida {
        bool enabled = false;
        double epsilon = 1e-2;
    } yosida;
    struct Seeds {
        std::uint64_t rng_seed = 42;
    } seeds;
    struct Output {
        std::string dir = "out";
    } output;
    struct Initial {
        std::string kind = "random"; ///< "random", "steps", "sine", "bump", "zero"
        double amplitude = 0.1;
        int modes = 1;               ///< frequency for "sine"
        int cells = 8;               ///< pieces for "steps"
    } initial;
    struct Quadrature {
        int regular_order = 5;
        int singular_order = 8;
        int energy_order = 5;
    } quadrature;
    struct Analysis {
        double theta = 0.5;
        double stationary_tol = 1e-10;
        int stationary_max_iter = 100;
        double kernel_tol_rel = 1e-8;
        std::string equilibrium_seed = "zero"; ///< "zero", "nontrivial", "final_state"
        double seed_amplitude = 1.0;
        int verify_trials = 1000;
        int verify_steps = 50;
        double fit_t_min = 0.0;
    } analysis;
};

/// Reads and validates a JSON config. Throws MissingInputError when the file
/// cannot be opened and ConfigError on syntax errors (with line and column),
/// unknown keys, wrong types, or out-of-range values (naming the key).
[[nodiscard]] RunConfig parse_config(const std::filesystem::path& path);

/// Same, from an in-memory document.
[[nodiscard]] RunConfig parse_config_text(const std::string& text);

/// Range checks shared by both parse paths.
void validate(const RunConfig& cfg);

} // namespace fch
