#pragma once

#include "fch/diagnostics.hpp"
#include "fch/equilibrium.hpp"
#include "fch/evolution.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fch {

using Json = nlohmann::json;

/// Shortest decimal representation that round-trips.
[[nodiscard]] std::string format_double(double x);

/// Columns of the trajectory CSV, in order.
inline constexpr const char* kTrajectoryColumns[] = {"step",        "t",          "tau_used",
                                                     "energy",      "w_xnorm",    "u_xnorm_sigma",
                                                     "u_linf",      "dual_norm_ut", "cert_defect"};

/// Writes the trajectory CSV one row per step, flushing after each row.
class TrajectoryCsvWriter {
public:
    explicit TrajectoryCsvWriter(const std::filesystem::path& path);
    void write_initial(const Monitors& m);
    void write(const StepRecord& rec);

private:
    std::ofstream out_;
};

/// step, t, tau_used, e_before, e_after, w_normsq, du_msq, lambda_half_du,
/// defect, tolerance, satisfied
void write_certificates_csv(const std::filesystem::path& path, const Trajectory& traj);

/// x, u, w on all nodes including the two boundary nodes.
void write_state_csv(const std::filesystem::path& path, const FracMesh& mesh, const FemVector& u,
                     const FemVector& w);
/// Interior coefficients of the `u` column. Throws MissingInputError if the
/// file is absent and NumericalError on malformed content.
[[nodiscard]] FemVector read_state_csv(const std::filesystem::path& path);

struct TrajectorySeries {
    std::vector<double> t;
    std::vector<double> energy;
    std::vector<double> w_xnorm;
};

[[nodiscard]] TrajectorySeries read_trajectory_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const Json& j);
[[nodiscard]] Json read_json(const std::filesystem::path& path);

[[nodiscard]] Json to_json(const EquilibriumReport& rep);
[[nodiscard]] Json to_json(const LojFit& fit);

/// One header row, then row r holds columns[c][r] for every c.
void write_series_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns);

} // namespace fch
