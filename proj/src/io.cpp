#include "fch/io.hpp"

#include "fch/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

namespace fch {

std::string format_double(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingInputError("missing input file " + path.string());
    }
    return in;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path)
{
    if (s == "nan") {
        return std::nan("");
    }
    if (s == "inf" || s == "-inf") {
        return s[0] == '-' ? -INFINITY : INFINITY;
    }
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw NumericalError("malformed number \"" + s + "\" in " + path.string());
    }
    return x;
}

/// Reads a CSV with a header row into named columns.
std::vector<std::vector<double>> read_columns(const std::filesystem::path& path,
                                              const std::vector<std::string>& wanted)
{
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw NumericalError("empty file " + path.string());
    }
    const auto header = split(line);
    std::vector<std::size_t> idx;
    for (const auto& w : wanted) {
        std::size_t k = 0;
        while (k < header.size() && header[k] != w) {
            ++k;
        }
        if (k == header.size()) {
            throw NumericalError("column \"" + w + "\" missing in " + path.string());
        }
        idx.push_back(k);
    }
    std::vector<std::vector<double>> cols(wanted.size());
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw NumericalError("ragged row in " + path.string());
        }
        for (std::size_t c = 0; c < idx.size(); ++c) {
            cols[c].push_back(parse_double(cells[idx[c]], path));
        }
    }
    return cols;
}

void write_row(std::ofstream& out, std::initializer_list<double> values, int step)
{
    out << step;
    for (double v : values) {
        out << ',' << format_double(v);
    }
    out << '\n';
}

} // namespace

TrajectoryCsvWriter::TrajectoryCsvWriter(const std::filesystem::path& path) : out_(open_out(path))
{
    bool first = true;
    for (const char* c : kTrajectoryColumns) {
        out_ << (first ? "" : ",") << c;
        first = false;
    }
    out_ << '\n';
    out_.flush();
}

void TrajectoryCsvWriter::write_initial(const Monitors& m)
{
    write_row(out_, {0.0, 0.0, m.energy, m.w_xnorm, m.u_xnorm_sigma, m.u_linf, m.dual_norm_ut, 0.0}, 0);
    out_.flush();
}

void TrajectoryCsvWriter::write(const StepRecord& rec)
{
    const Monitors& m = rec.monitors;
    write_row(out_,
              {rec.t, rec.tau_used, m.energy, m.w_xnorm, m.u_xnorm_sigma, m.u_linf, m.dual_norm_ut, rec.cert.defect},
              rec.step);
    out_.flush();
}

void write_certificates_csv(const std::filesystem::path& path, const Trajectory& traj)
{
    std::ofstream out = open_out(path);
    out << "step,t,tau_used,e_before,e_after,w_normsq,du_msq,lambda_half_du,defect,tolerance,satisfied\n";
    for (const auto& r : traj.steps) {
        const StepCertificate& c = r.cert;
        out << r.step << ',' << format_double(r.t) << ',' << format_double(r.tau_used) << ','
            << format_double(c.e_before) << ',' << format_double(c.e_after) << ',' << format_double(c.w_normsq) << ','
            << format_double(c.du_msq) << ',' << format_double(c.lambda_half_du) << ',' << format_double(c.defect)
            << ',' << format_double(c.tolerance) << ',' << (c.satisfied ? 1 : 0) << '\n';
    }
}

void write_state_csv(const std::filesystem::path& path, const FracMesh& mesh, const FemVector& u, const FemVector& w)
{
    std::ofstream out = open_out(path);
    out << "x,u,w\n";
    for (int k = 0; k <= mesh.n_elems(); ++k) {
        out << format_double(mesh.node(k)) << ',' << format_double(FracMesh::nodal_value(u, k, mesh.n_elems())) << ','
            << format_double(FracMesh::nodal_value(w, k, mesh.n_elems())) << '\n';
    }
}

FemVector read_state_csv(const std::filesystem::path& path)
{
    const auto cols = read_columns(path, {"u"});
    const auto& u = cols[0];
    if (u.size() < 3) {
        throw NumericalError("state file " + path.string() + " has fewer than three nodes");
    }
    FemVector v(static_cast<Eigen::Index>(u.size() - 2));
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
        v[static_cast<Eigen::Index>(i - 1)] = u[i];
    }
    return v;
}

TrajectorySeries read_trajectory_csv(const std::filesystem::path& path)
{
    auto cols = read_columns(path, {"t", "energy", "w_xnorm"});
    TrajectorySeries s;
    s.t = std::move(cols[0]);
    s.energy = std::move(cols[1]);
    s.w_xnorm = std::move(cols[2]);
    return s;
}

void write_json(const std::filesystem::path& path, const Json& j)
{
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

Json read_json(const std::filesystem::path& path)
{
    std::ifstream in = open_in(path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw NumericalError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v)
{
    return {v.data(), v.data() + v.size()};
}

/// JSON has no infinity; non-finite values become null.
Json num(double x)
{
    return std::isfinite(x) ? Json(x) : Json(nullptr);
}

} // namespace

Json to_json(const EquilibriumReport& rep)
{
    Json j;
    j["phi"] = to_std(rep.phi);
    j["residual_dual"] = num(rep.residual_dual);
    j["linf"] = num(rep.linf);
    j["energy"] = num(rep.energy);
    j["mesh_h"] = rep.mesh_h;
    j["newton_iterations"] = rep.newton_iterations;
    j["pencil_eigs"] = rep.pencil_eigs;
    j["kernel_dim"] = rep.kernel_dim;
    Json basis = Json::array();
    for (const auto& b : rep.kernel_basis) {
        basis.push_back(to_std(b));
    }
    j["kernel_basis"] = basis;
    j["kernel_tol"] = rep.kernel_tol;
    j["iso_condition"] = num(rep.iso_condition);
    j["theta_hint"] = rep.theta_hint ? Json(*rep.theta_hint) : Json(nullptr);
    return j;
}

Json to_json(const LojFit& fit)
{
    Json j;
    j["mode"] = to_string(fit.mode);
    j["theta"] = fit.theta;
    j["rate"] = num(fit.rate);
    j["r_squared"] = num(fit.r_squared);
    j["window"] = {fit.t_start, fit.t_end};
    j["e_limit"] = fit.e_limit;
    j["samples"] = fit.samples;
    j["decades"] = num(fit.decades);
    j["degenerate"] = fit.degenerate;
    j["clipped"] = fit.clipped;
    j["noise_floor"] = fit.noise_floor;
    j["exponential"] = {{"rate", num(fit.exponential_rate)}, {"r_squared", num(fit.exponential_r_squared)}};
    j["algebraic"] = {{"exponent", num(fit.algebraic_exponent)}, {"r_squared", num(fit.algebraic_r_squared)}};
    return j;
}

void write_series_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns)
{
    if (header.size() != columns.size()) {
        throw Error("write_series_csv: header and column counts differ");
    }
    std::ofstream out = open_out(path);
    for (std::size_t c = 0; c < header.size(); ++c) {
        out << (c ? "," : "") << header[c];
    }
    out << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            out << (c ? "," : "") << format_double(columns[c].at(r));
        }
        out << '\n';
    }
}

} // namespace fch
