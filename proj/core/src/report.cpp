#include "terra/report.hpp"

#include <cmath>
#include <cstdio>

#include "terra/csv.hpp"
#include "terra/error.hpp"
#include "terra/svg_plot.hpp"

namespace terra::report {

namespace {

const std::vector<std::string> kStates{"x", "y", "psi", "u", "v", "omega_z"};

} // namespace

double ConvergenceRow::error_percent() const {
    return 100.0 * std::abs(estimated_n - true_n) / true_n;
}

void write_convergence_table(const ConvergenceRow& row, const std::string& path) {
    csv::Table t;
    t.header = {"true_n", "initial_n", "estimated_n", "error_percent"};
    t.rows.push_back({row.true_n, row.initial_n, row.estimated_n, row.error_percent()});
    csv::write(t, path);
}

void write_horizon_table(const std::vector<HorizonRow>& rows, const std::string& path) {
    // Written by hand: the header carries labels and the first column names.
    csv::ensure_parent(path);
    std::string text = "state";
    for (const auto& r : rows) text += ",mse_" + r.label;
    text += "\nn";
    for (const auto& r : rows) text += "," + csv::format_exact(r.n);
    text += "\nwindows";
    for (const auto& r : rows) text += "," + std::to_string(r.result.windows);
    text += "\n";
    for (std::size_t s = 0; s < kStates.size(); ++s) {
        text += kStates[s];
        for (const auto& r : rows) text += "," + csv::format_exact(r.result.mse[s]);
        text += "\n";
    }
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    std::fclose(f);
    if (!ok) throw IoError("write to '" + path + "' failed");
}

std::vector<HorizonRow> read_horizon_table(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open '" + path + "'");
    std::string text;
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof(buf), f)) > 0;) text.append(buf, n);
    std::fclose(f);

    std::vector<std::vector<std::string>> cells;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = text.find('\n', pos);
        const std::string line = text.substr(pos, end - pos);
        pos = end == std::string::npos ? text.size() : end + 1;
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::size_t a = 0;
        while (true) {
            const std::size_t b = line.find(',', a);
            row.push_back(line.substr(a, b - a));
            if (b == std::string::npos) break;
            a = b + 1;
        }
        cells.push_back(std::move(row));
    }
    if (cells.size() != 3 + kStates.size() || cells[0].empty() || cells[0][0] != "state") {
        throw CorruptFileError("'" + path + "' is not a horizon table");
    }
    std::vector<HorizonRow> rows(cells[0].size() - 1);
    try {
        for (std::size_t c = 0; c < rows.size(); ++c) {
            const std::string& head = cells[0][c + 1];
            rows[c].label = head.rfind("mse_", 0) == 0 ? head.substr(4) : head;
            rows[c].n = std::stod(cells[1].at(c + 1));
            rows[c].result.windows = std::stoul(cells[2].at(c + 1));
            for (std::size_t s = 0; s < kStates.size(); ++s) {
                rows[c].result.mse[s] = std::stod(cells[3 + s].at(c + 1));
            }
        }
    } catch (const std::exception&) {
        throw CorruptFileError("'" + path + "' has malformed horizon entries");
    }
    return rows;
}

void write_force_csv(const eval::ForceComparison& forces, const std::string& path) {
    csv::Table t;
    t.header = {"t", "truth_front", "surrogate_front", "truth_rear", "surrogate_rear"};
    for (std::size_t i = 0; i < forces.t.size(); ++i) {
        t.rows.push_back({forces.t[i], forces.truth_front[i], forces.surrogate_front[i],
                          forces.truth_rear[i], forces.surrogate_rear[i]});
    }
    csv::write(t, path);
}

eval::ForceComparison read_force_csv(const std::string& path) {
    const csv::Table t = csv::read(path);
    eval::ForceComparison f;
    const std::size_t ct = t.column("t");
    const std::size_t tf = t.column("truth_front");
    const std::size_t sf = t.column("surrogate_front");
    const std::size_t tr = t.column("truth_rear");
    const std::size_t sr = t.column("surrogate_rear");
    for (const auto& r : t.rows) {
        f.t.push_back(r[ct]);
        f.truth_front.push_back(r[tf]);
        f.surrogate_front.push_back(r[sf]);
        f.truth_rear.push_back(r[tr]);
        f.surrogate_rear.push_back(r[sr]);
    }
    return f;
}

void plot_estimate(const ukf::EstimateTrace& trace, double true_n, const std::string& path) {
    if (trace.points.empty()) throw InvalidArgument("cannot plot an empty estimate trace");
    svg::Plot plot;
    plot.title = "Sinkage exponent estimate";
    plot.x_label = "time [s]";
    plot.y_label = "n";
    svg::Series est{"estimate", {}, {}, "#1f77b4", false};
    svg::Series truth{"true n", {}, {}, "#d62728", true};
    svg::Band band;
    for (const auto& p : trace.points) {
        const double sd = std::sqrt(std::max(0.0, p.variance(ukf::kN)));
        est.x.push_back(p.t);
        est.y.push_back(p.mean(ukf::kN));
        band.x.push_back(p.t);
        band.lower.push_back(p.mean(ukf::kN) - 2.0 * sd);
        band.upper.push_back(p.mean(ukf::kN) + 2.0 * sd);
    }
    truth.x = {trace.points.front().t, trace.points.back().t};
    truth.y = {true_n, true_n};
    plot.series = {est, truth};
    plot.bands = {band};
    svg::write(plot, path);
}

void plot_forces(const eval::ForceComparison& forces, const std::string& path) {
    if (forces.t.empty()) throw InvalidArgument("cannot plot an empty force comparison");
    svg::Plot plot;
    plot.title = "Front tire lateral force";
    plot.x_label = "time [s]";
    plot.y_label = "F_y [N]";
    plot.series = {svg::Series{"reference model", forces.t, forces.truth_front, "#d62728", false},
                   svg::Series{"surrogate", forces.t, forces.surrogate_front, "#1f77b4", true}};
    svg::write(plot, path);
}

void plot_trajectory(const plant::TrajectoryLog& log, const ukf::EstimateTrace& trace,
                     const std::string& path) {
    if (log.samples.empty() || trace.points.empty()) {
        throw InvalidArgument("cannot plot an empty trajectory");
    }
    svg::Plot plot;
    plot.title = "Front axle path";
    plot.x_label = "x [m]";
    plot.y_label = "y [m]";
    plot.equal_aspect = true;
    svg::Series truth{"plant", {}, {}, "#d62728", false};
    for (const auto& s : log.samples) {
        truth.x.push_back(s.state.x);
        truth.y.push_back(s.state.y);
    }
    svg::Series filt{"filter", {}, {}, "#1f77b4", true};
    for (const auto& p : trace.points) {
        filt.x.push_back(p.mean(0));
        filt.y.push_back(p.mean(1));
    }
    plot.series = {truth, filt};
    svg::write(plot, path);
}

} // namespace terra::report
