#include <array>
#include <string>

#include "terra/csv.hpp"
#include "terra/error.hpp"
#include "terra/plant.hpp"

namespace terra::plant {

namespace {

const std::vector<std::string>& log_columns() {
    static const std::vector<std::string> cols{
        "t",          "x",           "y",           "psi",          "u",
        "v",          "omega_z",     "omega_wf",    "omega_wr",     "a_x",
        "delta",      "delta_rate",  "torque",      "slip_ratio_f", "slip_ratio_r",
        "slip_angle_f", "slip_angle_r", "fx_f",     "fy_f",         "fz_f",
        "sinkage_f",  "fx_r",        "fy_r",        "fz_r",         "sinkage_r"};
    return cols;
}

const std::array<const char*, 6> kStateNames{"x", "y", "psi", "u", "v", "omega_z"};

} // namespace

void write_log_csv(const TrajectoryLog& log, const std::string& path) {
    csv::Table table;
    table.header = log_columns();
    for (const auto& s : log.samples) {
        const auto& z = s.state;
        table.rows.push_back({s.t, z.x, z.y, z.psi, z.u, z.v, z.omega_z, s.omega_wf, s.omega_wr,
                              s.input.a_x, s.input.delta, s.input.delta_rate, s.torque,
                              s.input.slip_ratio_f, s.input.slip_ratio_r, s.slip_angle_f,
                              s.slip_angle_r, s.front.fx, s.front.fy, s.front.fz, s.front.sinkage,
                              s.rear.fx, s.rear.fy, s.rear.fz, s.rear.sinkage});
    }
    csv::write(table, path);
}

TrajectoryLog read_log_csv(const std::string& path) {
    const csv::Table table = csv::read(path);
    if (table.header != log_columns()) {
        throw CorruptFileError("'" + path + "' is not a trajectory log (unexpected header)");
    }
    TrajectoryLog log;
    for (const auto& r : table.rows) {
        Sample s;
        s.t = r[0];
        s.state = bicycle::BicycleState{r[1], r[2], r[3], r[4], r[5], r[6]};
        s.omega_wf = r[7];
        s.omega_wr = r[8];
        s.input = bicycle::BicycleInput{r[9], r[10], r[11], r[13], r[14]};
        s.torque = r[12];
        s.slip_angle_f = r[15];
        s.slip_angle_r = r[16];
        s.front = terramech::TireForces{r[17], r[18], r[19], r[20], 0.0};
        s.rear = terramech::TireForces{r[21], r[22], r[23], r[24], 0.0};
        log.samples.push_back(s);
    }
    if (log.samples.size() > 1) log.interval = log.samples[1].t - log.samples[0].t;
    return log;
}

void write_measurements_csv(const TrajectoryLog& log,
                            const std::vector<bicycle::StateVector>& measurements,
                            const std::string& path) {
    if (measurements.size() != log.samples.size()) {
        throw InvalidArgument("measurement count does not match the log");
    }
    csv::Table table;
    table.header.push_back("t");
    for (const char* name : kStateNames) table.header.emplace_back(name);
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        std::vector<double> row{log.samples[i].t};
        for (int j = 0; j < 6; ++j) row.push_back(measurements[i](j));
        table.rows.push_back(std::move(row));
    }
    csv::write(table, path);
}

std::vector<bicycle::StateVector> read_measurements_csv(const std::string& path) {
    const csv::Table table = csv::read(path);
    if (table.header.size() != 7 || table.header[0] != "t") {
        throw CorruptFileError("'" + path + "' is not a measurement file");
    }
    std::vector<bicycle::StateVector> out;
    for (const auto& r : table.rows) {
        bicycle::StateVector m;
        for (int j = 0; j < 6; ++j) m(j) = r[static_cast<std::size_t>(j + 1)];
        out.push_back(m);
    }
    return out;
}

} // namespace terra::plant
