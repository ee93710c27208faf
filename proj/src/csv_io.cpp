#include "pmsm/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pmsm/errors.hpp"

namespace pmsm {

namespace {

const char* kTraceHeader = "t,u_gamma,u_delta,i_gamma,i_delta,i_alpha,i_beta,theta,omega,theta_c,tau_L";

std::string fmt9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::vector<std::string> split_comma(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(item);
    return out;
}

}  // namespace

void write_text_file(const std::string& text, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ConfigError("cannot write file: " + tmp);
        out << text;
        if (!out) throw ConfigError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ConfigError("cannot rename " + tmp + " to " + path);
}

void write_trace_csv(const ScenarioTrace& trace, const std::string& path) {
    std::string out = kTraceHeader;
    out += "\n";
    for (const TraceRecord& r : trace.records) {
        out += fmt9(r.t) + "," + fmt9(r.u_gd.x) + "," + fmt9(r.u_gd.y) + "," + fmt9(r.i_gd.x) +
               "," + fmt9(r.i_gd.y) + "," + fmt9(r.i_ab.x) + "," + fmt9(r.i_ab.y) + "," +
               fmt9(r.theta) + "," + fmt9(r.omega) + "," + fmt9(r.theta_c) + "," +
               fmt9(r.tau_L) + "\n";
    }
    write_text_file(out, path);
}

ScenarioTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trace: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty trace file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader)
        throw ConfigError("trace schema mismatch in " + path + "; expected header '" +
                          kTraceHeader + "'");
    ScenarioTrace trace;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_comma(line);
        if (f.size() != 11)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 11 fields");
        std::vector<double> v(11);
        for (size_t k = 0; k < 11; ++k) {
            try {
                v[k] = std::stod(f[k]);
            } catch (const std::exception&) {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number '" +
                                  f[k] + "'");
            }
        }
        TraceRecord r;
        r.t = v[0];
        r.u_gd = {v[1], v[2]};
        r.i_gd = {v[3], v[4]};
        r.i_ab = {v[5], v[6]};
        r.theta = v[7];
        r.omega = v[8];
        r.theta_c = v[9];
        r.tau_L = v[10];
        trace.records.push_back(r);
    }
    if (trace.records.size() >= 2) {
        const double dt = trace.records[1].t - trace.records[0].t;
        if (!(dt > 0.0)) throw ConfigError("trace timestamps not increasing: " + path);
        trace.sample_rate = 1.0 / dt;
    }
    return trace;
}

void write_csv(const CsvTable& table, const std::string& path) {
    std::string out;
    for (size_t c = 0; c < table.columns.size(); ++c) {
        out += table.columns[c];
        out += (c + 1 < table.columns.size()) ? "," : "";
    }
    out += "\n";
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw ConfigError("csv row width mismatch writing " + path);
        for (size_t c = 0; c < row.size(); ++c) {
            out += std::isnan(row[c]) ? std::string("nan") : fmt9(row[c]);
            out += (c + 1 < row.size()) ? "," : "";
        }
        out += "\n";
    }
    write_text_file(out, path);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open csv: " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty csv: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (const auto& c : split_comma(line)) t.columns.push_back(c);
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_comma(line);
        if (f.size() != t.columns.size())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": field count mismatch");
        std::vector<double> row(f.size());
        for (size_t k = 0; k < f.size(); ++k) {
            if (f[k] == "nan") {
                row[k] = std::nan("");
                continue;
            }
            try {
                row[k] = std::stod(f[k]);
            } catch (const std::exception&) {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number '" +
                                  f[k] + "'");
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace pmsm
