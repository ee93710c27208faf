#pragma once

#include <string>
#include <vector>

#include "pmsm/simulation.hpp"

namespace pmsm {

/// Header: t,u_gamma,u_delta,i_gamma,i_delta,i_alpha,i_beta,theta,omega,theta_c,tau_L
/// Floating point written with 9 significant digits. Files are written
/// atomically (temp + rename).
void write_trace_csv(const ScenarioTrace& trace, const std::string& path);
ScenarioTrace read_trace_csv(const std::string& path);

/// Generic column table for the extended (demodulated / estimated) outputs.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;  ///< row-major, NaN = undefined
};

void write_csv(const CsvTable& table, const std::string& path);
CsvTable read_csv(const std::string& path);

/// Write any text atomically (temp + rename).
void write_text_file(const std::string& text, const std::string& path);

}  // namespace pmsm
