#ifndef CMMD_IO_HPP
#define CMMD_IO_HPP

#include <string>
#include <vector>

#include "cmmd/dynamics.hpp"
#include "cmmd/regression.hpp"
#include "cmmd/testing.hpp"

namespace cmmd {

// Shortest round-trip decimal rendering, locale-independent, so identical
// numbers always serialize to identical bytes.
std::string format_double(double value);

// Data CSV schema: header `x_1,...,x_d,z_1,...,z_q`, one pair per row.
// Malformed input throws InputError with `path:line:` diagnostics.
DataSet read_data_csv(const std::string& path);
void write_data_csv(const std::string& path, const DataSet& data);

// Per-covariate test report: x_1..x_d, statistic, threshold, reject.
void write_report_csv(const std::string& path, const TestReport& report);

// Monitor ratio time series: step, max_ratio, mean_ratio,
// mean_reference_scale, warmup.
void write_monitor_csv(const std::string& path, const std::vector<MonitorRecord>& records);

}  // namespace cmmd

#endif
