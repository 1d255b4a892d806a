#include "cmmd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "cmmd/errors.hpp"

namespace cmmd {
namespace {

std::string trimmed(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  std::size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trimmed(line.substr(start)));
      break;
    }
    fields.push_back(trimmed(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& message) {
  std::ostringstream oss;
  oss << path << ":" << line << ": " << message;
  throw InputError(oss.str());
}

double parse_double(const std::string& field, const std::string& path, int line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    fail(path, line, "expected a number, got '" + field + "'");
  }
  if (!std::isfinite(value)) {
    fail(path, line, "non-finite value '" + field + "'");
  }
  return value;
}

// Counts a run of `prefix`_1..`prefix`_N starting at `pos`; returns N.
int count_indexed(const std::vector<std::string>& fields, std::size_t pos, char prefix) {
  int n = 0;
  while (pos + n < fields.size()) {
    std::ostringstream expected;
    expected << prefix << "_" << (n + 1);
    if (fields[pos + n] != expected.str()) break;
    ++n;
  }
  return n;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw NumericalError("failed to format a double");
  return std::string(buffer, ptr);
}

DataSet read_data_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open for reading");

  std::string line;
  if (!std::getline(in, line)) fail(path, 1, "missing header row");
  const std::vector<std::string> header = split_fields(line);
  const int d = count_indexed(header, 0, 'x');
  if (d == 0) fail(path, 1, "header must start with x_1");
  const int q = count_indexed(header, static_cast<std::size_t>(d), 'z');
  if (q == 0) fail(path, 1, "header must contain z_1 after the covariate columns");
  if (static_cast<std::size_t>(d + q) != header.size()) {
    fail(path, 1, "unexpected trailing header column '" + header[d + q] + "'");
  }

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trimmed(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != static_cast<std::size_t>(d + q)) {
      std::ostringstream oss;
      oss << "expected " << d + q << " fields, got " << fields.size();
      fail(path, lineno, oss.str());
    }
    std::vector<double> row(d + q);
    for (int i = 0; i < d + q; ++i) row[i] = parse_double(fields[i], path, lineno);
    rows.push_back(std::move(row));
  }

  DataSet data;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  data.covariates.resize(d, n);
  data.measurements.resize(q, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.covariates(j, i) = rows[i][j];
    for (int j = 0; j < q; ++j) data.measurements(j, i) = rows[i][d + j];
  }
  return data;
}

void write_data_csv(const std::string& path, const DataSet& data) {
  data.validate();
  if (data.covariates.rows() == 0 || data.measurements.rows() == 0) {
    throw InputError("data sets need at least one covariate and one measurement dimension");
  }
  std::ofstream out(path);
  if (!out) throw InputError(path + ": cannot open for writing");

  for (Eigen::Index j = 0; j < data.covariates.rows(); ++j) {
    out << (j ? "," : "") << "x_" << j + 1;
  }
  for (Eigen::Index j = 0; j < data.measurements.rows(); ++j) {
    out << ",z_" << j + 1;
  }
  out << "\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.covariates.rows(); ++j) {
      out << (j ? "," : "") << format_double(data.covariates(j, i));
    }
    for (Eigen::Index j = 0; j < data.measurements.rows(); ++j) {
      out << "," << format_double(data.measurements(j, i));
    }
    out << "\n";
  }
  if (!out) throw InputError(path + ": write failed");
}

void write_report_csv(const std::string& path, const TestReport& report) {
  std::ofstream out(path);
  if (!out) throw InputError(path + ": cannot open for writing");

  const Eigen::Index d = report.records.empty() ? 0 : report.records.front().x.size();
  for (Eigen::Index j = 0; j < d; ++j) out << "x_" << j + 1 << ",";
  out << "statistic,threshold,reject\n";
  for (const TestRecord& rec : report.records) {
    for (Eigen::Index j = 0; j < d; ++j) out << format_double(rec.x(j)) << ",";
    out << format_double(rec.statistic) << "," << format_double(rec.threshold) << ","
        << (rec.reject ? 1 : 0) << "\n";
  }
  if (!out) throw InputError(path + ": write failed");
}

void write_monitor_csv(const std::string& path, const std::vector<MonitorRecord>& records) {
  std::ofstream out(path);
  if (!out) throw InputError(path + ": cannot open for writing");

  out << "step,max_ratio,mean_ratio,mean_reference_scale,warmup\n";
  for (const MonitorRecord& rec : records) {
    out << rec.step << "," << format_double(rec.max_ratio) << ","
        << format_double(rec.mean_ratio) << "," << format_double(rec.mean_reference_scale)
        << "," << (rec.warmup ? 1 : 0) << "\n";
  }
  if (!out) throw InputError(path + ": write failed");
}

}  // namespace cmmd
