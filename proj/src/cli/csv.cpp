#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "unilab/cli.hpp"

namespace unilab::cli {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  std::istringstream stream(line);
  while (std::getline(stream, current, ',')) fields.push_back(current);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_number(const std::string& text, const char* column) {
  T value{};
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(std::string("CSV column '") + column + "' has malformed value '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& text, const char* column) {
  if (text == "nan") return NAN;
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  return parse_number<double>(text, column);
}

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 9);
  return std::string(buffer, result.ptr);
}

RunRow to_run_row(const mc::ExperimentRow& row) {
  RunRow out;
  out.tester = row.tester;
  out.n = row.n;
  out.m = row.m;
  out.epsilon = row.epsilon;
  out.gamma = row.gamma;
  out.side = mc::side_name(row.side);
  out.trials = row.estimate.trials;
  out.failures = row.estimate.failures;
  out.delta_hat = row.estimate.delta_hat;
  out.ci_low = row.estimate.ci_low;
  out.ci_high = row.estimate.ci_high;
  out.threshold = row.threshold;
  out.beta = row.beta;
  const double n = static_cast<double>(row.n);
  out.x_axis = n * n * std::pow(row.epsilon, 4) / static_cast<double>(row.m);
  out.seed = row.estimate.seed;
  return out;
}

void write_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.tester << ',' << r.n << ',' << r.m << ',' << format_real(r.epsilon) << ',' << format_real(r.gamma)
        << ',' << r.side << ',' << r.trials << ',' << r.failures << ',' << format_real(r.delta_hat) << ','
        << format_real(r.ci_low) << ',' << format_real(r.ci_high) << ',' << format_real(r.threshold) << ','
        << format_real(r.beta) << ',' << format_real(r.x_axis) << ',' << r.seed << '\n';
  }
}

std::vector<RunRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ConfigError("CSV header does not match the run schema");
  std::vector<RunRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 15) throw ConfigError("CSV row has " + std::to_string(f.size()) + " fields, expected 15");
    RunRow r;
    r.tester = f[0];
    r.n = parse_number<std::int64_t>(f[1], "n");
    r.m = parse_number<std::int64_t>(f[2], "m");
    r.epsilon = parse_real(f[3], "epsilon");
    r.gamma = parse_real(f[4], "gamma");
    r.side = f[5];
    r.trials = parse_number<std::int64_t>(f[6], "trials");
    r.failures = parse_number<std::int64_t>(f[7], "failures");
    r.delta_hat = parse_real(f[8], "delta_hat");
    r.ci_low = parse_real(f[9], "ci_low");
    r.ci_high = parse_real(f[10], "ci_high");
    r.threshold = parse_real(f[11], "threshold");
    r.beta = parse_real(f[12], "beta");
    r.x_axis = parse_real(f[13], "x_axis");
    r.seed = parse_number<std::uint64_t>(f[14], "seed");
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace unilab::cli
