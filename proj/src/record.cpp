#include "amcnet/record.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "amcnet/errors.hpp"

namespace amcnet {

namespace {

void put_value(std::string& line, const std::optional<double>& v) {
  line += ',';
  if (!v) return;
  std::array<char, 40> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", *v);
  line.append(buf.data(), static_cast<std::size_t>(n));
}

std::optional<double> parse_value(const std::string& field, std::size_t line_no) {
  if (field.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) {
    throw IoError("metrics line " + std::to_string(line_no) + ": bad number '" + field + "'");
  }
  return v;
}

}  // namespace

std::string metrics_csv(const RunRecord& record) {
  std::string out = kMetricsHeader;
  out += '\n';
  for (const RunRow& r : record.rows) {
    std::string line = std::to_string(r.epoch);
    put_value(line, r.loss);
    put_value(line, r.aux_loss);
    put_value(line, r.accuracy);
    put_value(line, r.acceptance_rate);
    put_value(line, r.sigma);
    put_value(line, r.grad_norm);
    out += line;
    out += '\n';
  }
  return out;
}

RunRecord parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw IoError("metrics: missing or wrong header");
  RunRecord record;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 7) throw IoError("metrics line " + std::to_string(line_no) + ": expected 7 fields");
    RunRow r;
    const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), r.epoch);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size()) {
      throw IoError("metrics line " + std::to_string(line_no) + ": bad epoch");
    }
    r.loss = parse_value(fields[1], line_no);
    r.aux_loss = parse_value(fields[2], line_no);
    r.accuracy = parse_value(fields[3], line_no);
    r.acceptance_rate = parse_value(fields[4], line_no);
    r.sigma = parse_value(fields[5], line_no);
    r.grad_norm = parse_value(fields[6], line_no);
    record.rows.push_back(r);
  }
  return record;
}

void emit_metrics(const RunRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open metrics file for writing: " + path.string());
  out << metrics_csv(record);
  if (!out) throw IoError("failed writing metrics file: " + path.string());
}

RunRecord load_metrics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open metrics file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_metrics_csv(ss.str());
}

void AcceptanceWindow::push(bool accepted) {
  history_.push_back(accepted);
  if (accepted) ++accepted_;
  if (history_.size() > capacity_) {
    if (history_.front()) --accepted_;
    history_.pop_front();
  }
}

std::optional<double> AcceptanceWindow::rate() const {
  if (history_.empty()) return std::nullopt;
  return static_cast<double>(accepted_) / static_cast<double>(history_.size());
}

void AcceptanceWindow::clear() {
  history_.clear();
  accepted_ = 0;
}

void AcceptanceWindow::restore(std::deque<bool> history) {
  clear();
  for (bool b : history) push(b);
}

}  // namespace amcnet
