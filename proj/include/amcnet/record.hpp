#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace amcnet {

/// One recorded point of a training run. Quantities that were not measured
/// stay empty.
struct RunRow {
  std::uint64_t epoch = 0;
  std::optional<double> loss;
  std::optional<double> aux_loss;
  std::optional<double> accuracy;
  std::optional<double> acceptance_rate;
  std::optional<double> sigma;
  std::optional<double> grad_norm;

  friend bool operator==(const RunRow&, const RunRow&) = default;
};

struct RunRecord {
  std::vector<RunRow> rows;
  /// Set when a gradient run blew up numerically; rows stop at that point.
  bool diverged = false;

  const RunRow& last() const { return rows.back(); }
  friend bool operator==(const RunRecord& a, const RunRecord& b) { return a.rows == b.rows; }
};

inline constexpr const char* kMetricsHeader =
    "epoch,loss,aux_loss,accuracy,acceptance_rate,sigma,grad_norm";

/// CSV text: header line, then one line per row; absent values are empty
/// fields and reals carry 17 significant digits.
std::string metrics_csv(const RunRecord& record);
RunRecord parse_metrics_csv(const std::string& text);

void emit_metrics(const RunRecord& record, const std::filesystem::path& path);
RunRecord load_metrics(const std::filesystem::path& path);

/// Fraction of accepted moves among the most recent `capacity` steps.
class AcceptanceWindow {
 public:
  explicit AcceptanceWindow(std::size_t capacity = 100) : capacity_(capacity) {}

  void push(bool accepted);
  /// Empty until at least one step has been pushed.
  std::optional<double> rate() const;
  void clear();

  std::size_t capacity() const { return capacity_; }
  const std::deque<bool>& history() const { return history_; }
  void restore(std::deque<bool> history);

 private:
  std::size_t capacity_;
  std::deque<bool> history_;
  std::size_t accepted_ = 0;
};

}  // namespace amcnet
