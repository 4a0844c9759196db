#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace amcnet {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  /// Not assessable here (e.g. required data absent); neither pass nor fail.
  bool skipped = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  /// MNIST directory; empty means $AMCNET_MNIST_DIR.
  std::string mnist_dir;
  /// Progress messages go here when set.
  std::ostream* log = nullptr;
};

/// Criteria 1-10 and 12. Criterion 11 (full-scale MNIST) is opt-in.
std::vector<int> default_criteria();
/// The criteria that finish within seconds to a few minutes.
std::vector<int> quick_criteria();

std::string criterion_name(int id);
CriterionResult run_criterion(int id, const VerifyOptions& options = {});

/// "[PASS] 3 small-sigma acceptance limit: ... (1.2 s)".
std::string format_result(const CriterionResult& r);

}  // namespace amcnet
