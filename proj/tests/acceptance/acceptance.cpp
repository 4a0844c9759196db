// Runs acceptance criteria and prints one [PASS]/[FAIL]/[SKIP] line each.
// Exit status: 0 all passed, 1 any failed, 77 nothing failed but something
// was skipped.

#include <iostream>

#include <CLI11.hpp>

#include "amcnet/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> ids;
  std::string mnist_dir;
  bool quiet = false;
  app.add_option("--criterion", ids, "criterion numbers (default: all default criteria)");
  app.add_option("--mnist-dir", mnist_dir, "MNIST directory (default: $AMCNET_MNIST_DIR)");
  app.add_flag("--quiet", quiet, "only the result lines");
  CLI11_PARSE(app, argc, argv);

  amcnet::VerifyOptions options;
  options.mnist_dir = mnist_dir;
  if (!quiet) options.log = &std::cout;
  if (ids.empty()) ids = amcnet::default_criteria();

  bool failed = false, skipped = false;
  for (int id : ids) {
    const auto r = amcnet::run_criterion(id, options);
    std::cout << amcnet::format_result(r) << std::endl;
    failed = failed || (!r.passed && !r.skipped);
    skipped = skipped || r.skipped;
  }
  return failed ? 1 : skipped ? 77 : 0;
}
