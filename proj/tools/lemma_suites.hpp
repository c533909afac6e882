#pragma once

#include <cstdint>
#include <optional>

#include "subell/io.hpp"

namespace subell::cli {

struct SuiteResult {
  std::string name;
  bool passed = false;
  json detail;
};

std::vector<SuiteResult> run_lemma_suites(int trials, std::uint64_t seed,
                                          const RunConfig* config);

}  // namespace subell::cli
