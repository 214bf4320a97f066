#pragma once

#include <ostream>
#include <string>

namespace wellflow {

struct AcceptanceOptions {
  std::string data_dir = "data";
  unsigned seed = 20260826;
};

// Runs the ten release criteria, printing one PASS/FAIL line per criterion.
// Returns the number of failures (0 = release-ready).
int run_acceptance(std::ostream& os, const AcceptanceOptions& opt = {});

}  // namespace wellflow
