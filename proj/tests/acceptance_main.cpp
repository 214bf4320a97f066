// Runs the acceptance checklist against a data directory given on the
// command line.  Exit status is the number of failed criteria.
#include <iostream>

#include "wellflow/acceptance.hpp"

int main(int argc, char** argv) {
  wellflow::AcceptanceOptions opt;
  if (argc > 1) opt.data_dir = argv[1];
  if (argc > 2) opt.seed = static_cast<unsigned>(std::stoul(argv[2]));
  return wellflow::run_acceptance(std::cout, opt);
}
