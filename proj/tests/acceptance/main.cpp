// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
// Optional arguments: seed, output directory for the generated files.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "acceptance/suite.hpp"

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  const auto out = acceptance::run_suite(seed, &std::cerr);
  if (argc > 2) {
    std::filesystem::create_directories(argv[2]);
    for (const auto& [name, text] : out.files) std::ofstream(std::filesystem::path(argv[2]) / name) << text;
  }
  for (const auto& r : out.results) {
    std::printf("%s  %2d %-28s %7.1fs  %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                r.detail.c_str());
  }
  std::size_t passed = 0;
  for (const auto& r : out.results) passed += r.passed;
  std::printf("%zu/%zu criteria passed\n", passed, out.results.size());
  return out.all_passed() ? 0 : 1;
}
