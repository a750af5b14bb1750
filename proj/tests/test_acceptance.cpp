// Runs every acceptance criterion and prints one pass/fail line per criterion.
// Exit status is nonzero if any criterion fails.

#include <cstdio>
#include <string>

#include "supercrit/acceptance.hpp"

int main(int argc, char** argv) {
    const std::string filter = argc > 1 ? argv[1] : "";
    const auto results = supercrit::acceptance::run_acceptance(filter);
    int failed = 0;
    for (const auto& r : results) failed += r.passed() ? 0 : 1;
    std::printf("%zu criteria, %d failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
}
