#ifndef TMBUMPS_VERIFY_HPP
#define TMBUMPS_VERIFY_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace tmbumps::verify {

struct CheckRecord {
    std::string name;
    bool passed = false;
    double value = 0;      // measured quantity (worst case over the check)
    double threshold = 0;  // pinned acceptance threshold
    std::string detail;
    double runtime_s = 0;
};

/// Suites: "bubble" (mass identity, kernel lemma, expansion regressions),
/// "green" (disk oracle + symmetry), "location" (single bump, Phi
/// equivalence), "quantization" (branch energy/mass law, bubble-vs-solution,
/// eigenvalue bound), "all".
std::vector<CheckRecord> run_suite(const std::string& suite, int threads = 1);

void write_json(const std::vector<CheckRecord>& records, std::ostream& os);
bool all_passed(const std::vector<CheckRecord>& records);

}  // namespace tmbumps::verify

#endif
