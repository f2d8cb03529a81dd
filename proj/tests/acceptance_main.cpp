// Acceptance suite: one pass/fail line per criterion; exit 1 on any failure.
#include <cstdio>
#include <cstdlib>

#include "tmbumps/io.hpp"
#include "tmbumps/verify.hpp"

int main() {
    int threads = 2;
    if (const char* env = std::getenv("TMBUMPS_THREADS")) threads = std::atoi(env);
    const auto records = tmbumps::verify::run_suite("all", threads > 0 ? threads : 1);
    bool ok = true;
    for (const auto& r : records) {
        std::printf("[%s] %-36s value=%-13.6g threshold=%-13.6g (%.2f s)\n",
                    r.passed ? "PASS" : "FAIL", r.name.c_str(), r.value, r.threshold,
                    r.runtime_s);
        if (!r.detail.empty()) std::printf("       %s\n", r.detail.c_str());
        ok = ok && r.passed;
    }
    std::printf("%s\n", ok ? "ACCEPTANCE: all criteria passed" : "ACCEPTANCE: FAILURES present");
    return ok ? 0 : 1;
}
