// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fail.
//   acceptance <fixtures dir> <lexcraft binary>
#include "support/criteria.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>

using namespace lexcraft::criteria;

int main(int argc, char** argv)
{
    if (argc != 3) {
        std::fprintf(stderr, "usage: acceptance <fixtures dir> <lexcraft binary>\n");
        return 2;
    }
    const std::filesystem::path fixtures = argv[1];
    const std::string cli = argv[2];

    const std::vector<std::pair<const char*, std::function<Outcome()>>> checks{
        {"stage-order law", [] { return stage_order_law(1000, 10.0); }},
        {"ordering necessity", [] { return ordering_necessity(); }},
        {"mask confinement", [] { return mask_confinement(50); }},
        {"k-means oracle", [] { return kmeans_oracle(200, 60.0); }},
        {"proportional quantization", [] { return proportional_quantization(256); }},
        {"lifecycle and copy semantics", [] { return lifecycle(1000); }},
        {"determinism goldens", [&] { return determinism_goldens(fixtures); }},
        {"diagnostics", [&] { return diagnostics(fixtures, cli); }},
        {"compiler invariances", [] { return compiler_invariances(200, 200); }},
        {"service linearizability", [] { return service_linearizability(100, 10); }},
    };

    int failures = 0;
    for (const auto& [name, run] : checks) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(checks.size()) - failures, checks.size());
    return failures == 0 ? 0 : 1;
}
