// calabi: verify | profile | solve over scenario JSON files.
// Exit codes: 0 pass, 1 claim failure, 2 configuration error, 3 solver
// non-convergence.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "calabi/verify.hpp"

namespace {

void apply_tolerance_overrides(calabi::Scenario& scenario,
                               const std::vector<std::string>& overrides) {
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw calabi::ConfigError("--tolerance expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        double value = 0;
        try {
            value = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw calabi::ConfigError("--tolerance " + key + ": bad numeric value");
        }
        if (key == "linear")
            scenario.tolerances.linear = value;
        else if (key == "spectral")
            scenario.tolerances.spectral = value;
        else if (key == "grid")
            scenario.tolerances.grid = value;
        else if (key == "pde")
            scenario.tolerances.pde = value;
        else
            scenario.tolerances.overrides[key] = value;
    }
}

int do_verify(calabi::Scenario scenario, const std::string& out) {
    const calabi::VerificationReport report = calabi::run_verify(scenario);
    for (const auto& c : report.claims) {
        const char* tag = c.status == "pass" ? "PASS" : (c.status == "fail" ? "FAIL" : "SKIP");
        std::printf("[%s] %-28s extremum %-12.3e tol %-9.1e points %d\n", tag, c.id.c_str(),
                    c.extremum, c.tolerance, c.points);
    }
    std::printf("points accepted: %d, rejected: %zu\n", report.points_accepted,
                report.rejections.size());
    for (const auto& f : report.findings) std::printf("FINDING: %s\n", f.c_str());
    const std::string path = !out.empty() ? out : scenario.report_path;
    if (!path.empty()) {
        std::ofstream file(path);
        if (!file) throw calabi::ConfigError("cannot write report to '" + path + "'");
        file << report.to_json().dump(2) << "\n";
        std::printf("report: %s\n", path.c_str());
    }
    std::printf("%s\n", report.pass ? "PASS" : "FAIL");
    return report.pass ? 0 : 1;
}

int do_profile(const calabi::Scenario& scenario, const std::string& axis, int count,
               const std::string& out) {
    int axis_index = -1;
    if (axis == "z") axis_index = 2;
    if (axis == "t") axis_index = 3;
    if (axis_index < 0) throw calabi::ConfigError("--axis must be z or t");
    const std::string csv = calabi::run_profile(scenario, axis_index, count);
    if (out.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        std::ofstream file(out);
        if (!file) throw calabi::ConfigError("cannot write profile to '" + out + "'");
        file << csv;
        std::printf("profile: %s\n", out.c_str());
    }
    return 0;
}

int do_solve(const calabi::Scenario& scenario, const std::string& out) {
    const calabi::SolveOutcome outcome = calabi::run_solve(scenario, out);
    std::printf("%s residual %.3e grid %dx%d -> %s\n",
                outcome.converged ? "converged" : "NOT CONVERGED", outcome.residual,
                outcome.grid_nx, outcome.grid_ny, outcome.H_out.c_str());
    const std::string summary_path = scenario.report_path;
    if (!summary_path.empty()) {
        std::ofstream file(summary_path);
        if (!file) throw calabi::ConfigError("cannot write summary to '" + summary_path + "'");
        file << outcome.summary.dump(2) << "\n";
    } else {
        std::printf("%s\n", outcome.summary.dump(2).c_str());
    }
    return outcome.converged ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"curvature verification engine for generalized Calabi-type Kaehler metrics"};
    app.require_subcommand(1);

    std::string scenario_path, out, axis = "z";
    int count = 25;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::vector<std::string> tolerance_overrides;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("scenario", scenario_path, "scenario JSON file")->required();
        sub->add_option("--seed", seed, "override the scenario RNG seed")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--tolerance", tolerance_overrides,
                        "override a tolerance, key=value (linear, spectral, grid, pde, or a "
                        "claim id)");
        sub->add_option("--out", out, "output path (report JSON / profile CSV / solved grid)");
    };

    CLI::App* verify = app.add_subcommand("verify", "run the full verification matrix");
    add_common(verify);
    CLI::App* profile = app.add_subcommand("profile", "tabulate curvature along an axis");
    add_common(profile);
    profile->add_option("--axis", axis, "z or t")->capture_default_str();
    profile->add_option("--count", count, "number of samples")->capture_default_str();
    CLI::App* solve = app.add_subcommand("solve", "solve the surface constraint for H");
    add_common(solve);

    CLI11_PARSE(app, argc, argv);

    try {
        calabi::Scenario scenario = calabi::Scenario::from_file(scenario_path);
        apply_tolerance_overrides(scenario, tolerance_overrides);
        if (seed_given) scenario.seed = seed;
        if (verify->parsed()) return do_verify(std::move(scenario), out);
        if (profile->parsed()) return do_profile(scenario, axis, count, out);
        if (solve->parsed()) return do_solve(scenario, out);
        return 2;
    } catch (const calabi::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const calabi::ParseError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const calabi::NonConvergence& e) {
        std::fprintf(stderr, "solver: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
