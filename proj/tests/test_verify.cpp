#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "calabi/verify.hpp"

using namespace calabi;

namespace {

const std::string kScenarioDir = std::string(CALABI_SOURCE_DIR) + "/scenarios/";

Scenario load(const std::string& name) { return Scenario::from_file(kScenarioDir + name); }

Scenario quick(const std::string& name, int count = 10) {
    Scenario s = load(name);
    s.samples.count = count;
    return s;
}

const ClaimResult& claim_by_id(const VerificationReport& r, const std::string& id) {
    for (const auto& c : r.claims)
        if (c.id == id) return c;
    throw std::runtime_error("claim not in report: " + id);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<double> csv_row(const std::string& line) {
    std::vector<double> out;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(std::strtod(cell.c_str(), nullptr));
    return out;
}

}  // namespace

TEST_CASE("claim registry is complete and unique") {
    const auto& reg = detail::claim_registry();
    std::set<std::string> ids;
    for (const auto& c : reg) {
        CHECK(c.eval != nullptr);
        CHECK(ids.insert(c.id).second);  // no duplicate ids
        CHECK(c.default_tolerance > 0);
    }
    CHECK(reg.size() >= 35);

    // every registry entry appears exactly once in a report
    const VerificationReport r = run_verify(quick("tan_constants.json", 3));
    CHECK(r.claims.size() == reg.size());
    std::set<std::string> seen;
    for (const auto& c : r.claims) CHECK(seen.insert(c.id).second);
    for (const auto& c : reg) CHECK(seen.count(c.id) == 1);
}

TEST_CASE("tan constants scenario: every claim passes") {
    const VerificationReport r = run_verify(quick("tan_constants.json", 15));
    CHECK(r.pass);
    CHECK(r.points_accepted == 15);
    for (const auto& c : r.claims) {
        INFO(c.id << " extremum " << c.extremum << " tol " << c.tolerance);
        CHECK(c.status != "fail");
    }
    // the constants pair is not a space form, so the converse claims fire
    CHECK(claim_by_id(r, "remark.wminus_nonzero").status == "pass");
    CHECK(claim_by_id(r, "spaceform.r_eq_cpi").status == "skipped");
    CHECK(r.findings.empty());
}

TEST_CASE("CP^2 scenario: space-form claims pass with c_H = 4a^2") {
    const VerificationReport r = run_verify(quick("tan_cp2.json", 10));
    CHECK(r.pass);
    CHECK(claim_by_id(r, "spaceform.r_eq_cpi").status == "pass");
    CHECK(claim_by_id(r, "spaceform.tau").status == "pass");
    CHECK(claim_by_id(r, "spaceform.wminus_zero").status == "pass");
    CHECK(claim_by_id(r, "remark.wminus_nonzero").status == "skipped");
}

TEST_CASE("all four bundled scenarios pass") {
    for (const char* name : {"semisym_flat.json", "semisym_exp.json", "coth_sec.json",
                             "tanh_constants.json"}) {
        INFO(name);
        const VerificationReport r = run_verify(quick(name, 8));
        CHECK(r.pass);
    }
}

TEST_CASE("misconfigured pair: all points rejected, zero verified claims") {
    Scenario s = quick("tan_constants.json", 10);
    s.raw["H"] = "1";
    s.H_source.expression = "1";
    const VerificationReport r = run_verify(s);
    CHECK_FALSE(r.pass);
    CHECK(r.points_accepted == 0);
    CHECK(r.rejections.size() > 0);
    int pde_rejections = 0;
    for (const auto& rej : r.rejections)
        if (rej.reason.find("PDE") != std::string::npos) {
            ++pde_rejections;
            CHECK(std::abs(rej.pde_residual - 2.0) < 1e-12);
        }
    CHECK(pde_rejections > 0);
    for (const auto& c : r.claims) CHECK(c.status == "skipped");
}

TEST_CASE("reports are deterministic for a fixed scenario and seed") {
    const std::string a = run_verify(quick("coth_sec.json", 6)).to_json().dump(2);
    const std::string b = run_verify(quick("coth_sec.json", 6)).to_json().dump(2);
    CHECK(a == b);
    Scenario s = quick("coth_sec.json", 6);
    s.seed = 999;
    const std::string c = run_verify(s).to_json().dump(2);
    CHECK(a != c);  // the seed actually moves the sample set
}

TEST_CASE("tolerance overrides are honored per claim") {
    Scenario s = quick("tan_constants.json", 5);
    s.tolerances.overrides["thm.iv.tau"] = 1e-30;  // impossible
    const VerificationReport r = run_verify(s);
    CHECK_FALSE(r.pass);
    CHECK(claim_by_id(r, "thm.iv.tau").status == "fail");
    CHECK(claim_by_id(r, "thm.iv.tau").tolerance == 1e-30);
    // a forced closed-form failure surfaces in the findings list
    CHECK_FALSE(r.findings.empty());
}

TEST_CASE("scenario parsing errors") {
    CHECK_THROWS_AS(Scenario::from_json({{"family", "spherical"}}), ConfigError);
    CHECK_THROWS_AS(Scenario::from_json({{"family", "tan"}, {"a", 1.0}, {"h", "1"}}),
                    ConfigError);  // missing H
    CHECK_THROWS_AS(Scenario::from_json({{"family", "tan"}, {"h", "1"}, {"H", "1"}}),
                    ConfigError);  // a = 0
    nlohmann::json bad_solve = {{"family", "tan"}, {"a", 1.0},
                                {"h", nlohmann::json{{"solve", nlohmann::json::object()}}},
                                {"H", "1"}};
    CHECK_THROWS_AS(Scenario::from_json(bad_solve), ConfigError);  // h cannot be solved
    CHECK_THROWS_AS(Scenario::from_file(kScenarioDir + "missing.json"), ConfigError);
}

TEST_CASE("profile CSV") {
    SECTION("tan constants along z: kappa_closed = -6 / cos^2(z)") {
        Scenario s = load("tan_constants.json");
        s.samples.ranges = std::array<std::array<double, 2>, 4>{
            {{0.0, 0.0}, {0.0, 0.0}, {-0.6, 0.6}, {0.0, 0.0}}};
        const auto lines = split_lines(run_profile(s, 2, 25));
        REQUIRE(lines.size() == 26);
        CHECK(lines[0].rfind("coordinate,tau_numeric,tau_closed,kappa_numeric,kappa_closed", 0) ==
              0);
        int numeric_rows = 0;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto row = csv_row(lines[i]);
            REQUIRE(row.size() == 12);
            const double z = row[0];
            CHECK(std::abs(row[4] - (-6.0 / (std::cos(z) * std::cos(z)))) < 1e-9);
            if (!std::isnan(row[3])) {
                ++numeric_rows;
                CHECK(std::abs(row[3] - row[4]) < 1e-7);   // kappa numeric vs closed
                CHECK(std::abs(row[7] - 4.0) < 1e-7);      // k34 numeric
            }
        }
        CHECK(numeric_rows >= 20);  // the beta = 0 band around z = 0 yields nan rows
        CHECK(numeric_rows < 25);
    }
    SECTION("flat pair: curvature columns vanish") {
        Scenario s = load("semisym_flat.json");
        const auto lines = split_lines(run_profile(s, 2, 9));
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto row = csv_row(lines[i]);
            for (int col : {1, 2, 3, 4, 5, 6, 7, 8})
                if (!std::isnan(row[std::size_t(col)]))
                    CHECK(std::abs(row[std::size_t(col)]) < 1e-7);
        }
    }
    SECTION("tanh constants: K34 column is constant -4") {
        Scenario s = load("tanh_constants.json");
        const auto lines = split_lines(run_profile(s, 2, 12));
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto row = csv_row(lines[i]);
            CHECK(std::abs(row[8] + 4.0) < 1e-12);                    // closed
            if (!std::isnan(row[7])) CHECK(std::abs(row[7] + 4.0) < 1e-7);  // numeric
        }
    }
    SECTION("t-axis profile stays constant for constant pairs") {
        Scenario s = load("tan_constants.json");
        s.samples.points.push_back({0.1, 0.2, 0.4, 0.0});
        const auto lines = split_lines(run_profile(s, 3, 5));
        const auto first = csv_row(lines[1]);
        for (std::size_t i = 2; i < lines.size(); ++i) {
            const auto row = csv_row(lines[i]);
            CHECK(std::abs(row[3] - first[3]) < 1e-9);
        }
    }
}

TEST_CASE("run_solve and grid-tier verification round trip") {
    const auto tmp = std::filesystem::temp_directory_path();
    const std::string grid_path = (tmp / "calabi_tan_H.csv").string();

    Scenario s = load("tan_solve_constant.json");
    const SolveOutcome outcome = run_solve(s, grid_path);
    CHECK(outcome.converged);
    CHECK(outcome.residual < 1e-10);
    CHECK(outcome.summary.at("converged").get<bool>());

    const Grid2D H = read_grid_csv(grid_path);
    for (double v : H.values) CHECK(std::abs(v - 1.0 / std::sqrt(2.0)) < 1e-10);

    // feed the solved grid back through the verifier at grid tolerance
    Scenario v;
    nlohmann::json vj = {{"family", "tan"},
                         {"a", 1.0},
                         {"h", "1"},
                         {"H", nlohmann::json{{"grid", grid_path}}},
                         {"samples", nlohmann::json{{"count", 6}}},
                         {"seed", 7}};
    v = Scenario::from_json(vj);
    const VerificationReport r = run_verify(v);
    CHECK(r.pass);
    CHECK(r.points_accepted == 6);
    // grid tier floors residual-claim tolerances at 1e-3
    CHECK(claim_by_id(r, "thm.iv.tau").tolerance == 1e-3);
    std::remove(grid_path.c_str());
}

TEST_CASE("grid-tier verification of a sampled analytic pair") {
    const auto tmp = std::filesystem::temp_directory_path();
    const std::string grid_path = (tmp / "calabi_semisym_H.csv").string();
    // H = exp(r^2/2) sampled at spacing 1/64: quintic-stencil derivatives are
    // accurate well below the 1e-3 grid tolerance
    Grid2D H = Grid2D::make(65, 65, 1.0 / 64, -0.5, -0.5);
    for (int j = 0; j < 65; ++j)
        for (int i = 0; i < 65; ++i) {
            const double x = H.x_of(i), y = H.y_of(j);
            H.at(i, j) = std::exp((x * x + y * y) / 2.0);
        }
    write_grid_csv(H, grid_path);

    nlohmann::json vj = {{"family", "semi_symmetric"},
                         {"h", "1"},
                         {"H", nlohmann::json{{"grid", grid_path}}},
                         {"samples", nlohmann::json{{"count", 6}}},
                         {"seed", 21}};
    const VerificationReport r = run_verify(Scenario::from_json(vj));
    INFO(r.to_json().dump(2));
    CHECK(r.pass);
    CHECK(r.points_accepted == 6);
    std::remove(grid_path.c_str());
}

TEST_CASE("negative a is normalized with a note") {
    nlohmann::json j = {{"family", "tanh"}, {"a", -2.0}, {"h", "1"}, {"H", "1/sqrt(2)"},
                        {"samples", nlohmann::json{{"count", 3}}}};
    const Scenario s = Scenario::from_json(j);
    CHECK(s.spec.a == 2.0);
    REQUIRE_FALSE(s.notes.empty());
    const VerificationReport r = run_verify(s);
    CHECK_FALSE(r.notes.empty());
}

TEST_CASE("solve directive validation") {
    SECTION("missing boundary") {
        nlohmann::json j = {{"family", "tan"},   {"a", 1.0},
                            {"h", "1"},          {"H", nlohmann::json{{"solve", {{"nx", 17}, {"ny", 17}}}}},
                            {"samples", nlohmann::json{{"count", 3}}}};
        CHECK_THROWS_AS(run_solve(Scenario::from_json(j)), ConfigError);
    }
    SECTION("verify refuses an unsolved directive") {
        const Scenario s = load("tan_solve_constant.json");
        CHECK_THROWS_AS(run_verify(s), ConfigError);
    }
}
