#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "corpus.hpp"
#include "ptcalc/report.hpp"
#include "ptcalc/solver.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ptcalc;
using ptcalc::testing::corpus;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RunResult run_command(const std::string& command, const ChartGeometry& geom) {
    RunFlags flags;
    if (command == "analyze") return run_analyze(geom, flags);
    if (command == "metrizability") return run_metrizability(geom, flags);
    if (command == "check-normal") return run_check_normal(geom, flags);
    return run_correspond(geom, flags);
}

void golden_check(const std::string& stem, const std::string& command) {
    CAPTURE(stem);
    CAPTURE(command);
    RunResult r = run_command(command, corpus(stem));
    std::string expected = slurp(std::string(PTCALC_GOLDEN_DIR) + "/" + stem + "." + command + ".json");
    CHECK(r.report.dump(2) + "\n" == expected);
}

int run_binary(const std::string& args) {
    std::string cmd = std::string(PTCALC_BIN) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

} // namespace

TEST_CASE("golden reports are byte-identical") {
    golden_check("sphere2", "analyze");
    golden_check("sphere2", "check-normal");
    golden_check("sphere2", "metrizability");
    golden_check("sphere2", "correspond");
    golden_check("hyperbolic2", "check-normal");
    golden_check("hyperbolic2", "correspond");
    golden_check("hyperbolic3", "check-normal");
    golden_check("flat2", "metrizability");
    golden_check("flat2", "correspond");
    golden_check("flat3", "metrizability");
    golden_check("flat4", "analyze");
    golden_check("noneinstein3d", "check-normal");
    golden_check("noneinstein3d", "correspond");
    golden_check("nonconstcurv2d", "check-normal");
    golden_check("perturbed2d", "analyze");
    golden_check("perturbed2d", "metrizability");
}

TEST_CASE("reports are deterministic and every verdict carries its residual") {
    ChartGeometry sph = corpus("sphere2");
    RunFlags flags;
    RunResult a = run_check_normal(sph, flags);
    RunResult b = run_check_normal(sph, flags);
    CHECK(a.report.dump() == b.report.dump());

    const auto& v = a.report["verdict"];
    CHECK(v.contains("is_normal"));
    CHECK(v.contains("normality_residual"));
    CHECK(v.contains("is_einstein"));
    CHECK(v.contains("einstein_residual"));
    CHECK(v.contains("tolerance"));

    // a different seed samples different points
    RunFlags seeded = flags;
    seeded.seed = 7;
    RunResult c = run_check_normal(sph, seeded);
    CHECK(c.report["params"]["seed"] == 7);
    CHECK(a.report["params"]["seed"] == 1);
}

TEST_CASE("golden verdict values across the corpus") {
    // spot-check the committed reports rather than re-deriving everything
    RunResult sph = run_command("check-normal", corpus("sphere2"));
    CHECK(sph.report["verdict"]["is_normal"] == true);
    CHECK(sph.report["verdict"]["is_einstein"] == true);
    CHECK(sph.exit_code == 0);

    RunResult wit = run_command("check-normal", corpus("noneinstein3d"));
    CHECK(wit.report["verdict"]["is_normal"] == false);
    CHECK(wit.report["verdict"]["is_einstein"] == false);
    CHECK(wit.report["theorem_mt_consistent"] == true);
    CHECK(wit.exit_code == 0);

    RunResult flat = run_command("metrizability", corpus("flat3"));
    CHECK(flat.report["obstruction"]["dim_upper_bound"] == 10);

    RunResult pert = run_command("metrizability", corpus("perturbed2d"));
    CHECK(pert.report["obstruction"]["dim_upper_bound"] == 0);

    RunResult deg = run_command("correspond", corpus("flat2"));
    CHECK(deg.exit_code == 6);
    CHECK(deg.report["correspondence"]["algebraically_degenerate"] == true);
}

TEST_CASE("theorem alarm fires when the tolerance slices between the residuals") {
    // pick a geometry whose two noise-level residuals are well separated, then
    // place the tolerance between them: the biconditional must trip the alarm
    for (const char* name : {"hyperbolic3", "hyperbolic2", "sphere2"}) {
        ChartGeometry geom = corpus(name);
        RunFlags flags;
        RunResult base = run_check_normal(geom, flags);
        double rn = base.report["verdict"]["normality_residual"].get<double>();
        double re = base.report["verdict"]["einstein_residual"].get<double>();
        double lo = std::min(rn, re), hi = std::max(rn, re);
        if (hi > 2.0 * lo && lo > 0.0) {
            RunFlags sliced = flags;
            sliced.tol = std::sqrt(lo * hi);
            RunResult alarm = run_check_normal(geom, sliced);
            CHECK(alarm.exit_code == 5);
            CHECK(alarm.report["theorem_mt_consistent"] == false);
            return;
        }
    }
    FAIL("no corpus geometry separated the residuals; alarm path not exercised");
}

TEST_CASE("rank estimation gap criterion") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    m(0, 0) = 1.0;
    m(1, 1) = 0.5;
    RankEstimate clean = estimate_rank(m);
    CHECK(clean.rank == 2);
    CHECK_FALSE(clean.indeterminate);

    // smooth decay below the floor with no 1e3 gap: indeterminate
    m(2, 2) = 1e-7;
    m(3, 3) = 1e-9;
    RankEstimate murky = estimate_rank(m);
    CHECK(murky.indeterminate);
    CHECK(murky.gap < 1e3);

    RankEstimate zero = estimate_rank(Eigen::MatrixXd::Zero(3, 3));
    CHECK(zero.rank == 0);
    CHECK_FALSE(zero.indeterminate);
}

TEST_CASE("cli binary exit codes") {
    std::string data = PTCALC_DATA_DIR;
    CHECK(run_binary("analyze " + data + "/flat2.json") == 0);
    CHECK(run_binary("correspond " + data + "/flat2.json") == 6);
    CHECK(run_binary("check-normal " + data + "/sphere2.json") == 0);

    auto malformed = write_temp("ptcalc_malformed.json", "{ not json");
    CHECK(run_binary("analyze " + malformed.string()) == 2);

    auto badexpr = write_temp("ptcalc_badexpr.json", R"({
      "name": "bad", "dimension": 2, "variables": ["x", "y"],
      "domain": [[-1, 1], [-1, 1]],
      "metric": [["1 + (x", "0"], ["0", "1"]]
    })");
    CHECK(run_binary("analyze " + badexpr.string()) == 2);

    auto missing = write_temp("ptcalc_missing.json", R"({
      "name": "bad", "dimension": 2, "variables": ["x", "y"],
      "domain": [[-1, 1], [-1, 1]]
    })");
    CHECK(run_binary("analyze " + missing.string()) == 2);

    // log hits nonpositive values inside the box: evaluation error
    auto domain_err = write_temp("ptcalc_domain.json", R"json({
      "name": "bad-domain", "dimension": 2, "variables": ["x", "y"],
      "domain": [[-1, 1], [-1, 1]],
      "metric": [["2 + log(x)", "0"], ["0", "1"]]
    })json");
    CHECK(run_binary("analyze " + domain_err.string()) == 3);

    CHECK(run_binary("analyze /nonexistent/file.json") == 2);
}

TEST_CASE("schema validation points into the document") {
    nlohmann::json doc = nlohmann::json::parse(R"({
      "name": "asym", "dimension": 2, "variables": ["x", "y"],
      "domain": [[-1, 1], [-1, 1]],
      "metric": [["1", "x"], ["y", "1"]]
    })");
    try {
        parse_geometry_json(doc);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("/metric") != std::string::npos);
    }

    nlohmann::json both = nlohmann::json::parse(R"({
      "name": "both", "dimension": 2, "variables": ["x", "y"],
      "domain": [[-1, 1], [-1, 1]],
      "metric": [["1", "0"], ["0", "1"]],
      "connection": {"Gamma": []}
    })");
    CHECK_THROWS_AS(parse_geometry_json(both), SchemaError);
}

TEST_CASE("timings appear only on request") {
    ChartGeometry flat = corpus("flat2");
    RunFlags flags;
    RunResult plain = run_metrizability(flat, flags);
    CHECK_FALSE(plain.report.contains("timings_ms"));
    flags.timings = true;
    RunResult timed = run_metrizability(flat, flags);
    REQUIRE(timed.report.contains("timings_ms"));
    CHECK(timed.report["timings_ms"].contains("obstruction"));
    CHECK(timed.report["timings_ms"].contains("d_residual"));
}

TEST_CASE("summary text mentions the key verdicts") {
    RunResult r = run_command("check-normal", corpus("sphere2"));
    std::string s = summary_text(r.report);
    CHECK(s.find("normal: yes") != std::string::npos);
    CHECK(s.find("Einstein: yes") != std::string::npos);
}
