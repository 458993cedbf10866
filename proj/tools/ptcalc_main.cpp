#include "ptcalc/errors.hpp"
#include "ptcalc/geometry_file.hpp"
#include "ptcalc/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

struct Cli {
    std::string file;
    std::string json_out;
    ptcalc::RunFlags flags;
};

void add_common(CLI::App* cmd, Cli& cli) {
    cmd->add_option("file", cli.file, "geometry JSON file")->required();
    cmd->add_option("--samples", cli.flags.samples, "number of sample points (default: file value or 25)");
    cmd->add_option("--seed", cli.flags.seed, "sample sequence seed (default: file value or 1)");
    cmd->add_option("--tol", cli.flags.tol, "zero-verdict tolerance")->capture_default_str();
    cmd->add_option("--witness", cli.flags.witness, "nonzero-witness threshold")->capture_default_str();
    cmd->add_option("--depth", cli.flags.depth, "obstruction depth (0: curvature, 1: +derivatives)")
        ->check(CLI::Range(0, 1))->capture_default_str();
    cmd->add_option("--order", cli.flags.order, "jet order for source expressions")
        ->check(CLI::Range(3, 6))->capture_default_str();
    cmd->add_option("--steps", cli.flags.transport_steps, "RK4 steps per transport segment")
        ->check(CLI::Range(16, 100000))->capture_default_str();
    cmd->add_option("--json", cli.json_out, "write the JSON report to this file ('-' for stdout)");
    cmd->add_flag("--timings", cli.flags.timings, "include wall-clock timings in the report");
}

int emit(const ptcalc::RunResult& result, const Cli& cli) {
    std::string dump = result.report.dump(2) + "\n";
    if (cli.json_out == "-") {
        std::cout << dump;
    } else {
        if (!cli.json_out.empty()) {
            std::ofstream out(cli.json_out);
            if (!out) {
                std::cerr << "error: cannot write " << cli.json_out << "\n";
                return 3;
            }
            out << dump;
        }
        std::cout << ptcalc::summary_text(result.report);
    }
    return result.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"projective metrizability analyzer: curvature, solution-space bounds,\n"
                 "normality/Einstein verdicts, and the tau correspondence for chart geometries"};
    app.set_version_flag("--version", "ptcalc 0.1.0");
    app.require_subcommand(1);

    Cli cli;
    auto* analyze = app.add_subcommand("analyze", "curvature summary and projective flatness");
    auto* metriz = app.add_subcommand("metrizability", "solution-space dimension bound");
    auto* normal = app.add_subcommand("check-normal", "normality vs Einstein verdict");
    auto* corr = app.add_subcommand("correspond", "sigma <-> tau correspondence and det L");
    for (auto* cmd : {analyze, metriz, normal, corr}) add_common(cmd, cli);

    CLI11_PARSE(app, argc, argv);

    try {
        ptcalc::ChartGeometry geom = ptcalc::load_geometry_file(cli.file);
        ptcalc::RunResult result;
        if (analyze->parsed()) result = ptcalc::run_analyze(geom, cli.flags);
        else if (metriz->parsed()) result = ptcalc::run_metrizability(geom, cli.flags);
        else if (normal->parsed()) result = ptcalc::run_check_normal(geom, cli.flags);
        else result = ptcalc::run_correspond(geom, cli.flags);
        return emit(result, cli);
    } catch (const ptcalc::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ptcalc::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ptcalc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
