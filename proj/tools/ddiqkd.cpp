// ddiqkd-sim command line: run one session, sweep a parameter grid, or
// analyze a transcript with the public-view monitors.
//
// Exit codes: 0 success, 1 usage/parse/validation error, 2 infeasible scenario.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ddiqkd/config.hpp"
#include "ddiqkd/error.hpp"
#include "ddiqkd/protocol.hpp"
#include "ddiqkd/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ddiqkd::ValidationError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ddiqkd::ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ddiqkd::ValidationError("cannot write '" + path.string() + "'");
    return out;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out_dir) {
    json doc = load_json(config_path);
    if (seed) doc["seed"] = *seed;
    const ddiqkd::SessionConfig config = ddiqkd::parse_config(doc);
    const ddiqkd::SessionResult result = ddiqkd::run_session(config);

    auto csv = open_out(fs::path(out_dir) / "transcript.csv");
    ddiqkd::write_transcript_csv(csv, result.transcript, config);
    auto report = open_out(fs::path(out_dir) / "report.json");
    report << ddiqkd::report_to_json(result.report, config).dump(2) << '\n';
    std::cout << "wrote " << (fs::path(out_dir) / "transcript.csv").string() << " and "
              << (fs::path(out_dir) / "report.json").string() << " (seed " << config.seed << ")\n";
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path, std::size_t seeds,
              std::optional<std::uint64_t> master_seed, const std::string& out_path) {
    const json base = load_json(config_path);
    const ddiqkd::SweepGrid grid = ddiqkd::parse_grid(load_json(grid_path));
    const std::uint64_t master = master_seed.value_or(ddiqkd::parse_config(base).seed);
    const auto rows = ddiqkd::run_sweep(base, grid, seeds, master);
    auto out = open_out(out_path);
    ddiqkd::write_sweep_csv(out, grid, rows, base, master);
    std::cout << "wrote " << rows.size() << " rows to " << out_path << '\n';
    return kExitOk;
}

int cmd_analyze(const std::string& transcript_path, const std::string& out_path, std::optional<double> expected_rate,
                double alpha) {
    std::ifstream in(transcript_path);
    if (!in) throw ddiqkd::ValidationError("cannot open '" + transcript_path + "'");
    const ddiqkd::ParsedTranscript parsed = ddiqkd::read_transcript_csv(in);

    ddiqkd::MonitorParams params;
    params.alpha = alpha;
    if (expected_rate) {
        params.expected_rate = *expected_rate;
    } else if (parsed.expected_rate) {
        params.expected_rate = *parsed.expected_rate;
    } else {
        throw ddiqkd::ValidationError("transcript has no expected_rate comment; pass --expected-rate");
    }
    params.expected_double_click_rate = parsed.expected_double_click_rate.value_or(0.0);

    const ddiqkd::DetectabilityReport report = ddiqkd::assess(parsed.view, params);
    json doc;
    doc["tool"] = "ddiqkd-sim";
    doc["version"] = std::string(ddiqkd::kToolVersion);
    doc["config_hash"] = parsed.config_hash;
    doc["seed"] = parsed.seed ? json(*parsed.seed) : json(nullptr);
    doc["n_slots"] = parsed.view.n_slots;
    doc["reported"] = parsed.view.reported_slots.size();
    doc["detectability"] = ddiqkd::to_json(report);
    auto out = open_out(out_path);
    out << doc.dump(2) << '\n';
    std::cout << "wrote " << out_path << (report.all_pass() ? " (all monitors pass)" : " (some monitor rejects)")
              << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ddiqkd-sim: DDI-QKD session simulator with covert-channel and blinding attacks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "Run one session; writes transcript.csv and report.json");
    run->add_option("--config", config_path, "Session config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out_dir, "Output directory")->required();

    std::string grid_path;
    std::string sweep_out;
    std::size_t seeds = 1;
    std::optional<std::uint64_t> master_seed;
    auto* sweep = app.add_subcommand("sweep", "Run a parameter grid; writes one CSV row per (point, session)");
    sweep->add_option("--config", config_path, "Base session config (JSON)")->required()->check(CLI::ExistingFile);
    sweep->add_option("--grid", grid_path, "Grid spec (JSON)")->required()->check(CLI::ExistingFile);
    sweep->add_option("--seeds", seeds, "Sessions per grid point")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", master_seed, "Master seed (defaults to the config seed)");
    sweep->add_option("--out", sweep_out, "Output CSV")->required();

    std::string transcript_path;
    std::string analyze_out;
    std::optional<double> expected_rate;
    double alpha = 0.01;
    auto* analyze = app.add_subcommand("analyze", "Run the detectability monitors on a transcript CSV");
    analyze->add_option("--transcript", transcript_path, "Transcript CSV")->required()->check(CLI::ExistingFile);
    analyze->add_option("--out", analyze_out, "Output JSON")->required();
    analyze->add_option("--expected-rate", expected_rate, "Override the expected report rate T*eta_expected");
    analyze->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) return cmd_run(config_path, seed, out_dir);
        if (*sweep) return cmd_sweep(config_path, grid_path, seeds, master_seed, sweep_out);
        if (*analyze) return cmd_analyze(transcript_path, analyze_out, expected_rate, alpha);
    } catch (const ddiqkd::InfeasibleScenario& e) {
        std::cerr << "infeasible scenario: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const ddiqkd::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
