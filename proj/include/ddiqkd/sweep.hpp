#pragma once

// Batches of independent sessions. The parallel runners fan sessions out over
// OpenMP threads and store results by index, so their output is identical to
// the serial reference runners regardless of thread count or scheduling.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddiqkd/protocol.hpp"

namespace ddiqkd {

/// Outcome of one session in a batch: a report, or the infeasibility message.
struct BatchEntry {
    std::optional<SessionReport> report;
    std::string error;
};

std::vector<BatchEntry> run_batch(std::span<const SessionConfig> configs);
std::vector<BatchEntry> run_batch_serial(std::span<const SessionConfig> configs);

/// `count` copies of `base` with seeds derive_seed(master_seed, i).
std::vector<SessionConfig> seeded_copies(const SessionConfig& base, std::uint64_t master_seed, std::size_t count);

struct GridAxis {
    /// Dotted config path, e.g. "channel.transmittance" or "covert.eta_true".
    std::string path;
    std::vector<nlohmann::json> values;
};

struct SweepGrid {
    std::vector<GridAxis> axes;

    /// Number of parameter points (product of axis lengths).
    std::size_t size() const noexcept;
};

/// {"parameters": {"<path>": [v1, v2, ...], ...}}. Axes are ordered by path;
/// the last axis varies fastest. Throws ValidationError on an empty grid.
SweepGrid parse_grid(const nlohmann::json& doc);

struct SweepRow {
    std::size_t point_index = 0;
    std::size_t session_index = 0;
    std::uint64_t seed = 0;
    std::vector<nlohmann::json> values;
    /// attack_feasible at this point; covert mode only.
    std::optional<bool> feasible;
    BatchEntry result;
};

struct SweepPlan {
    std::vector<SessionConfig> configs;
    std::vector<SweepRow> rows;
};

/// Expands the grid over `base_config` (raw JSON, so every field can be
/// swept) with `n_seeds` sessions per point. Session i at every point uses
/// seed derive_seed(master_seed, i). Throws ValidationError on bad points.
SweepPlan plan_sweep(const nlohmann::json& base_config, const SweepGrid& grid, std::size_t n_seeds,
                     std::uint64_t master_seed);

std::vector<SweepRow> run_sweep(const nlohmann::json& base_config, const SweepGrid& grid, std::size_t n_seeds,
                                std::uint64_t master_seed);
std::vector<SweepRow> run_sweep_serial(const nlohmann::json& base_config, const SweepGrid& grid, std::size_t n_seeds,
                                       std::uint64_t master_seed);

/// Rows in (point, session) order, one column per SessionReport field.
void write_sweep_csv(std::ostream& out, const SweepGrid& grid, std::span<const SweepRow> rows,
                     const nlohmann::json& base_config, std::uint64_t master_seed);

}  // namespace ddiqkd
