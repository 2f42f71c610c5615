#pragma once

// JSON session configs, JSON reports and CSV transcripts.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "json.hpp"

#include "ddiqkd/analysis.hpp"
#include "ddiqkd/protocol.hpp"

namespace ddiqkd {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Validated config with documented defaults for absent fields. Throws
/// ValidationError whose field() is the JSON path of the offending value.
SessionConfig parse_config(const nlohmann::json& doc);

/// Normalized form: every field present, detectors as an array of four.
nlohmann::json serialize_config(const SessionConfig& config);

/// FNV-1a 64 of the normalized config's compact dump, as 16 hex digits.
std::string config_hash(const SessionConfig& config);

nlohmann::json to_json(const DetectabilityReport& report);
nlohmann::json to_json(const BlindingPlan& plan);
/// Report with tool version, config hash and seed embedded.
nlohmann::json report_to_json(const SessionReport& report, const SessionConfig& config);

/// Column order of the transcript CSV.
inline constexpr std::string_view kTranscriptHeader =
    "slot,alice_basis,alice_bit,bob_basis,bob_bit,arrived,reported_outcome,double_click";

/// Leading `# key=value` comment lines carry version, config hash, seed and
/// the expected report rate; then the header and one row per slot.
void write_transcript_csv(std::ostream& out, const Transcript& transcript, const SessionConfig& config);

struct ParsedTranscript {
    PublicView view;
    /// From the `# expected_rate=` comment when present.
    std::optional<double> expected_rate;
    std::optional<double> expected_double_click_rate;
    std::optional<std::uint64_t> seed;
    std::string config_hash;
};

/// Reads only the public columns (slot, bob_basis, reported_outcome,
/// double_click). Throws ValidationError "line N: ..." on malformed input.
ParsedTranscript read_transcript_csv(std::istream& in);

}  // namespace ddiqkd
