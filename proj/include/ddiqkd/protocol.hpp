#pragma once

// Full DDI-QKD sessions: per-slot preparation, transmission, spatial
// encoding and BSM reporting in honest or attacked modes, followed by
// sifting, QBER, key-rate and detectability accounting.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ddiqkd/analysis.hpp"
#include "ddiqkd/blinding.hpp"
#include "ddiqkd/channel.hpp"
#include "ddiqkd/covert.hpp"
#include "ddiqkd/devices.hpp"

namespace ddiqkd {

enum class Mode {
    Honest,
    /// Malicious BSM with Trojan readout and gap-parity reporting.
    Covert,
    /// Bright-pulse intercept-resend against blinded detectors.
    Blinding,
    /// Baseline: Eve measures Alice's photon and resends a single photon.
    InterceptResend,
};

std::string_view to_string(Mode m) noexcept;
Mode parse_mode(std::string_view s);

enum class DoubleClickPolicy { DiscardAndCount };

struct CovertConfig {
    double eta_true = 0.9;
    bool keyed = true;
    std::uint64_t key_seed = 0x5EED;
    /// Thin parity-valid detections to hit T·η_expected. When off every
    /// parity-valid detection is reported and no feasibility check is made.
    bool rate_matching = true;
    TrojanProbe trojan{};
};

struct BlindingGrid {
    std::vector<double> wavelength_grid;
    std::vector<double> power_grid;
};

struct BlindingConfig {
    EveInterceptConfig intercept{};
    /// When present, the pulse is chosen by optimize_pulse over this grid.
    std::optional<BlindingGrid> optimize;
};

struct SessionConfig {
    std::uint64_t n_slots = 100000;
    std::uint64_t seed = 1;
    ChannelSpec channel{};
    DetectorArray detectors = uniform_detectors(0.2);
    double wavelength_nm = kDefaultWavelengthNm;
    /// Bob's belief about the BSM efficiency.
    double eta_expected = 0.2;
    /// Probability of choosing Z, for both parties.
    double basis_choice_prob = 0.5;
    /// Probability that Bob's encoded bit is 1.
    double bob_bit_one_prob = 0.5;
    DoubleClickPolicy double_click_policy = DoubleClickPolicy::DiscardAndCount;
    Mode mode = Mode::Honest;
    CovertConfig covert{};
    BlindingConfig blinding{};
    double alpha = 0.01;
};

/// Throws ValidationError naming the offending field.
void validate(const SessionConfig& config);

struct SlotRecord {
    std::uint64_t slot = 0;
    EncoderSetting alice;
    EncoderSetting bob;
    bool arrived = false;
    /// Ground truth: the BSM registered at least one click.
    bool detected = false;
    std::optional<BellOutcome> reported;
    bool double_click = false;
    /// Eve's measured basis and bit in intercepting modes.
    std::optional<EncoderSetting> eve;
};

struct Transcript {
    std::vector<SlotRecord> records;

    PublicView public_view() const;
};

struct SiftedEvent {
    std::uint64_t slot = 0;
    Basis basis = Basis::Z;
    BellOutcome outcome = BellOutcome::PhiPlus;
    BitValue alice_bit = BitValue::Zero;
    BitValue bob_bit = BitValue::Zero;
    std::optional<EncoderSetting> eve;
};

struct SessionReport {
    Mode mode = Mode::Honest;
    std::uint64_t seed = 0;
    std::uint64_t sent = 0;
    std::uint64_t arrived = 0;
    std::uint64_t reported = 0;
    std::uint64_t sifted = 0;
    std::uint64_t double_clicks = 0;
    /// Absent when nothing survives sifting.
    std::optional<double> qber;
    double sifted_fraction = 0.0;
    double key_rate = 0.0;
    double reported_rate = 0.0;
    double double_click_rate = 0.0;
    /// Covert: fraction of reported Bob bits Eve decodes correctly.
    /// Intercepting modes: fraction of sifted key bits Eve holds. Honest: 0.
    double eve_leak_fraction = 0.0;
    std::uint64_t eve_bits_recovered = 0;
    std::optional<double> thinning_prob;
    std::optional<BlindingPlan> blinding_plan;
    DetectabilityReport detectability;
};

struct SessionResult {
    Transcript transcript;
    SessionReport report;
};

/// Throws ValidationError for bad configs and InfeasibleScenario (or
/// NoViablePlan) before simulating when the attack cannot be realized.
SessionResult run_session(const SessionConfig& config);

/// Reported single-click events where Alice and Bob chose the same basis.
std::vector<SiftedEvent> sift(const Transcript& transcript);

/// Fraction of sifted events where Bob's reconciled bit differs from Alice's.
std::optional<double> compute_qber(std::span<const SiftedEvent> sifted);

double binary_entropy(double p) noexcept;

/// Asymptotic one-way rate: sifted_fraction · max(0, 1 − 2·H2(qber)).
double key_rate(double qber, double sifted_fraction);

struct BlindingStats {
    double detection_rate = 0.0;
    std::optional<double> qber;
    double double_click_rate = 0.0;
    /// Fraction of sifted bits where Eve's stored measurement equals the key bit.
    double eve_key_fraction = 0.0;
    std::uint64_t sifted = 0;
};

BlindingStats blinding_session_stats(const Transcript& transcript);

}  // namespace ddiqkd
