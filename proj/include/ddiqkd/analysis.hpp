#pragma once

// Monitors the legitimate parties can run on the public record, and the
// leakage metric the experimenter computes from ground truth.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ddiqkd/quantum.hpp"

namespace ddiqkd {

/// What Bob announces or observes himself: which slots yielded a single-click
/// report with its outcome and his basis, plus his own double-click count.
struct PublicView {
    std::uint64_t n_slots = 0;
    std::vector<std::uint64_t> reported_slots;
    std::vector<BellOutcome> outcomes;
    std::vector<Basis> bob_bases;
    std::uint64_t double_clicks = 0;
};

struct ChiSquareResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 1;
};

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, int dof);

/// Even/odd counts of consecutive-report gaps against 50/50 (1 dof). Absent with < 2 reports.
std::optional<ChiSquareResult> gap_parity_uniformity(std::span<const std::uint64_t> reported_slots);

/// (observed − n·r) / √(n·r·(1−r)). Degenerate r ∈ {0, 1}: 0 when observed
/// equals n·r, ±∞ otherwise.
double rate_consistency(std::uint64_t observed_reports, std::uint64_t n_slots, double expected_rate);

struct OutcomeHistogram {
    std::array<std::uint64_t, 4> counts{};
    std::array<double, 4> frequencies{};
    ChiSquareResult test;
};

/// Outcome frequencies against the uniform honest expectation (3 dof). Absent with no reports.
std::optional<OutcomeHistogram> outcome_histogram(std::span<const BellOutcome> outcomes);

/// Fraction of positions where Eve's bit equals Bob's; 0 for empty input.
/// Throws ValidationError on length mismatch.
double leakage(std::span<const BitValue> eve_bits, std::span<const BitValue> bob_bits);

double double_click_rate(const PublicView& view) noexcept;

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Kolmogorov–Smirnov distance between the consecutive-report gap
/// distribution and a geometric law fitted by its mean. Goes beyond the
/// parity test; the p-value uses the asymptotic Kolmogorov law and is
/// approximate for discrete data with a fitted parameter. Absent with < 2 gaps.
std::optional<KsResult> gap_geometric_ks(std::span<const std::uint64_t> reported_slots);

enum class Verdict { Pass, Reject, Absent };

std::string_view to_string(Verdict v) noexcept;

struct MonitorParams {
    double alpha = 0.01;
    /// Bob's belief T·η_expected.
    double expected_rate = 0.02;
    /// Honest double-click probability per slot (0 without dark counts).
    double expected_double_click_rate = 0.0;
};

struct DetectabilityReport {
    MonitorParams params;
    std::optional<ChiSquareResult> gap_parity;
    double rate_z_score = 0.0;
    std::optional<OutcomeHistogram> outcomes;
    double double_click_rate = 0.0;
    std::optional<KsResult> gap_ks;

    Verdict gap_parity_verdict = Verdict::Absent;
    Verdict rate_verdict = Verdict::Pass;
    Verdict outcome_verdict = Verdict::Absent;
    Verdict double_click_verdict = Verdict::Pass;

    /// No monitor rejects (absent monitors do not count against).
    bool all_pass() const noexcept;
};

/// Runs every monitor on the public view only.
DetectabilityReport assess(const PublicView& view, const MonitorParams& params);

/// Honest double-click probability per slot given per-detector dark-count
/// probabilities, assuming a photon may add at most one click.
double honest_double_click_prob(std::span<const double> dark_probs, double click_prob);

}  // namespace ddiqkd
