#pragma once

// Detector-blinding attack: intercept-resend with bright pulses against
// detectors held in linear mode, and a grid search for the pulse that clicks
// only on basis agreement while avoiding double clicks.

#include <span>
#include <vector>

#include "ddiqkd/channel.hpp"
#include "ddiqkd/devices.hpp"

namespace ddiqkd {

struct BlindingPlan {
    double wavelength_nm = kDefaultWavelengthNm;
    double peak_power_mw = 0.0;
    /// Fractions over the 8 Eve-basis = Bob-basis cases.
    double same_basis_single_prob = 0.0;
    double same_basis_double_prob = 0.0;
    /// Fraction of the 8 Eve-basis ≠ Bob-basis cases with any click; 0 for a valid plan.
    double cross_basis_click_prob = 0.0;

    friend bool operator==(const BlindingPlan&, const BlindingPlan&) = default;
};

/// Exhaustive 16-case evaluation (Eve's resent eigenstate × Bob's spatial state) of one pulse.
BlindingPlan evaluate_pulse(const DetectorArray& detectors, double wavelength_nm, double peak_power_mw);

/// Ordering used by the optimizer: more same-basis singles, then fewer
/// doubles, then lower power. Invalid plans never win over valid ones.
bool plan_better(const BlindingPlan& candidate, const BlindingPlan& incumbent) noexcept;
bool plan_viable(const BlindingPlan& plan) noexcept;

/// Best viable plan over the grid. Grid points are evaluated in parallel and
/// reduced in (wavelength, power) order. Throws NoViablePlan when no point
/// has zero cross-basis clicks and some same-basis click.
BlindingPlan optimize_pulse(const DetectorArray& detectors, std::span<const double> wavelength_grid,
                            std::span<const double> power_grid);

/// Serial reference for optimize_pulse.
BlindingPlan optimize_pulse_serial(const DetectorArray& detectors, std::span<const double> wavelength_grid,
                                   std::span<const double> power_grid);

struct BlindingRound {
    DetectionResult detection;
    EncoderSetting eve;
};

/// One attacked slot: intercept_resend, bsm_respond_bright, classify.
BlindingRound blinding_round(const PolarizationQubit& alice_pol, const SpatialQubit& bob_spatial,
                             const EveInterceptConfig& cfg, const DetectorArray& detectors, Rng& rng);

}  // namespace ddiqkd
