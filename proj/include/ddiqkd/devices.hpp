#pragma once

// Detector and BSM models: Born-rule photon detection with efficiency and
// dark counts, and the classical threshold response of blinded detectors.

#include <array>
#include <map>
#include <optional>
#include <span>

#include "ddiqkd/quantum.hpp"
#include "ddiqkd/rng.hpp"

namespace ddiqkd {

inline constexpr double kDefaultWavelengthNm = 1550.0;

/// Wavelength-indexed table. Lookups at an unlisted wavelength use the
/// nearest listed entry; on an exact tie the shorter wavelength wins.
class WavelengthTable {
public:
    WavelengthTable() = default;
    explicit WavelengthTable(double uniform_value) { entries_[kDefaultWavelengthNm] = uniform_value; }
    explicit WavelengthTable(std::map<double, double> entries) : entries_(std::move(entries)) {}

    double at(double wavelength_nm) const;
    void set(double wavelength_nm, double value) { entries_[wavelength_nm] = value; }
    const std::map<double, double>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    friend bool operator==(const WavelengthTable&, const WavelengthTable&) = default;

private:
    std::map<double, double> entries_;
};

struct DetectorSpec {
    BellOutcome id = BellOutcome::PhiPlus;
    WavelengthTable efficiency{0.2};
    double dark_count_prob = 0.0;
    /// Linear-mode click threshold P_th in mW.
    WavelengthTable blind_threshold{1.0};

    friend bool operator==(const DetectorSpec&, const DetectorSpec&) = default;
};

using DetectorArray = std::array<DetectorSpec, 4>;

/// Four identical detectors ordered by BellOutcome.
DetectorArray uniform_detectors(double efficiency, double dark_count_prob = 0.0, double threshold_mw = 1.0);

/// Throws ValidationError on out-of-range efficiency, dark-count probability,
/// non-positive thresholds, empty tables or misordered ids.
void validate(const DetectorArray& detectors);

using ClickPattern = std::array<bool, 4>;

struct DetectionResult {
    enum class Kind { NoClick, Single, Double };

    Kind kind = Kind::NoClick;
    ClickPattern clicks{};

    bool is_single() const noexcept { return kind == Kind::Single; }
    bool is_double() const noexcept { return kind == Kind::Double; }
    /// The clicked outcome for a Single, absent otherwise.
    std::optional<BellOutcome> single() const noexcept;

    friend bool operator==(const DetectionResult&, const DetectionResult&) = default;
};

struct BrightPulse {
    double peak_power_mw = 1.0;
    double wavelength_nm = kDefaultWavelengthNm;
    PolarizationQubit polarization{};
};

DetectionResult classify(const ClickPattern& pattern) noexcept;

/// Sample one Bell outcome, apply that detector's efficiency, then add
/// independent dark clicks on all four detectors.
/// RNG draws per call: outcome, efficiency trial, four dark-count trials.
DetectionResult bsm_measure_photon(const JointPhotonState& state, const DetectorArray& detectors,
                                   double wavelength_nm, Rng& rng);

/// Dark clicks only, for slots where no photon reaches the BSM. Four RNG draws.
DetectionResult bsm_dark_only(const DetectorArray& detectors, Rng& rng);

/// Relative slack on threshold comparisons so that powers which are equal in
/// exact arithmetic but differ by rounding in the last bits compare equal.
inline constexpr double kThresholdSlack = 1e-12;

/// Blinded detectors: detector k clicks iff P·p_k ≥ P_th,k(λ), where p_k is the
/// Bell probability of pulse polarization ⊗ Bob's spatial state. Deterministic.
ClickPattern bsm_respond_bright(const BrightPulse& pulse, const SpatialQubit& bob_spatial,
                                const DetectorArray& detectors);

}  // namespace ddiqkd
