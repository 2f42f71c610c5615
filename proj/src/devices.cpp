#include "ddiqkd/devices.hpp"

#include <cmath>
#include <string>

#include "ddiqkd/error.hpp"

namespace ddiqkd {

double WavelengthTable::at(double wavelength_nm) const {
    if (entries_.empty()) throw ValidationError("wavelength table is empty");
    auto upper = entries_.lower_bound(wavelength_nm);
    if (upper == entries_.end()) return std::prev(upper)->second;
    if (upper == entries_.begin() || upper->first == wavelength_nm) return upper->second;
    auto lower = std::prev(upper);
    return (wavelength_nm - lower->first) <= (upper->first - wavelength_nm) ? lower->second : upper->second;
}

DetectorArray uniform_detectors(double efficiency, double dark_count_prob, double threshold_mw) {
    DetectorArray out;
    for (BellOutcome o : kAllOutcomes) {
        out[index_of(o)] = DetectorSpec{o, WavelengthTable{efficiency}, dark_count_prob, WavelengthTable{threshold_mw}};
    }
    return out;
}

void validate(const DetectorArray& detectors) {
    for (std::size_t k = 0; k < detectors.size(); ++k) {
        const DetectorSpec& d = detectors[k];
        const std::string path = "detectors[" + std::to_string(k) + "]";
        if (index_of(d.id) != k) throw ValidationError("detector id does not match its position", path + ".id");
        if (d.efficiency.empty()) throw ValidationError("must list at least one wavelength", path + ".efficiency");
        for (const auto& [wl, eta] : d.efficiency.entries()) {
            if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("must lie in [0, 1]", path + ".efficiency");
        }
        if (!(d.dark_count_prob >= 0.0 && d.dark_count_prob <= 1.0)) {
            throw ValidationError("must lie in [0, 1]", path + ".dark_count_prob");
        }
        if (d.blind_threshold.empty()) {
            throw ValidationError("must list at least one wavelength", path + ".blind_threshold");
        }
        for (const auto& [wl, p_th] : d.blind_threshold.entries()) {
            if (!(p_th > 0.0) || !std::isfinite(p_th)) throw ValidationError("must be > 0", path + ".blind_threshold");
        }
    }
}

std::optional<BellOutcome> DetectionResult::single() const noexcept {
    if (kind != Kind::Single) return std::nullopt;
    for (BellOutcome o : kAllOutcomes) {
        if (clicks[index_of(o)]) return o;
    }
    return std::nullopt;
}

DetectionResult classify(const ClickPattern& pattern) noexcept {
    int n = 0;
    for (bool c : pattern) n += c ? 1 : 0;
    const auto kind = n == 0 ? DetectionResult::Kind::NoClick
                             : (n == 1 ? DetectionResult::Kind::Single : DetectionResult::Kind::Double);
    return {kind, pattern};
}

namespace {

void add_dark_clicks(ClickPattern& clicks, const DetectorArray& detectors, Rng& rng) {
    for (std::size_t k = 0; k < 4; ++k) {
        if (rng.bernoulli(detectors[k].dark_count_prob)) clicks[k] = true;
    }
}

}  // namespace

DetectionResult bsm_measure_photon(const JointPhotonState& state, const DetectorArray& detectors,
                                   double wavelength_nm, Rng& rng) {
    const BellProbabilities probs = bell_probabilities(state);
    const std::size_t k = rng.categorical(probs);
    ClickPattern clicks{};
    // A photon that fails the efficiency trial is absorbed without a click.
    if (rng.bernoulli(detectors[k].efficiency.at(wavelength_nm))) clicks[k] = true;
    add_dark_clicks(clicks, detectors, rng);
    return classify(clicks);
}

DetectionResult bsm_dark_only(const DetectorArray& detectors, Rng& rng) {
    ClickPattern clicks{};
    add_dark_clicks(clicks, detectors, rng);
    return classify(clicks);
}

ClickPattern bsm_respond_bright(const BrightPulse& pulse, const SpatialQubit& bob_spatial,
                                const DetectorArray& detectors) {
    const BellProbabilities split = bell_probabilities(tensor(pulse.polarization, bob_spatial));
    ClickPattern clicks{};
    for (std::size_t k = 0; k < 4; ++k) {
        const double power = pulse.peak_power_mw * split[k];
        const double threshold = detectors[k].blind_threshold.at(pulse.wavelength_nm);
        clicks[k] = power >= threshold * (1.0 - kThresholdSlack);
    }
    return clicks;
}

}  // namespace ddiqkd
