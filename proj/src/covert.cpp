#include "ddiqkd/covert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "ddiqkd/error.hpp"

namespace ddiqkd {

BitValue ParityKeyStream::bit_at(std::uint64_t index) const noexcept {
    if (!keyed_) return BitValue::Zero;
    return to_bit((splitmix64(seed_ + index * 0x9E3779B97F4A7C15ULL) >> 63) != 0);
}

Parity required_parity(BitValue bit, BitValue key_bit) noexcept {
    return (bit ^ key_bit) == BitValue::One ? Parity::Even : Parity::Odd;
}

double achievable_report_rate(double p) {
    if (!(p > 0.0 && p <= 1.0)) throw ValidationError("detection probability must lie in (0, 1]");
    return 2.0 * p / (4.0 - p);
}

double thinning_acceptance(double p, double target_rate) {
    if (!(p > 0.0 && p <= 1.0)) throw ValidationError("detection probability must lie in (0, 1]");
    if (!(target_rate > 0.0)) throw ValidationError("target report rate must be > 0");
    const double q = 4.0 * target_rate / (p * (2.0 + target_rate));
    // Tolerate rounding at the exact boundary r_t = 2p/(4−p).
    if (q > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "target report rate " << target_rate << " exceeds achievable rate " << achievable_report_rate(p)
            << " (thinning probability would be " << q << " > 1)";
        throw InfeasibleScenario(msg.str());
    }
    return std::min(q, 1.0);
}

bool attack_feasible(double transmittance, double eta_true, double eta_expected, double readout_success_prob) {
    const double p = transmittance * eta_true * readout_success_prob;
    if (!(p > 0.0)) return false;
    return achievable_report_rate(std::min(p, 1.0)) >= transmittance * eta_expected;
}

FredState::FredState(FredParams params, ParityKeyStream key) : params_(params), key_(key) {
    if (!(params_.thinning_prob > 0.0 && params_.thinning_prob <= 1.0)) {
        throw ValidationError("thinning probability must lie in (0, 1]");
    }
}

std::optional<Parity> FredState::pending_parity() const noexcept {
    if (!pending_bit_) return std::nullopt;
    return required_parity(*pending_bit_, key_.bit_at(reports_ - 1));
}

std::optional<BellOutcome> FredState::step(std::uint64_t slot, const std::optional<FredCandidate>& candidate,
                                           Rng& rng) {
    if (seen_any_ && slot <= last_slot_seen_) throw UsageError("FredState::step requires ascending slots");
    seen_any_ = true;
    last_slot_seen_ = slot;
    if (!candidate) return std::nullopt;

    if (last_reported_) {
        if (parity_of(slot - *last_reported_) != *pending_parity()) return std::nullopt;
        if (params_.thinning_prob < 1.0 && !rng.bernoulli(params_.thinning_prob)) return std::nullopt;
    }
    last_reported_ = slot;
    pending_bit_ = candidate->bob_bit;
    ++reports_;
    return candidate->outcome;
}

CovertDecodeResult eve_decode(std::span<const std::uint64_t> reported_slots, const ParityKeyStream& key) {
    CovertDecodeResult out;
    if (reported_slots.size() < 2) return out;
    out.bits.reserve(reported_slots.size() - 1);
    for (std::size_t i = 0; i + 1 < reported_slots.size(); ++i) {
        if (reported_slots[i + 1] <= reported_slots[i]) {
            throw ValidationError("reported slots must be strictly increasing (index " + std::to_string(i + 1) + ")");
        }
        const bool even = parity_of(reported_slots[i + 1] - reported_slots[i]) == Parity::Even;
        out.bits.push_back(to_bit(even) ^ key.bit_at(i));
    }
    return out;
}

}  // namespace ddiqkd
