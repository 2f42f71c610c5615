#pragma once

// Gap-parity covert channel run by a malicious BSM ("Fred").
//
// Fred sees every detection of his high-efficiency detectors but reports only
// some of them. After reporting an event whose Bob bit is b, he picks the next
// report so that the slot gap k has the parity required by b: with key bit 0,
// b = 1 needs an even gap and b = 0 an odd one; key bit 1 swaps the two.
// Eve reads the gaps off Bob's public list of detected slots.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ddiqkd/quantum.hpp"
#include "ddiqkd/rng.hpp"

namespace ddiqkd {

enum class Parity : std::uint8_t { Even, Odd };

inline constexpr Parity parity_of(std::uint64_t gap) noexcept { return gap % 2 == 0 ? Parity::Even : Parity::Odd; }

/// Pre-shared key bits, one per reported event. Bit i is the top bit of
/// splitmix64(seed + i·0x9E3779B97F4A7C15), so both ends can index it directly.
/// An unkeyed stream yields 0 everywhere.
class ParityKeyStream {
public:
    static ParityKeyStream keyed(std::uint64_t seed) noexcept { return ParityKeyStream{seed, true}; }
    static ParityKeyStream unkeyed() noexcept { return ParityKeyStream{0, false}; }

    BitValue bit_at(std::uint64_t index) const noexcept;
    /// Sequential draw; advances position().
    BitValue next() noexcept { return bit_at(position_++); }

    std::uint64_t seed() const noexcept { return seed_; }
    bool is_keyed() const noexcept { return keyed_; }
    std::uint64_t position() const noexcept { return position_; }

private:
    ParityKeyStream(std::uint64_t seed, bool keyed) noexcept : seed_(seed), keyed_(keyed) {}

    std::uint64_t seed_;
    bool keyed_;
    std::uint64_t position_ = 0;
};

Parity required_parity(BitValue bit, BitValue key_bit) noexcept;

/// Long-run reports per slot with no thinning, for detection probability p and
/// uniform required parity: 2p/(4−p). Throws ValidationError unless 0 < p ≤ 1.
double achievable_report_rate(double p);

/// Acceptance probability q for parity-valid detections that yields long-run
/// rate r_t: q = 4·r_t / (p·(2 + r_t)). Throws InfeasibleScenario when q > 1.
double thinning_acceptance(double p, double target_rate);

/// True iff achievable_report_rate(T·η_true·readout) ≥ T·η_expected.
bool attack_feasible(double transmittance, double eta_true, double eta_expected, double readout_success_prob = 1.0);

/// A detection Fred may report: the honest outcome and Bob's bit read by the probe.
struct FredCandidate {
    BellOutcome outcome = BellOutcome::PhiPlus;
    BitValue bob_bit = BitValue::Zero;
};

struct FredParams {
    double thinning_prob = 1.0;
};

/// Single-owner encoder state; slots must be fed in ascending order.
class FredState {
public:
    FredState(FredParams params, ParityKeyStream key);

    /// Decide whether to report the detection at `slot`. Before the first
    /// report the first candidate is always reported; afterwards a candidate is
    /// reported iff its gap has the pending parity and a thinning trial with
    /// probability q succeeds. One RNG draw per parity-valid candidate when q < 1.
    std::optional<BellOutcome> step(std::uint64_t slot, const std::optional<FredCandidate>& candidate, Rng& rng);

    std::optional<std::uint64_t> last_reported_slot() const noexcept { return last_reported_; }
    std::optional<BitValue> pending_bit() const noexcept { return pending_bit_; }
    std::uint64_t reports() const noexcept { return reports_; }
    /// Parity the next reported gap must have, absent before the first report.
    std::optional<Parity> pending_parity() const noexcept;

private:
    FredParams params_;
    ParityKeyStream key_;
    std::optional<std::uint64_t> last_reported_;
    std::optional<BitValue> pending_bit_;
    std::uint64_t reports_ = 0;
    std::uint64_t last_slot_seen_ = 0;
    bool seen_any_ = false;
};

struct CovertDecodeResult {
    std::vector<BitValue> bits;
};

/// Bob's bits for every reported event but the last. Throws ValidationError
/// unless the slots are strictly increasing.
CovertDecodeResult eve_decode(std::span<const std::uint64_t> reported_slots, const ParityKeyStream& key);

}  // namespace ddiqkd
