#pragma once

// Single-photon state algebra for DDI-QKD: BB84 encodings in polarization
// (Alice) and a spatial mode pair (Bob), and the four-outcome Bell projection
// performed by the measurement device.

#include <array>
#include <complex>
#include <cstdint>
#include <string_view>

namespace ddiqkd {

using Complex = std::complex<double>;

inline constexpr double kNormTolerance = 1e-12;

enum class Basis : std::uint8_t { Z = 0, X = 1 };

enum class BitValue : std::uint8_t { Zero = 0, One = 1 };

inline constexpr BitValue to_bit(bool b) noexcept { return b ? BitValue::One : BitValue::Zero; }
inline constexpr bool to_bool(BitValue b) noexcept { return b == BitValue::One; }
inline constexpr BitValue operator^(BitValue a, BitValue b) noexcept {
    return to_bit(to_bool(a) != to_bool(b));
}

/// Indexing order of every 4-vector keyed by outcome (probabilities, detectors, clicks).
enum class BellOutcome : std::uint8_t { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };

inline constexpr std::array<BellOutcome, 4> kAllOutcomes{
    BellOutcome::PhiPlus, BellOutcome::PhiMinus, BellOutcome::PsiPlus, BellOutcome::PsiMinus};

inline constexpr std::size_t index_of(BellOutcome o) noexcept { return static_cast<std::size_t>(o); }

std::string_view to_string(Basis b) noexcept;
std::string_view to_string(BellOutcome o) noexcept;
/// Accepts the names produced by to_string; throws ValidationError otherwise.
Basis parse_basis(std::string_view s);
BellOutcome parse_outcome(std::string_view s);

struct PolarizationQubit {
    Complex amp_h{1.0};
    Complex amp_v{0.0};

    double norm_squared() const noexcept { return std::norm(amp_h) + std::norm(amp_v); }
};

struct SpatialQubit {
    Complex amp_a{1.0};
    Complex amp_b{0.0};

    double norm_squared() const noexcept { return std::norm(amp_a) + std::norm(amp_b); }
};

/// Amplitudes ordered (H·a, H·b, V·a, V·b).
struct JointPhotonState {
    std::array<Complex, 4> amplitudes{Complex{1.0}, Complex{}, Complex{}, Complex{}};

    double norm_squared() const noexcept;
};

using BellProbabilities = std::array<double, 4>;

PolarizationQubit prepare_polarization(Basis basis, BitValue bit) noexcept;
SpatialQubit prepare_spatial(Basis basis, BitValue bit) noexcept;

/// Throws ValidationError if either factor is off unit norm by more than kNormTolerance.
JointPhotonState tensor(const PolarizationQubit& pol, const SpatialQubit& spa);

/// |<Bell_k|state>|^2 with Φ± = (H·a ± V·b)/√2 and Ψ± = (H·b ± V·a)/√2.
BellProbabilities bell_probabilities(const JointPhotonState& state) noexcept;

/// Amplitudes of the Bell state itself, in JointPhotonState order.
JointPhotonState bell_state(BellOutcome outcome) noexcept;

/// alice_bit ⊕ bob_bit implied by an outcome when both parties used `basis`.
/// Z: Φ → 0, Ψ → 1. X: "+" → 0, "−" → 1.
BitValue xor_from_outcome(BellOutcome outcome, Basis basis) noexcept;

/// The partner's bit given one's own bit, the announced outcome and the shared basis.
BitValue infer_bit(BellOutcome outcome, Basis basis, BitValue known_bit) noexcept;

}  // namespace ddiqkd
