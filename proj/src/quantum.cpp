#include "ddiqkd/quantum.hpp"

#include <cmath>
#include <string>

#include "ddiqkd/error.hpp"

namespace ddiqkd {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Shared BB84 amplitude map: Z0 → (1,0), Z1 → (0,1), X0 → (1,1)/√2, X1 → (1,−1)/√2.
std::array<Complex, 2> bb84_amplitudes(Basis basis, BitValue bit) noexcept {
    if (basis == Basis::Z) {
        return bit == BitValue::Zero ? std::array<Complex, 2>{1.0, 0.0} : std::array<Complex, 2>{0.0, 1.0};
    }
    return bit == BitValue::Zero ? std::array<Complex, 2>{kInvSqrt2, kInvSqrt2}
                                 : std::array<Complex, 2>{kInvSqrt2, -kInvSqrt2};
}

}  // namespace

std::string_view to_string(Basis b) noexcept { return b == Basis::Z ? "Z" : "X"; }

std::string_view to_string(BellOutcome o) noexcept {
    switch (o) {
        case BellOutcome::PhiPlus: return "PhiPlus";
        case BellOutcome::PhiMinus: return "PhiMinus";
        case BellOutcome::PsiPlus: return "PsiPlus";
        case BellOutcome::PsiMinus: return "PsiMinus";
    }
    return "?";
}

Basis parse_basis(std::string_view s) {
    if (s == "Z") return Basis::Z;
    if (s == "X") return Basis::X;
    throw ValidationError("unknown basis '" + std::string(s) + "'");
}

BellOutcome parse_outcome(std::string_view s) {
    for (BellOutcome o : kAllOutcomes) {
        if (to_string(o) == s) return o;
    }
    throw ValidationError("unknown Bell outcome '" + std::string(s) + "'");
}

double JointPhotonState::norm_squared() const noexcept {
    double sum = 0.0;
    for (const Complex& a : amplitudes) sum += std::norm(a);
    return sum;
}

PolarizationQubit prepare_polarization(Basis basis, BitValue bit) noexcept {
    const auto amps = bb84_amplitudes(basis, bit);
    return {amps[0], amps[1]};
}

SpatialQubit prepare_spatial(Basis basis, BitValue bit) noexcept {
    const auto amps = bb84_amplitudes(basis, bit);
    return {amps[0], amps[1]};
}

JointPhotonState tensor(const PolarizationQubit& pol, const SpatialQubit& spa) {
    if (std::abs(pol.norm_squared() - 1.0) > kNormTolerance) {
        throw ValidationError("polarization qubit is not normalized");
    }
    if (std::abs(spa.norm_squared() - 1.0) > kNormTolerance) {
        throw ValidationError("spatial qubit is not normalized");
    }
    return JointPhotonState{{pol.amp_h * spa.amp_a, pol.amp_h * spa.amp_b, pol.amp_v * spa.amp_a,
                             pol.amp_v * spa.amp_b}};
}

BellProbabilities bell_probabilities(const JointPhotonState& state) noexcept {
    const auto& a = state.amplitudes;
    // Bell coefficients are real, so the overlap is a plain sum/difference.
    return {std::norm(a[0] + a[3]) / 2.0, std::norm(a[0] - a[3]) / 2.0, std::norm(a[1] + a[2]) / 2.0,
            std::norm(a[1] - a[2]) / 2.0};
}

JointPhotonState bell_state(BellOutcome outcome) noexcept {
    switch (outcome) {
        case BellOutcome::PhiPlus: return {{kInvSqrt2, 0.0, 0.0, kInvSqrt2}};
        case BellOutcome::PhiMinus: return {{kInvSqrt2, 0.0, 0.0, -kInvSqrt2}};
        case BellOutcome::PsiPlus: return {{0.0, kInvSqrt2, kInvSqrt2, 0.0}};
        case BellOutcome::PsiMinus: return {{0.0, kInvSqrt2, -kInvSqrt2, 0.0}};
    }
    return {};
}

BitValue xor_from_outcome(BellOutcome outcome, Basis basis) noexcept {
    if (basis == Basis::Z) {
        return to_bit(outcome == BellOutcome::PsiPlus || outcome == BellOutcome::PsiMinus);
    }
    return to_bit(outcome == BellOutcome::PhiMinus || outcome == BellOutcome::PsiMinus);
}

BitValue infer_bit(BellOutcome outcome, Basis basis, BitValue known_bit) noexcept {
    return known_bit ^ xor_from_outcome(outcome, basis);
}

}  // namespace ddiqkd
