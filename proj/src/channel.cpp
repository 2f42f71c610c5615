#include "ddiqkd/channel.hpp"

#include <algorithm>
#include <complex>

#include "ddiqkd/error.hpp"

namespace ddiqkd {

bool transmit(double transmittance, Rng& rng) { return rng.bernoulli(transmittance); }

std::optional<EncoderSetting> trojan_readout(const EncoderSetting& bob, const TrojanProbe& probe, Rng& rng) {
    if (!probe.enabled) return std::nullopt;
    if (!rng.bernoulli(probe.readout_success_prob)) return std::nullopt;
    return bob;
}

EncoderSetting measure_polarization(const PolarizationQubit& pol, Rng& rng) {
    const Basis basis = rng.bernoulli(0.5) ? Basis::X : Basis::Z;
    const PolarizationQubit zero = prepare_polarization(basis, BitValue::Zero);
    const double p_zero = std::clamp(
        std::norm(std::conj(zero.amp_h) * pol.amp_h + std::conj(zero.amp_v) * pol.amp_v), 0.0, 1.0);
    const BitValue bit = rng.bernoulli(p_zero) ? BitValue::Zero : BitValue::One;
    return {basis, bit};
}

InterceptResult intercept_resend(const PolarizationQubit& alice_pol, const EveInterceptConfig& cfg, Rng& rng) {
    if (!cfg.enabled) throw UsageError("intercept_resend called with interception disabled");
    const EncoderSetting measured = measure_polarization(alice_pol, rng);
    return {measured, BrightPulse{cfg.pulse_power_mw, cfg.wavelength_nm,
                                  prepare_polarization(measured.basis, measured.bit)}};
}

}  // namespace ddiqkd
