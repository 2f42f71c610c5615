#pragma once

// The insecure channel and Eve's actions on it: loss, the Trojan-horse
// readout of Bob's encoder, and intercept-resend.

#include <optional>

#include "ddiqkd/devices.hpp"
#include "ddiqkd/quantum.hpp"
#include "ddiqkd/rng.hpp"

namespace ddiqkd {

struct ChannelSpec {
    double transmittance = 1.0;
};

/// Readout of Bob's encoder setting by an injected probe, abstracted to a
/// success probability. A successful readout is always exact.
struct TrojanProbe {
    bool enabled = true;
    double readout_success_prob = 1.0;
};

struct EveInterceptConfig {
    bool enabled = true;
    double pulse_power_mw = 2.2;
    double wavelength_nm = kDefaultWavelengthNm;
};

struct EncoderSetting {
    Basis basis = Basis::Z;
    BitValue bit = BitValue::Zero;

    friend bool operator==(const EncoderSetting&, const EncoderSetting&) = default;
};

/// What Eve learned by measuring Alice's photon, plus the pulse she resends.
struct InterceptResult {
    EncoderSetting measured;
    BrightPulse pulse;
};

/// One RNG draw.
bool transmit(double transmittance, Rng& rng);

/// Present with probability readout_success_prob when enabled. One RNG draw when enabled, none otherwise.
std::optional<EncoderSetting> trojan_readout(const EncoderSetting& bob, const TrojanProbe& probe, Rng& rng);

/// Projective measurement of Alice's polarization in a uniformly drawn basis.
/// Two RNG draws: basis, then the Born-rule outcome.
EncoderSetting measure_polarization(const PolarizationQubit& pol, Rng& rng);

/// Eve measures Alice's photon and prepares a bright pulse in the measured
/// eigenstate. Throws UsageError when cfg is disabled.
InterceptResult intercept_resend(const PolarizationQubit& alice_pol, const EveInterceptConfig& cfg, Rng& rng);

}  // namespace ddiqkd
