#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ddiqkd/channel.hpp"
#include "ddiqkd/error.hpp"

using namespace ddiqkd;

namespace {

double three_sigma(double p, int n) { return 3.0 * std::sqrt(p * (1 - p) / n); }

bool same_polarization(const PolarizationQubit& a, const PolarizationQubit& b) {
    return std::abs(a.amp_h - b.amp_h) < 1e-12 && std::abs(a.amp_v - b.amp_v) < 1e-12;
}

}  // namespace

TEST_CASE("transmit") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        CHECK(transmit(1.0, rng));
        CHECK_FALSE(transmit(0.0, rng));
    }
    constexpr int n = 100000;
    int arrived = 0;
    for (int i = 0; i < n; ++i) arrived += transmit(0.5, rng) ? 1 : 0;
    CHECK(std::abs(arrived / double(n) - 0.5) < 0.0047);
}

TEST_CASE("Trojan readout returns Bob's exact setting or nothing") {
    Rng rng(2);
    const EncoderSetting bob{Basis::Z, BitValue::One};
    const auto got = trojan_readout(bob, TrojanProbe{true, 1.0}, rng);
    REQUIRE(got.has_value());
    CHECK(*got == bob);
    CHECK_FALSE(trojan_readout(bob, TrojanProbe{false, 1.0}, rng).has_value());

    constexpr int n = 100000;
    int present = 0;
    for (int i = 0; i < n; ++i) {
        const EncoderSetting s{rng.bernoulli(0.5) ? Basis::X : Basis::Z, to_bit(rng.bernoulli(0.5))};
        const auto r = trojan_readout(s, TrojanProbe{true, 0.8}, rng);
        if (r) {
            ++present;
            CHECK(*r == s);  // never fabricates a wrong setting
        }
    }
    CHECK(std::abs(present / double(n) - 0.8) < three_sigma(0.8, n));
}

TEST_CASE("intercept_resend: eigenstates are reproduced, conjugate states follow the Born rule") {
    const EveInterceptConfig cfg{true, 2.2, 1550.0};
    const auto h = prepare_polarization(Basis::Z, BitValue::Zero);
    const auto d = prepare_polarization(Basis::X, BitValue::Zero);
    Rng rng(3);

    constexpr int n = 100000;
    int z_basis = 0;
    int x_zero_given_x = 0;
    int x_count = 0;
    for (int i = 0; i < n; ++i) {
        const InterceptResult r = intercept_resend(h, cfg, rng);
        CHECK(r.pulse.peak_power_mw == 2.2);
        CHECK(r.pulse.wavelength_nm == 1550.0);
        CHECK(same_polarization(r.pulse.polarization, prepare_polarization(r.measured.basis, r.measured.bit)));
        if (r.measured.basis == Basis::Z) {
            ++z_basis;
            CHECK(r.measured.bit == BitValue::Zero);  // H in Z is an eigenstate
        } else {
            ++x_count;
            x_zero_given_x += r.measured.bit == BitValue::Zero ? 1 : 0;
        }
    }
    CHECK(std::abs(z_basis / double(n) - 0.5) < three_sigma(0.5, n));
    CHECK(std::abs(x_zero_given_x / double(x_count) - 0.5) < three_sigma(0.5, x_count));

    for (int i = 0; i < 2000; ++i) {
        const InterceptResult r = intercept_resend(d, cfg, rng);
        if (r.measured.basis == Basis::X) CHECK(r.measured.bit == BitValue::Zero);
    }
}

TEST_CASE("intercept_resend refuses a disabled config") {
    Rng rng(4);
    CHECK_THROWS_AS(intercept_resend(PolarizationQubit{}, EveInterceptConfig{false, 1.0, 1550.0}, rng), UsageError);
}
