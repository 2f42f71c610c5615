#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ddiqkd/devices.hpp"
#include "ddiqkd/error.hpp"

using namespace ddiqkd;

namespace {

JointPhotonState h_a() {
    return tensor(prepare_polarization(Basis::Z, BitValue::Zero), prepare_spatial(Basis::Z, BitValue::Zero));
}

SpatialQubit spatial_a() { return prepare_spatial(Basis::Z, BitValue::Zero); }
SpatialQubit spatial_plus() { return prepare_spatial(Basis::X, BitValue::Zero); }

DetectorArray tailored_thresholds() {
    DetectorArray d = uniform_detectors(0.2);
    const double th[4] = {0.9, 1.3, 1.3, 0.9};
    for (int k = 0; k < 4; ++k) d[k].blind_threshold = WavelengthTable{th[k]};
    return d;
}

double three_sigma(double p, int n) { return 3.0 * std::sqrt(p * (1 - p) / n); }

}  // namespace

TEST_CASE("classify") {
    CHECK(classify({true, false, false, false}).single() == BellOutcome::PhiPlus);
    CHECK(classify({false, false, false, false}).kind == DetectionResult::Kind::NoClick);
    const auto d = classify({true, true, false, false});
    CHECK(d.is_double());
    CHECK(d.clicks == ClickPattern{true, true, false, false});
    CHECK_FALSE(d.single().has_value());
}

TEST_CASE("wavelength tables use nearest-neighbor lookup") {
    const WavelengthTable t(std::map<double, double>{{1310.0, 0.1}, {1550.0, 0.3}});
    CHECK(t.at(1310.0) == 0.1);
    CHECK(t.at(1000.0) == 0.1);
    CHECK(t.at(1400.0) == 0.1);
    CHECK(t.at(1500.0) == 0.3);
    CHECK(t.at(1600.0) == 0.3);
    CHECK(t.at(1430.0) == 0.1);  // equidistant: shorter wavelength wins
    CHECK_THROWS_AS(WavelengthTable{}.at(1550.0), ValidationError);
}

TEST_CASE("detector validation") {
    auto d = uniform_detectors(0.2);
    CHECK_NOTHROW(validate(d));
    d[2].efficiency = WavelengthTable{1.5};
    CHECK_THROWS_AS(validate(d), ValidationError);
    d = uniform_detectors(0.2);
    d[1].blind_threshold = WavelengthTable{0.0};
    CHECK_THROWS_AS(validate(d), ValidationError);
    d = uniform_detectors(0.2);
    d[0].dark_count_prob = -0.1;
    CHECK_THROWS_AS(validate(d), ValidationError);
    d = uniform_detectors(0.2);
    d[0].id = BellOutcome::PsiMinus;
    CHECK_THROWS_AS(validate(d), ValidationError);
}

TEST_CASE("ideal BSM on H⊗a gives Φ+ and Φ− at 50% each, never Ψ") {
    const auto det = uniform_detectors(1.0);
    Rng rng(11);
    constexpr int n = 100000;
    int counts[4] = {};
    for (int i = 0; i < n; ++i) {
        const auto r = bsm_measure_photon(h_a(), det, kDefaultWavelengthNm, rng);
        REQUIRE(r.is_single());
        ++counts[index_of(*r.single())];
    }
    CHECK(std::abs(counts[0] / double(n) - 0.5) < three_sigma(0.5, n));
    CHECK(std::abs(counts[1] / double(n) - 0.5) < three_sigma(0.5, n));
    CHECK(counts[2] == 0);
    CHECK(counts[3] == 0);
}

TEST_CASE("zero efficiency never clicks") {
    const auto det = uniform_detectors(0.0);
    Rng rng(12);
    for (int i = 0; i < 10000; ++i) {
        CHECK(bsm_measure_photon(h_a(), det, kDefaultWavelengthNm, rng).kind == DetectionResult::Kind::NoClick);
    }
}

TEST_CASE("efficiency 0.2 gives click fraction 0.2 within 3 sigma") {
    const auto det = uniform_detectors(0.2);
    Rng rng(13);
    constexpr int n = 100000;
    int clicks = 0;
    for (int i = 0; i < n; ++i) {
        const auto r = bsm_measure_photon(h_a(), det, kDefaultWavelengthNm, rng);
        CHECK_FALSE(r.is_double());
        clicks += r.kind != DetectionResult::Kind::NoClick ? 1 : 0;
    }
    CHECK(std::abs(clicks / double(n) - 0.2) < 0.0038);
}

TEST_CASE("efficiency is looked up at the photon wavelength") {
    auto det = uniform_detectors(0.0);
    for (auto& d : det) d.efficiency = WavelengthTable(std::map<double, double>{{1310.0, 1.0}, {1550.0, 0.0}});
    Rng rng(14);
    CHECK(bsm_measure_photon(h_a(), det, 1310.0, rng).is_single());
    CHECK(bsm_measure_photon(h_a(), det, 1550.0, rng).kind == DetectionResult::Kind::NoClick);
}

TEST_CASE("dark counts: certain dark clicks give a four-fold double") {
    const auto det = uniform_detectors(0.0, 1.0);
    Rng rng(15);
    const auto r = bsm_dark_only(det, rng);
    CHECK(r.is_double());
    CHECK(r.clicks == ClickPattern{true, true, true, true});
}

TEST_CASE("dark-count rate per detector within 3 sigma") {
    const auto det = uniform_detectors(0.0, 0.05);
    Rng rng(16);
    constexpr int n = 100000;
    int clicks = 0;
    for (int i = 0; i < n; ++i) clicks += bsm_dark_only(det, rng).clicks[2] ? 1 : 0;
    CHECK(std::abs(clicks / double(n) - 0.05) < three_sigma(0.05, n));
}

TEST_CASE("bright pulse: threshold arithmetic on two- and four-detector splits") {
    const auto sym = uniform_detectors(0.2, 0.0, 1.0);
    const BrightPulse pulse{2.2, kDefaultWavelengthNm, prepare_polarization(Basis::Z, BitValue::Zero)};
    CHECK(bsm_respond_bright(pulse, spatial_a(), sym) == ClickPattern{true, true, false, false});
    CHECK(bsm_respond_bright(pulse, spatial_plus(), sym) == ClickPattern{false, false, false, false});

    const BrightPulse p2{2.0, kDefaultWavelengthNm, prepare_polarization(Basis::Z, BitValue::Zero)};
    CHECK(bsm_respond_bright(p2, spatial_a(), tailored_thresholds()) == ClickPattern{true, false, false, false});
}

TEST_CASE("bright pulse response is scale invariant") {
    // Property: scaling every threshold and the pulse power by one factor keeps the pattern.
    Rng rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        DetectorArray det = uniform_detectors(0.2);
        double th[4];
        for (int k = 0; k < 4; ++k) {
            th[k] = 0.2 + 2.0 * rng.uniform();
            det[k].blind_threshold = WavelengthTable{th[k]};
        }
        const double power = 0.5 + 4.0 * rng.uniform();
        const Basis eb = rng.bernoulli(0.5) ? Basis::X : Basis::Z;
        const Basis bb = rng.bernoulli(0.5) ? Basis::X : Basis::Z;
        const BrightPulse pulse{power, kDefaultWavelengthNm, prepare_polarization(eb, to_bit(rng.bernoulli(0.5)))};
        const SpatialQubit spa = prepare_spatial(bb, to_bit(rng.bernoulli(0.5)));
        const ClickPattern base = bsm_respond_bright(pulse, spa, det);

        for (double factor : {0.25, 2.0, 1024.0, 3.0, 0.1}) {
            DetectorArray scaled = det;
            for (int k = 0; k < 4; ++k) scaled[k].blind_threshold = WavelengthTable{th[k] * factor};
            BrightPulse sp = pulse;
            sp.peak_power_mw = power * factor;
            CHECK(bsm_respond_bright(sp, spa, scaled) == base);
        }
        // Deterministic: same inputs, same pattern.
        CHECK(bsm_respond_bright(pulse, spa, det) == base);
    }
}
