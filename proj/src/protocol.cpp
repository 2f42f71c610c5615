#include "ddiqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "ddiqkd/error.hpp"

namespace ddiqkd {

std::string_view to_string(Mode m) noexcept {
    switch (m) {
        case Mode::Honest: return "honest";
        case Mode::Covert: return "covert";
        case Mode::Blinding: return "blinding";
        case Mode::InterceptResend: return "intercept_resend";
    }
    return "?";
}

Mode parse_mode(std::string_view s) {
    for (Mode m : {Mode::Honest, Mode::Covert, Mode::Blinding, Mode::InterceptResend}) {
        if (to_string(m) == s) return m;
    }
    throw ValidationError("unknown mode '" + std::string(s) + "'", "mode");
}

namespace {

void check_prob(double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("must lie in [0, 1]", field);
}

}  // namespace

void validate(const SessionConfig& config) {
    if (config.n_slots == 0) throw ValidationError("must be >= 1", "n_slots");
    check_prob(config.channel.transmittance, "channel.transmittance");
    validate(config.detectors);
    check_prob(config.eta_expected, "eta_expected");
    check_prob(config.basis_choice_prob, "basis_choice_prob");
    check_prob(config.bob_bit_one_prob, "bob_bit_one_prob");
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ValidationError("must lie in (0, 1)", "alpha");
    if (!(config.wavelength_nm > 0.0)) throw ValidationError("must be > 0", "wavelength_nm");
    if (config.mode == Mode::Covert) {
        check_prob(config.covert.eta_true, "covert.eta_true");
        check_prob(config.covert.trojan.readout_success_prob, "covert.trojan.readout_success_prob");
        if (!config.covert.trojan.enabled) {
            throw ValidationError("covert mode needs the Trojan readout to learn Bob's bits", "covert.trojan.enabled");
        }
    }
    if (config.mode == Mode::Blinding) {
        const auto& b = config.blinding;
        if (b.intercept.enabled && !b.optimize && !(b.intercept.pulse_power_mw > 0.0)) {
            throw ValidationError("must be > 0", "blinding.pulse_power_mw");
        }
        if (!(b.intercept.wavelength_nm > 0.0)) throw ValidationError("must be > 0", "blinding.wavelength_nm");
        if (b.optimize && (b.optimize->wavelength_grid.empty() || b.optimize->power_grid.empty())) {
            throw ValidationError("grids must be non-empty", "blinding.optimize");
        }
    }
}

PublicView Transcript::public_view() const {
    PublicView view;
    view.n_slots = records.size();
    for (const SlotRecord& r : records) {
        if (r.reported) {
            view.reported_slots.push_back(r.slot);
            view.outcomes.push_back(*r.reported);
            view.bob_bases.push_back(r.bob.basis);
        }
        view.double_clicks += r.double_click ? 1 : 0;
    }
    return view;
}

namespace {

struct Prepared {
    EncoderSetting alice;
    EncoderSetting bob;
};

// Fixed draw order per slot: Alice basis, Alice bit, Bob basis, Bob bit.
Prepared draw_settings(const SessionConfig& config, Rng& rng) {
    Prepared p;
    p.alice.basis = rng.bernoulli(config.basis_choice_prob) ? Basis::Z : Basis::X;
    p.alice.bit = to_bit(rng.bernoulli(0.5));
    p.bob.basis = rng.bernoulli(config.basis_choice_prob) ? Basis::Z : Basis::X;
    p.bob.bit = to_bit(rng.bernoulli(config.bob_bit_one_prob));
    return p;
}

void record_detection(SlotRecord& rec, const DetectionResult& det) {
    rec.detected = det.kind != DetectionResult::Kind::NoClick;
    rec.reported = det.single();
    rec.double_click = det.is_double();
}

DetectionResult honest_bsm(const SessionConfig& config, const PolarizationQubit& pol, const SpatialQubit& spa,
                           bool arrived, const DetectorArray& detectors, Rng& rng) {
    if (!arrived) return bsm_dark_only(detectors, rng);
    return bsm_measure_photon(tensor(pol, spa), detectors, config.wavelength_nm, rng);
}

struct CovertSetup {
    DetectorArray fred_detectors;
    double thinning_prob = 1.0;
    ParityKeyStream key = ParityKeyStream::unkeyed();
};

CovertSetup prepare_covert(const SessionConfig& config) {
    const CovertConfig& c = config.covert;
    CovertSetup setup;
    setup.fred_detectors = config.detectors;
    for (DetectorSpec& d : setup.fred_detectors) d.efficiency = WavelengthTable{c.eta_true};
    setup.key = c.keyed ? ParityKeyStream::keyed(c.key_seed) : ParityKeyStream::unkeyed();
    if (c.rate_matching) {
        const double t = config.channel.transmittance;
        const double p = t * c.eta_true * c.trojan.readout_success_prob;
        const double required = t * config.eta_expected;
        if (!attack_feasible(t, c.eta_true, config.eta_expected, c.trojan.readout_success_prob)) {
            std::ostringstream msg;
            msg << "covert attack infeasible: achievable report rate 2p/(4-p) = "
                << (p > 0.0 ? achievable_report_rate(p) : 0.0) << " < required rate T*eta_expected = " << required
                << " (p = T*eta_true*readout = " << p << ")";
            throw InfeasibleScenario(msg.str());
        }
        setup.thinning_prob = required > 0.0 ? thinning_acceptance(p, required) : 1.0;
    }
    return setup;
}

}  // namespace

SessionResult run_session(const SessionConfig& config) {
    validate(config);

    SessionResult result;
    SessionReport& report = result.report;
    report.mode = config.mode;
    report.seed = config.seed;

    std::optional<CovertSetup> covert;
    std::optional<FredState> fred;
    if (config.mode == Mode::Covert) {
        covert = prepare_covert(config);
        fred.emplace(FredParams{covert->thinning_prob}, covert->key);
        report.thinning_prob = covert->thinning_prob;
    }

    EveInterceptConfig intercept = config.blinding.intercept;
    if (config.mode == Mode::Blinding && intercept.enabled && config.blinding.optimize) {
        const BlindingGrid& grid = *config.blinding.optimize;
        const BlindingPlan plan = optimize_pulse(config.detectors, grid.wavelength_grid, grid.power_grid);
        intercept.pulse_power_mw = plan.peak_power_mw;
        intercept.wavelength_nm = plan.wavelength_nm;
        report.blinding_plan = plan;
    } else if (config.mode == Mode::Blinding && intercept.enabled) {
        report.blinding_plan = evaluate_pulse(config.detectors, intercept.wavelength_nm, intercept.pulse_power_mw);
    }

    Rng rng(config.seed);
    auto& records = result.transcript.records;
    records.resize(config.n_slots);

    for (std::uint64_t slot = 0; slot < config.n_slots; ++slot) {
        SlotRecord& rec = records[slot];
        rec.slot = slot;
        const Prepared prep = draw_settings(config, rng);
        rec.alice = prep.alice;
        rec.bob = prep.bob;
        rec.arrived = transmit(config.channel.transmittance, rng);

        const PolarizationQubit alice_pol = prepare_polarization(prep.alice.basis, prep.alice.bit);
        const SpatialQubit bob_spatial = prepare_spatial(prep.bob.basis, prep.bob.bit);

        switch (config.mode) {
            case Mode::Honest:
                record_detection(rec, honest_bsm(config, alice_pol, bob_spatial, rec.arrived, config.detectors, rng));
                break;

            case Mode::Covert: {
                const DetectionResult det =
                    honest_bsm(config, alice_pol, bob_spatial, rec.arrived, covert->fred_detectors, rng);
                rec.detected = det.kind != DetectionResult::Kind::NoClick;
                std::optional<FredCandidate> candidate;
                if (const auto outcome = det.single()) {
                    if (const auto setting = trojan_readout(prep.bob, config.covert.trojan, rng)) {
                        candidate = FredCandidate{*outcome, setting->bit};
                    }
                }
                rec.reported = fred->step(slot, candidate, rng);
                break;
            }

            case Mode::Blinding:
                if (!intercept.enabled) {
                    record_detection(rec,
                                     honest_bsm(config, alice_pol, bob_spatial, rec.arrived, config.detectors, rng));
                } else if (rec.arrived) {
                    // Blinded detectors ignore single photons and dark counts.
                    const BlindingRound round = blinding_round(alice_pol, bob_spatial, intercept, config.detectors, rng);
                    rec.eve = round.eve;
                    record_detection(rec, round.detection);
                }
                break;

            case Mode::InterceptResend:
                if (rec.arrived) {
                    const EncoderSetting eve = measure_polarization(alice_pol, rng);
                    rec.eve = eve;
                    const PolarizationQubit resent = prepare_polarization(eve.basis, eve.bit);
                    record_detection(rec, bsm_measure_photon(tensor(resent, bob_spatial), config.detectors,
                                                             config.wavelength_nm, rng));
                } else {
                    record_detection(rec, bsm_dark_only(config.detectors, rng));
                }
                break;
        }
    }

    const Transcript& transcript = result.transcript;
    const std::vector<SiftedEvent> sifted = sift(transcript);
    const PublicView view = transcript.public_view();
    const double n = static_cast<double>(config.n_slots);

    report.sent = config.n_slots;
    report.arrived = static_cast<std::uint64_t>(
        std::count_if(records.begin(), records.end(), [](const SlotRecord& r) { return r.arrived; }));
    report.reported = view.reported_slots.size();
    report.sifted = sifted.size();
    report.double_clicks = view.double_clicks;
    report.qber = compute_qber(sifted);
    report.sifted_fraction = static_cast<double>(sifted.size()) / n;
    report.key_rate = report.qber ? key_rate(*report.qber, report.sifted_fraction) : 0.0;
    report.reported_rate = static_cast<double>(report.reported) / n;
    report.double_click_rate = double_click_rate(view);

    if (config.mode == Mode::Covert) {
        const CovertDecodeResult decoded = eve_decode(view.reported_slots, covert->key);
        std::vector<BitValue> bob_bits;
        bob_bits.reserve(decoded.bits.size());
        for (std::size_t i = 0; i < decoded.bits.size(); ++i) bob_bits.push_back(records[view.reported_slots[i]].bob.bit);
        const double match = leakage(decoded.bits, bob_bits);
        report.eve_bits_recovered = static_cast<std::uint64_t>(std::llround(match * static_cast<double>(bob_bits.size())));
        report.eve_leak_fraction =
            report.reported > 0 ? static_cast<double>(report.eve_bits_recovered) / static_cast<double>(report.reported)
                                : 0.0;
    } else if (config.mode == Mode::Blinding || config.mode == Mode::InterceptResend) {
        std::vector<BitValue> eve_bits;
        std::vector<BitValue> key_bits;
        for (const SiftedEvent& e : sifted) {
            if (!e.eve) continue;
            eve_bits.push_back(e.eve->bit);
            key_bits.push_back(e.alice_bit);
        }
        report.eve_bits_recovered = static_cast<std::uint64_t>(
            std::llround(leakage(eve_bits, key_bits) * static_cast<double>(eve_bits.size())));
        report.eve_leak_fraction =
            sifted.empty() ? 0.0 : static_cast<double>(report.eve_bits_recovered) / static_cast<double>(sifted.size());
    }

    MonitorParams params;
    params.alpha = config.alpha;
    params.expected_rate = config.channel.transmittance * config.eta_expected;
    std::array<double, 4> dark{};
    for (std::size_t k = 0; k < 4; ++k) dark[k] = config.detectors[k].dark_count_prob;
    params.expected_double_click_rate = honest_double_click_prob(dark, params.expected_rate);
    report.detectability = assess(view, params);
    return result;
}

std::vector<SiftedEvent> sift(const Transcript& transcript) {
    std::vector<SiftedEvent> out;
    for (const SlotRecord& r : transcript.records) {
        if (!r.reported || r.double_click || r.alice.basis != r.bob.basis) continue;
        out.push_back({r.slot, r.bob.basis, *r.reported, r.alice.bit, r.bob.bit, r.eve});
    }
    return out;
}

std::optional<double> compute_qber(std::span<const SiftedEvent> sifted) {
    if (sifted.empty()) return std::nullopt;
    std::size_t errors = 0;
    for (const SiftedEvent& e : sifted) {
        errors += infer_bit(e.outcome, e.basis, e.bob_bit) != e.alice_bit ? 1 : 0;
    }
    return static_cast<double>(errors) / static_cast<double>(sifted.size());
}

double binary_entropy(double p) noexcept {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double key_rate(double qber, double sifted_fraction) {
    if (!(qber >= 0.0 && qber <= 0.5)) throw ValidationError("qber must lie in [0, 0.5]");
    return sifted_fraction * std::max(0.0, 1.0 - 2.0 * binary_entropy(qber));
}

BlindingStats blinding_session_stats(const Transcript& transcript) {
    BlindingStats stats;
    const PublicView view = transcript.public_view();
    const std::vector<SiftedEvent> sifted = sift(transcript);
    const double n = std::max<double>(1.0, static_cast<double>(view.n_slots));
    stats.detection_rate = static_cast<double>(view.reported_slots.size()) / n;
    stats.double_click_rate = double_click_rate(view);
    stats.qber = compute_qber(sifted);
    stats.sifted = sifted.size();
    std::vector<BitValue> eve_bits;
    std::vector<BitValue> key_bits;
    for (const SiftedEvent& e : sifted) {
        // No stored measurement counts as no knowledge: use the complement.
        eve_bits.push_back(e.eve ? e.eve->bit : (e.alice_bit ^ BitValue::One));
        key_bits.push_back(e.alice_bit);
    }
    stats.eve_key_fraction = leakage(eve_bits, key_bits);
    return stats;
}

}  // namespace ddiqkd
