// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ddiqkd/config.hpp"
#include "ddiqkd/error.hpp"
#include "ddiqkd/protocol.hpp"
#include "ddiqkd/sweep.hpp"

using namespace ddiqkd;

namespace {

constexpr double kAlpha = 0.01;
constexpr std::array<Basis, 2> kBases{Basis::Z, Basis::X};
constexpr std::array<BitValue, 2> kBits{BitValue::Zero, BitValue::One};

double three_sigma(double p, double n) { return 3.0 * std::sqrt(p * (1.0 - p) / n); }

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %-40s %6.2fs  %s\n", out.pass ? "PASS" : "FAIL", id, name, secs, out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

SessionConfig honest_config(double t, double eta, std::uint64_t n, std::uint64_t seed) {
    SessionConfig c;
    c.n_slots = n;
    c.seed = seed;
    c.channel.transmittance = t;
    c.detectors = uniform_detectors(eta);
    c.eta_expected = eta;
    c.alpha = kAlpha;
    return c;
}

SessionConfig covert_config(std::uint64_t n, std::uint64_t seed) {
    SessionConfig c = honest_config(0.1, 0.2, n, seed);
    c.mode = Mode::Covert;
    c.covert.eta_true = 0.9;
    c.covert.keyed = true;
    c.covert.key_seed = splitmix64(seed);
    return c;
}

DetectorArray tailored_detectors() {
    // Symmetric at 1550 nm; low thresholds on Φ+ and Ψ− at 1310 nm.
    DetectorArray d = uniform_detectors(0.2);
    const double th[4] = {0.9, 1.3, 1.3, 0.9};
    for (int k = 0; k < 4; ++k) {
        d[k].blind_threshold = WavelengthTable(std::map<double, double>{{1310.0, th[k]}, {1550.0, 1.0}});
    }
    return d;
}

// Independent model of the parity-constrained reporter: Bernoulli(p)
// detections, uniform bits, report when the gap parity matches the last
// reported bit (even for 1, odd for 0). Shares no code with FredState.
double oracle_report_rate(double p, std::uint64_t slots, std::uint64_t seed) {
    Rng rng(seed);
    std::uint64_t reports = 0;
    std::int64_t last = -1;
    int pending = -1;
    for (std::uint64_t s = 0; s < slots; ++s) {
        if (!rng.bernoulli(p)) continue;
        const int bit = rng.bernoulli(0.5) ? 1 : 0;
        const bool ok = last < 0 || ((static_cast<std::int64_t>(s) - last) % 2 == 0) == (pending == 1);
        if (ok) {
            ++reports;
            last = static_cast<std::int64_t>(s);
            pending = bit;
        }
    }
    return static_cast<double>(reports) / static_cast<double>(slots);
}

// Report rate of FredState itself over a Bernoulli(p) detection stream.
double fred_report_rate(double p, double q, std::uint64_t slots, std::uint64_t seed) {
    FredState fred(FredParams{q}, ParityKeyStream::keyed(seed ^ 0xABCDEF));
    Rng rng(seed);
    std::uint64_t reports = 0;
    for (std::uint64_t s = 0; s < slots; ++s) {
        std::optional<FredCandidate> cand;
        if (rng.bernoulli(p)) cand = FredCandidate{BellOutcome::PhiPlus, to_bit(rng.bernoulli(0.5))};
        if (fred.step(s, cand, rng)) ++reports;
    }
    return static_cast<double>(reports) / static_cast<double>(slots);
}

std::string session_bytes(const SessionConfig& c) {
    const SessionResult r = run_session(c);
    std::ostringstream out;
    write_transcript_csv(out, r.transcript, c);
    out << report_to_json(r.report, c).dump(2);
    return out.str();
}

}  // namespace

int main() {
    criterion(1, "Bell statistics", [] {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        const DetectorArray ideal = uniform_detectors(1.0);
        constexpr int n = 100000;
        Rng rng(2024);
        for (Basis ab : kBases)
            for (BitValue av : kBits)
                for (Basis bb : kBases)
                    for (BitValue bv : kBits) {
                        const JointPhotonState state = tensor(prepare_polarization(ab, av), prepare_spatial(bb, bv));
                        const BellProbabilities exact = bell_probabilities(state);
                        std::array<int, 4> counts{};
                        for (int i = 0; i < n; ++i) {
                            const auto r = bsm_measure_photon(state, ideal, kDefaultWavelengthNm, rng);
                            if (!r.is_single()) {
                                o.require(false, "ideal BSM produced a non-single result");
                                return o;
                            }
                            ++counts[index_of(*r.single())];
                        }
                        for (int k = 0; k < 4; ++k) {
                            const double freq = counts[k] / double(n);
                            if (ab == bb) {
                                if (exact[k] == 0.0) {
                                    o.require(counts[k] == 0, "analytic zero outcome observed");
                                } else {
                                    o.require(std::abs(exact[k] - 0.5) < 1e-12, "same-basis nonzero prob != 0.5");
                                    o.require(std::abs(freq - 0.5) < three_sigma(0.5, n), "same-basis freq off 0.5");
                                }
                            } else {
                                o.require(std::abs(exact[k] - 0.25) < 1e-12, "cross-basis prob != 0.25");
                                o.require(std::abs(freq - 0.25) < three_sigma(0.25, n), "cross-basis freq off 0.25");
                            }
                        }
                        if (ab == bb) {
                            int zeros = 0;
                            for (double p : exact) zeros += p == 0.0 ? 1 : 0;
                            o.require(zeros == 2, "same-basis preparation without two exact zeros");
                        }
                    }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(secs < 5.0, fmt("runtime %.2fs >= 5s", secs));
        o.detail = o.pass ? "16 preparations x 1e5 samples" : o.detail;
        return o;
    });

    criterion(2, "Bit-logic oracle (16 cases)", [] {
        Outcome o;
        int checked = 0;
        for (Basis ab : kBases)
            for (BitValue av : kBits)
                for (Basis bb : kBases)
                    for (BitValue bv : kBits) {
                        if (ab != bb) continue;
                        const auto probs =
                            bell_probabilities(tensor(prepare_polarization(ab, av), prepare_spatial(bb, bv)));
                        for (BellOutcome out : kAllOutcomes) {
                            if (probs[index_of(out)] == 0.0) continue;
                            o.require(infer_bit(out, bb, bv) == av, "infer_bit mismatch");
                            ++checked;
                        }
                    }
        o.require(checked == 16, "expected 16 (preparation, outcome) cases, got " + std::to_string(checked));
        if (o.pass) o.detail = "16/16 nonzero-probability cases reproduce Alice's bit";
        return o;
    });

    criterion(3, "Honest baseline", [] {
        Outcome o;
        const SessionConfig c = honest_config(0.5, 0.2, 100000, 3);
        const SessionReport r = run_session(c).report;
        o.require(r.qber.has_value() && *r.qber == 0.0, "QBER not exactly 0");
        const double expected = 0.5 * 0.2;
        o.require(std::abs(r.reported_rate - expected) < three_sigma(expected, 1e5), "reported rate off T*eta");
        const double kept = r.sifted / double(r.reported);
        o.require(std::abs(kept - 0.5) < three_sigma(0.5, double(r.reported)), "sifted fraction off 0.5");
        o.detail += fmt("rate %.5f", r.reported_rate) + fmt(" sifted/reported %.4f", kept);
        return o;
    });

    criterion(4, "Covert attack correctness", [] {
        Outcome o;
        const SessionReport main = run_session(covert_config(1000000, 4)).report;
        o.require(std::abs(main.reported_rate - 0.02) < three_sigma(0.02, 1e6), "reported rate off 0.02");
        const auto runs = run_batch(seeded_copies(covert_config(100000, 0), 44, 20));
        for (const BatchEntry& e : runs) {
            o.require(e.report.has_value(), "session failed: " + e.error);
            if (!e.report) continue;
            const SessionReport& r = *e.report;
            o.require(r.qber.has_value() && *r.qber == 0.0, "QBER not exactly 0");
            o.require(r.eve_bits_recovered == r.reported - 1, "Eve did not recover exactly m-1 bits");
            o.require(r.eve_leak_fraction == double(r.reported - 1) / double(r.reported), "leak != (m-1)/m");
        }
        o.detail += fmt("rate %.5f", main.reported_rate) + ", m-1 of m exact on 21 runs";
        return o;
    });

    criterion(5, "Covert stealth calibration", [] {
        Outcome o;
        const auto runs = run_batch(seeded_copies(covert_config(100000, 0), 55, 200));
        int gap_pass = 0;
        int rate_pass = 0;
        int outcome_pass = 0;
        for (const BatchEntry& e : runs) {
            if (!e.report) continue;
            const DetectabilityReport& d = e.report->detectability;
            gap_pass += d.gap_parity_verdict == Verdict::Pass ? 1 : 0;
            rate_pass += d.rate_verdict == Verdict::Pass ? 1 : 0;
            outcome_pass += d.outcome_verdict == Verdict::Pass ? 1 : 0;
        }
        o.require(gap_pass >= 190, "gap-parity pass rate < 95%");
        o.require(rate_pass >= 190, "rate-consistency pass rate < 95%");
        o.require(outcome_pass >= 190, "outcome-uniformity pass rate < 95%");

        // Unkeyed, all Bob bits equal, about 100 reports per session.
        SessionConfig plain = covert_config(5000, 0);
        plain.covert.keyed = false;
        plain.bob_bit_one_prob = 1.0;
        const auto plain_runs = run_batch(seeded_copies(plain, 56, 200));
        int rejected = 0;
        double mean_m = 0.0;
        for (const BatchEntry& e : plain_runs) {
            if (!e.report) continue;
            rejected += e.report->detectability.gap_parity_verdict == Verdict::Reject ? 1 : 0;
            mean_m += double(e.report->reported) / 200.0;
        }
        o.require(rejected >= 198, "unkeyed degenerate stream rejected < 99%");
        o.detail += "keyed pass " + std::to_string(gap_pass) + "/" + std::to_string(rate_pass) + "/" +
                    std::to_string(outcome_pass) + " of 200; unkeyed rejected " + std::to_string(rejected) +
                    "/200" + fmt(" (mean m %.1f)", mean_m);
        return o;
    });

    criterion(6, "Rate law", [] {
        Outcome o;
        constexpr std::uint64_t slots = 10000000;
        std::uint64_t seed = 600;
        for (double p : {0.05, 0.1, 0.3, 0.9}) {
            const double formula = achievable_report_rate(p);
            const double sim = oracle_report_rate(p, slots, ++seed);
            o.require(std::abs(sim / formula - 1.0) < 0.01, fmt("achievable rate off at p=%.2f", p));
            const double target = 0.6 * formula;
            const double q = thinning_acceptance(p, target);
            const double thinned = fred_report_rate(p, q, slots, ++seed);
            o.require(std::abs(thinned / target - 1.0) < 0.01, fmt("thinned rate off target at p=%.2f", p));
            o.detail += fmt("p=%.2f ", p) + fmt("sim/formula %.4f ", sim / formula) +
                        fmt("thinned/target %.4f; ", thinned / target);
        }
        // Covert scenario of criterion 4: p = 0.09, target 0.02.
        const double q = thinning_acceptance(0.09, 0.02);
        const double r = fred_report_rate(0.09, q, slots, ++seed);
        o.require(std::abs(r / 0.02 - 1.0) < 0.01, "thinned rate off 0.02 at p=0.09");

        // Feasibility boundary against the simulated maximal rate.
        int points = 0;
        for (double t : {0.05, 0.1, 0.3, 0.7, 1.0})
            for (double eta_true : {0.3, 0.6, 0.9})
                for (double eta_exp : {0.05, 0.1, 0.2, 0.3, 0.5}) {
                    const double p = t * eta_true;
                    const double target = t * eta_exp;
                    const double formula = achievable_report_rate(p);
                    if (std::abs(formula / target - 1.0) < 0.05) continue;  // too close to call by simulation
                    const double sim = oracle_report_rate(p, 2000000, ++seed);
                    o.require((sim >= target) == attack_feasible(t, eta_true, eta_exp),
                              fmt("feasibility disagrees at T=%.2f", t));
                    ++points;
                }
        o.detail += std::to_string(points) + " feasibility points agree";
        return o;
    });

    criterion(7, "Blinding, symmetric detectors", [] {
        Outcome o;
        SessionConfig c = honest_config(0.5, 0.2, 100000, 7);
        c.mode = Mode::Blinding;
        c.detectors = uniform_detectors(0.2, 0.0, 1.0);
        c.blinding.intercept = {true, 2.2, 1550.0};
        const SessionResult res = run_session(c);
        const SessionReport& r = res.report;
        const double frac = double(r.double_clicks) / double(r.arrived);
        o.require(std::abs(frac - 0.5) < three_sigma(0.5, double(r.arrived)), "double clicks off 0.5 of arrived");
        o.require(r.reported == 0, "single clicks registered");
        o.require(r.sifted == 0, "sifted key not empty");
        o.require(r.detectability.double_click_verdict == Verdict::Reject, "double-click monitor did not fire");
        o.detail = fmt("doubles/arrived %.4f", frac) + o.detail;
        return o;
    });

    criterion(8, "Blinding, tailored thresholds", [] {
        Outcome o;
        const DetectorArray det = tailored_detectors();
        const std::vector<double> wl{1310.0, 1550.0};
        const std::vector<double> powers{1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
        const BlindingPlan plan = optimize_pulse(det, wl, powers);
        o.require(plan.same_basis_single_prob == 1.0, "same-basis single prob != 1");
        o.require(plan.same_basis_double_prob == 0.0, "same-basis double prob != 0");
        o.require(plan.cross_basis_click_prob == 0.0, "cross-basis click prob != 0");

        SessionConfig c = honest_config(1.0, 0.2, 20000, 8);
        c.mode = Mode::Blinding;
        c.detectors = det;
        c.blinding.optimize = BlindingGrid{wl, powers};
        const SessionResult res = run_session(c);
        const SessionReport& r = res.report;
        o.require(r.qber.has_value() && *r.qber == 0.0, "QBER not exactly 0");
        o.require(r.eve_leak_fraction == 1.0, "Eve key fraction != 1");
        o.require(blinding_session_stats(res.transcript).eve_key_fraction == 1.0, "blinding stats Eve fraction != 1");
        o.require(r.double_clicks == 0, "double clicks present");
        const auto& h = r.detectability.outcomes;
        o.require(h.has_value() && h->test.p_value < 1e-6, "outcome histogram p >= 1e-6");
        o.detail = fmt("plan %.0f nm", plan.wavelength_nm) + fmt(" %.2f mW", plan.peak_power_mw) +
                   (h ? fmt(", histogram p %.2e", h->test.p_value) : "") + o.detail;
        return o;
    });

    criterion(9, "Intercept-resend baseline", [] {
        Outcome o;
        SessionConfig c = honest_config(1.0, 1.0, 60000, 9);
        c.mode = Mode::InterceptResend;
        const SessionReport r = run_session(c).report;
        o.require(r.sifted >= 10000, "fewer than 1e4 sifted bits");
        o.require(r.qber.has_value() && std::abs(*r.qber - 0.25) < three_sigma(0.25, double(r.sifted)),
                  "QBER off 0.25");
        o.detail = fmt("QBER %.4f", r.qber.value_or(-1)) + " over " + std::to_string(r.sifted) + " sifted" + o.detail;
        return o;
    });

    criterion(10, "Determinism", [] {
        Outcome o;
        std::vector<SessionConfig> configs;
        configs.push_back(honest_config(0.5, 0.2, 50000, 10));
        configs.push_back(covert_config(50000, 10));
        SessionConfig blind = honest_config(1.0, 0.2, 50000, 10);
        blind.mode = Mode::Blinding;
        blind.detectors = tailored_detectors();
        blind.blinding.optimize = BlindingGrid{{1310.0, 1550.0}, {1.0, 2.0, 3.0}};
        configs.push_back(blind);
        SessionConfig ir = honest_config(1.0, 0.5, 50000, 10);
        ir.mode = Mode::InterceptResend;
        configs.push_back(ir);
        for (const SessionConfig& c : configs) {
            const std::string a = session_bytes(c);
            const std::string b = session_bytes(c);
            o.require(a == b, std::string("outputs differ in mode ") + std::string(to_string(c.mode)));
        }
        if (o.pass) o.detail = "byte-identical transcript+report for honest, covert, blinding, intercept_resend";
        return o;
    });

    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
    return failures == 0 ? 0 : 1;
}
