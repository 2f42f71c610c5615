#include "ddiqkd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ddiqkd/error.hpp"

namespace ddiqkd {

double chi_square_sf(double statistic, int dof) {
    if (!(statistic > 0.0)) return 1.0;
    return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

std::optional<ChiSquareResult> gap_parity_uniformity(std::span<const std::uint64_t> reported_slots) {
    if (reported_slots.size() < 2) return std::nullopt;
    double even = 0.0;
    double odd = 0.0;
    for (std::size_t i = 0; i + 1 < reported_slots.size(); ++i) {
        ((reported_slots[i + 1] - reported_slots[i]) % 2 == 0 ? even : odd) += 1.0;
    }
    const double expected = (even + odd) / 2.0;
    const double chi = ((even - expected) * (even - expected) + (odd - expected) * (odd - expected)) / expected;
    return ChiSquareResult{chi, chi_square_sf(chi, 1), 1};
}

double rate_consistency(std::uint64_t observed_reports, std::uint64_t n_slots, double expected_rate) {
    const double n = static_cast<double>(n_slots);
    const double mean = n * expected_rate;
    const double var = n * expected_rate * (1.0 - expected_rate);
    const double diff = static_cast<double>(observed_reports) - mean;
    if (var <= 0.0) {
        if (diff == 0.0) return 0.0;
        return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return diff / std::sqrt(var);
}

std::optional<OutcomeHistogram> outcome_histogram(std::span<const BellOutcome> outcomes) {
    if (outcomes.empty()) return std::nullopt;
    OutcomeHistogram h;
    for (BellOutcome o : outcomes) ++h.counts[index_of(o)];
    const double n = static_cast<double>(outcomes.size());
    const double expected = n / 4.0;
    double chi = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        h.frequencies[k] = static_cast<double>(h.counts[k]) / n;
        const double d = static_cast<double>(h.counts[k]) - expected;
        chi += d * d / expected;
    }
    h.test = {chi, chi_square_sf(chi, 3), 3};
    return h;
}

double leakage(std::span<const BitValue> eve_bits, std::span<const BitValue> bob_bits) {
    if (eve_bits.size() != bob_bits.size()) throw ValidationError("leakage: sequences differ in length");
    if (eve_bits.empty()) return 0.0;
    std::size_t matches = 0;
    for (std::size_t i = 0; i < eve_bits.size(); ++i) matches += eve_bits[i] == bob_bits[i] ? 1 : 0;
    return static_cast<double>(matches) / static_cast<double>(eve_bits.size());
}

double double_click_rate(const PublicView& view) noexcept {
    if (view.n_slots == 0) return 0.0;
    return static_cast<double>(view.double_clicks) / static_cast<double>(view.n_slots);
}

namespace {

// Asymptotic Kolmogorov survival function with the Stephens small-sample correction.
double kolmogorov_sf(double d, double n) {
    const double root = std::sqrt(n);
    const double lambda = (root + 0.12 + 0.11 / root) * d;
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

std::optional<KsResult> gap_geometric_ks(std::span<const std::uint64_t> reported_slots) {
    if (reported_slots.size() < 3) return std::nullopt;
    std::map<std::uint64_t, std::uint64_t> gap_counts;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < reported_slots.size(); ++i) {
        const std::uint64_t g = reported_slots[i + 1] - reported_slots[i];
        ++gap_counts[g];
        total += static_cast<double>(g);
    }
    const double n = static_cast<double>(reported_slots.size() - 1);
    const double p_hat = std::min(1.0, n / total);
    // Both CDFs are step functions on the integers, so integer points suffice.
    const std::uint64_t max_gap = gap_counts.rbegin()->first;
    double cum = 0.0;
    double survival = 1.0;
    double d = 0.0;
    auto it = gap_counts.begin();
    for (std::uint64_t k = 1; k <= max_gap; ++k) {
        if (it != gap_counts.end() && it->first == k) {
            cum += static_cast<double>(it->second) / n;
            ++it;
        }
        survival *= 1.0 - p_hat;
        d = std::max(d, std::abs(cum - (1.0 - survival)));
    }
    return KsResult{d, kolmogorov_sf(d, n)};
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Reject: return "reject";
        case Verdict::Absent: return "absent";
    }
    return "?";
}

bool DetectabilityReport::all_pass() const noexcept {
    for (Verdict v : {gap_parity_verdict, rate_verdict, outcome_verdict, double_click_verdict}) {
        if (v == Verdict::Reject) return false;
    }
    return true;
}

DetectabilityReport assess(const PublicView& view, const MonitorParams& params) {
    if (!(params.alpha > 0.0 && params.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)", "alpha");
    DetectabilityReport r;
    r.params = params;

    r.gap_parity = gap_parity_uniformity(view.reported_slots);
    if (r.gap_parity) r.gap_parity_verdict = r.gap_parity->p_value < params.alpha ? Verdict::Reject : Verdict::Pass;

    const boost::math::normal standard;
    r.rate_z_score = rate_consistency(view.reported_slots.size(), view.n_slots, params.expected_rate);
    const double z_two_sided = boost::math::quantile(boost::math::complement(standard, params.alpha / 2.0));
    r.rate_verdict = std::abs(r.rate_z_score) > z_two_sided ? Verdict::Reject : Verdict::Pass;

    r.outcomes = outcome_histogram(view.outcomes);
    if (r.outcomes) r.outcome_verdict = r.outcomes->test.p_value < params.alpha ? Verdict::Reject : Verdict::Pass;

    r.double_click_rate = double_click_rate(view);
    if (params.expected_double_click_rate <= 0.0) {
        r.double_click_verdict = view.double_clicks > 0 ? Verdict::Reject : Verdict::Pass;
    } else {
        const double z = rate_consistency(view.double_clicks, view.n_slots, params.expected_double_click_rate);
        const double z_one_sided = boost::math::quantile(boost::math::complement(standard, params.alpha));
        r.double_click_verdict = z > z_one_sided ? Verdict::Reject : Verdict::Pass;
    }

    r.gap_ks = gap_geometric_ks(view.reported_slots);
    return r;
}

double honest_double_click_prob(std::span<const double> dark_probs, double click_prob) {
    // P(at least two clicks) where the photon clicks one detector with
    // probability click_prob (spread uniformly) and each detector dark-clicks independently.
    const std::size_t n = dark_probs.size();
    double total = 0.0;
    for (std::size_t photon_at = 0; photon_at <= n; ++photon_at) {
        // photon_at == n means the photon made no click.
        const double weight = photon_at == n ? 1.0 - click_prob : click_prob / static_cast<double>(n);
        if (weight <= 0.0) continue;
        // Distribution of the number of clicks, truncated at 2.
        std::array<double, 3> dist{1.0, 0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            const double p = k == photon_at ? 1.0 : dark_probs[k];
            std::array<double, 3> next{};
            next[0] = dist[0] * (1.0 - p);
            next[1] = dist[1] * (1.0 - p) + dist[0] * p;
            next[2] = dist[2] + dist[1] * p;
            dist = next;
        }
        total += weight * dist[2];
    }
    return total;
}

}  // namespace ddiqkd
