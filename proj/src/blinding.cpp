#include "ddiqkd/blinding.hpp"

#include <cstddef>
#include <optional>
#include <string>

#include "ddiqkd/error.hpp"

namespace ddiqkd {

namespace {

constexpr std::array<Basis, 2> kBases{Basis::Z, Basis::X};
constexpr std::array<BitValue, 2> kBits{BitValue::Zero, BitValue::One};

NoViablePlan no_viable_plan(std::size_t points) {
    return NoViablePlan("no viable blinding plan: none of the " + std::to_string(points) +
                        " grid points gives same-basis clicks without cross-basis clicks");
}

void check_grids(std::span<const double> wavelength_grid, std::span<const double> power_grid) {
    if (wavelength_grid.empty() || power_grid.empty()) throw ValidationError("blinding grids must be non-empty");
    for (double p : power_grid) {
        if (!(p > 0.0)) throw ValidationError("pulse powers must be > 0", "blinding.optimize.power_grid");
    }
}

}  // namespace

BlindingPlan evaluate_pulse(const DetectorArray& detectors, double wavelength_nm, double peak_power_mw) {
    int same_single = 0;
    int same_double = 0;
    int cross_click = 0;
    for (Basis eve_basis : kBases) {
        for (BitValue eve_bit : kBits) {
            const BrightPulse pulse{peak_power_mw, wavelength_nm, prepare_polarization(eve_basis, eve_bit)};
            for (Basis bob_basis : kBases) {
                for (BitValue bob_bit : kBits) {
                    const DetectionResult r =
                        classify(bsm_respond_bright(pulse, prepare_spatial(bob_basis, bob_bit), detectors));
                    if (eve_basis == bob_basis) {
                        same_single += r.is_single() ? 1 : 0;
                        same_double += r.is_double() ? 1 : 0;
                    } else if (r.kind != DetectionResult::Kind::NoClick) {
                        ++cross_click;
                    }
                }
            }
        }
    }
    return {wavelength_nm, peak_power_mw, same_single / 8.0, same_double / 8.0, cross_click / 8.0};
}

bool plan_viable(const BlindingPlan& plan) noexcept {
    return plan.cross_basis_click_prob == 0.0 && plan.same_basis_single_prob + plan.same_basis_double_prob > 0.0;
}

bool plan_better(const BlindingPlan& candidate, const BlindingPlan& incumbent) noexcept {
    if (plan_viable(candidate) != plan_viable(incumbent)) return plan_viable(candidate);
    if (candidate.same_basis_single_prob != incumbent.same_basis_single_prob) {
        return candidate.same_basis_single_prob > incumbent.same_basis_single_prob;
    }
    if (candidate.same_basis_double_prob != incumbent.same_basis_double_prob) {
        return candidate.same_basis_double_prob < incumbent.same_basis_double_prob;
    }
    return candidate.peak_power_mw < incumbent.peak_power_mw;
}

BlindingPlan optimize_pulse_serial(const DetectorArray& detectors, std::span<const double> wavelength_grid,
                                   std::span<const double> power_grid) {
    check_grids(wavelength_grid, power_grid);
    std::optional<BlindingPlan> best;
    for (double wl : wavelength_grid) {
        for (double power : power_grid) {
            const BlindingPlan plan = evaluate_pulse(detectors, wl, power);
            if (plan_viable(plan) && (!best || plan_better(plan, *best))) best = plan;
        }
    }
    if (!best) throw no_viable_plan(wavelength_grid.size() * power_grid.size());
    return *best;
}

BlindingPlan optimize_pulse(const DetectorArray& detectors, std::span<const double> wavelength_grid,
                            std::span<const double> power_grid) {
    check_grids(wavelength_grid, power_grid);
    const std::size_t n_power = power_grid.size();
    const std::ptrdiff_t n_points = static_cast<std::ptrdiff_t>(wavelength_grid.size() * n_power);
    std::vector<BlindingPlan> plans(static_cast<std::size_t>(n_points));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n_points; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        plans[idx] = evaluate_pulse(detectors, wavelength_grid[idx / n_power], power_grid[idx % n_power]);
    }
    // Reduce in grid order so ties resolve exactly as in the serial search.
    std::optional<BlindingPlan> best;
    for (const BlindingPlan& plan : plans) {
        if (plan_viable(plan) && (!best || plan_better(plan, *best))) best = plan;
    }
    if (!best) throw no_viable_plan(plans.size());
    return *best;
}

BlindingRound blinding_round(const PolarizationQubit& alice_pol, const SpatialQubit& bob_spatial,
                             const EveInterceptConfig& cfg, const DetectorArray& detectors, Rng& rng) {
    const InterceptResult intercepted = intercept_resend(alice_pol, cfg, rng);
    return {classify(bsm_respond_bright(intercepted.pulse, bob_spatial, detectors)), intercepted.measured};
}

}  // namespace ddiqkd
