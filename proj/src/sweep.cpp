#include "ddiqkd/sweep.hpp"

#include <cmath>
#include <cstddef>
#include <ostream>

#include "ddiqkd/config.hpp"
#include "ddiqkd/error.hpp"

namespace ddiqkd {

using nlohmann::json;

namespace {

BatchEntry run_one(const SessionConfig& config) {
    BatchEntry entry;
    try {
        entry.report = run_session(config).report;
    } catch (const InfeasibleScenario& e) {
        entry.error = e.what();
    }
    return entry;
}

json::json_pointer pointer_for(const std::string& dotted) {
    std::string ptr;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        const std::size_t dot = dotted.find('.', start);
        ptr += '/';
        ptr += dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return json::json_pointer(ptr);
}

}  // namespace

std::vector<BatchEntry> run_batch_serial(std::span<const SessionConfig> configs) {
    std::vector<BatchEntry> out;
    out.reserve(configs.size());
    for (const SessionConfig& c : configs) out.push_back(run_one(c));
    return out;
}

std::vector<BatchEntry> run_batch(std::span<const SessionConfig> configs) {
    std::vector<BatchEntry> out(configs.size());
    const auto n = static_cast<std::ptrdiff_t>(configs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = run_one(configs[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::vector<SessionConfig> seeded_copies(const SessionConfig& base, std::uint64_t master_seed, std::size_t count) {
    std::vector<SessionConfig> out(count, base);
    for (std::size_t i = 0; i < count; ++i) out[i].seed = derive_seed(master_seed, i);
    return out;
}

std::size_t SweepGrid::size() const noexcept {
    if (axes.empty()) return 0;
    std::size_t n = 1;
    for (const GridAxis& a : axes) n *= a.values.size();
    return n;
}

SweepGrid parse_grid(const json& doc) {
    if (!doc.is_object() || !doc.contains("parameters") || !doc["parameters"].is_object()) {
        throw ValidationError("grid must be an object with a \"parameters\" object", "parameters");
    }
    for (const auto& [key, value] : doc.items()) {
        if (key != "parameters") throw ValidationError("unknown field", key);
    }
    SweepGrid grid;
    for (const auto& [path, values] : doc["parameters"].items()) {
        if (!values.is_array() || values.empty()) {
            throw ValidationError("must be a non-empty array", "parameters." + path);
        }
        grid.axes.push_back({path, std::vector<json>(values.begin(), values.end())});
    }
    if (grid.axes.empty()) throw ValidationError("grid has no parameters", "parameters");
    return grid;
}

SweepPlan plan_sweep(const json& base_config, const SweepGrid& grid, std::size_t n_seeds, std::uint64_t master_seed) {
    if (grid.size() == 0) throw ValidationError("grid has no points", "parameters");
    if (n_seeds == 0) throw ValidationError("need at least one seed per point", "seeds");
    SweepPlan plan;
    const std::size_t points = grid.size();
    for (std::size_t p = 0; p < points; ++p) {
        json doc = base_config.is_null() ? json::object() : base_config;
        std::vector<json> values;
        std::size_t rem = p;
        values.resize(grid.axes.size());
        for (std::size_t a = grid.axes.size(); a-- > 0;) {
            const GridAxis& axis = grid.axes[a];
            values[a] = axis.values[rem % axis.values.size()];
            rem /= axis.values.size();
        }
        for (std::size_t a = 0; a < grid.axes.size(); ++a) doc[pointer_for(grid.axes[a].path)] = values[a];
        SessionConfig point_config;
        try {
            point_config = parse_config(doc);
        } catch (const ValidationError& e) {
            throw ValidationError("grid point " + std::to_string(p) + ": " + e.what(), e.field());
        }
        std::optional<bool> feasible;
        if (point_config.mode == Mode::Covert) {
            feasible = attack_feasible(point_config.channel.transmittance, point_config.covert.eta_true,
                                       point_config.eta_expected, point_config.covert.trojan.readout_success_prob);
        }
        for (std::size_t s = 0; s < n_seeds; ++s) {
            SessionConfig c = point_config;
            c.seed = derive_seed(master_seed, s);
            plan.configs.push_back(c);
            plan.rows.push_back(SweepRow{p, s, c.seed, values, feasible, {}});
        }
    }
    return plan;
}

std::vector<SweepRow> run_sweep(const json& base_config, const SweepGrid& grid, std::size_t n_seeds,
                                std::uint64_t master_seed) {
    SweepPlan plan = plan_sweep(base_config, grid, n_seeds, master_seed);
    std::vector<BatchEntry> results = run_batch(plan.configs);
    for (std::size_t i = 0; i < results.size(); ++i) plan.rows[i].result = std::move(results[i]);
    return std::move(plan.rows);
}

std::vector<SweepRow> run_sweep_serial(const json& base_config, const SweepGrid& grid, std::size_t n_seeds,
                                       std::uint64_t master_seed) {
    SweepPlan plan = plan_sweep(base_config, grid, n_seeds, master_seed);
    std::vector<BatchEntry> results = run_batch_serial(plan.configs);
    for (std::size_t i = 0; i < results.size(); ++i) plan.rows[i].result = std::move(results[i]);
    return std::move(plan.rows);
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string num(double v) { return json(v).dump(); }

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepGrid& grid, std::span<const SweepRow> rows, const json& base_config,
                     std::uint64_t master_seed) {
    std::string base_hash;
    try {
        base_hash = config_hash(parse_config(base_config.is_null() ? json::object() : base_config));
    } catch (const ValidationError&) {
        base_hash = "invalid-base";
    }
    out << "# tool=ddiqkd-sim\n# version=" << kToolVersion << "\n# config_hash=" << base_hash
        << "\n# master_seed=" << master_seed << '\n';
    out << "point_index,session_index,seed";
    for (const GridAxis& a : grid.axes) out << ',' << csv_escape(a.path);
    out << ",feasible,mode,sent,arrived,reported,sifted,double_clicks,qber,sifted_fraction,key_rate,reported_rate,"
           "double_click_rate,eve_leak_fraction,eve_bits_recovered,thinning_prob,gap_parity_p,rate_z,outcome_p,"
           "gap_parity_verdict,rate_verdict,outcome_verdict,double_click_verdict,all_pass,error\n";
    for (const SweepRow& row : rows) {
        out << row.point_index << ',' << row.session_index << ',' << row.seed;
        for (const json& v : row.values) out << ',' << csv_escape(v.dump());
        out << ',' << (row.feasible ? (*row.feasible ? "1" : "0") : "");
        if (!row.result.report) {
            out << std::string(23, ',') << csv_escape(row.result.error) << '\n';
            continue;
        }
        const SessionReport& r = *row.result.report;
        const DetectabilityReport& d = r.detectability;
        out << ',' << to_string(r.mode) << ',' << r.sent << ',' << r.arrived << ',' << r.reported << ',' << r.sifted
            << ',' << r.double_clicks << ',' << (r.qber ? num(*r.qber) : "") << ',' << num(r.sifted_fraction) << ','
            << num(r.key_rate) << ',' << num(r.reported_rate) << ',' << num(r.double_click_rate) << ','
            << num(r.eve_leak_fraction) << ',' << r.eve_bits_recovered << ','
            << (r.thinning_prob ? num(*r.thinning_prob) : "") << ','
            << (d.gap_parity ? num(d.gap_parity->p_value) : "") << ','
            << (std::isfinite(d.rate_z_score) ? num(d.rate_z_score) : (d.rate_z_score > 0 ? "inf" : "-inf")) << ','
            << (d.outcomes ? num(d.outcomes->test.p_value) : "") << ',' << to_string(d.gap_parity_verdict) << ','
            << to_string(d.rate_verdict) << ',' << to_string(d.outcome_verdict) << ','
            << to_string(d.double_click_verdict) << ',' << (d.all_pass() ? 1 : 0) << ",\n";
    }
}

}  // namespace ddiqkd
