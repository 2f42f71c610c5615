#include "ddiqkd/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "ddiqkd/error.hpp"

namespace ddiqkd {

using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string join(const std::string& parent, const std::string& key) { return parent.empty() ? key : parent + "." + key; }

// Field reader that names every error by its JSON path and rejects unknown keys.
class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ValidationError("must be an object", path_.empty() ? "<root>" : path_);
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    std::string path(const std::string& key) const { return join(path_, key); }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number()) throw ValidationError("must be a number", path(key));
        return v.get<double>();
    }

    double probability(const std::string& key, double fallback) {
        const double v = number(key, fallback);
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("must lie in [0, 1]", path(key));
        return v;
    }

    double positive(const std::string& key, double fallback) {
        const double v = number(key, fallback);
        if (!(v > 0.0)) throw ValidationError("must be > 0", path(key));
        return v;
    }

    std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            throw ValidationError("must be a non-negative integer", path(key));
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) throw ValidationError("must be true or false", path(key));
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_string()) throw ValidationError("must be a string", path(key));
        return v.get<std::string>();
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.count(key)) throw ValidationError("unknown field", path(key));
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

// Either a single number (applies at the default wavelength) or {"<nm>": value, ...}.
WavelengthTable read_table(const json& v, const std::string& path, bool positive_values) {
    auto check = [&](double x) {
        if (positive_values ? !(x > 0.0) : !(x >= 0.0 && x <= 1.0)) {
            throw ValidationError(positive_values ? "must be > 0" : "must lie in [0, 1]", path);
        }
        return x;
    };
    if (v.is_number()) return WavelengthTable{check(v.get<double>())};
    if (!v.is_object() || v.empty()) throw ValidationError("must be a number or a non-empty wavelength map", path);
    WavelengthTable table;
    for (const auto& [key, value] : v.items()) {
        const auto wl = parse_double(key);
        if (!wl || !(*wl > 0.0)) throw ValidationError("wavelength key '" + key + "' is not a positive number", path);
        if (!value.is_number()) throw ValidationError("must be a number", path + "." + key);
        table.set(*wl, check(value.get<double>()));
    }
    return table;
}

DetectorSpec read_detector(const json& v, const std::string& path, BellOutcome id, const DetectorSpec& fallback) {
    Reader r(v, path);
    DetectorSpec d = fallback;
    d.id = id;
    if (r.has("id")) {
        const std::string name = r.string("id", "");
        if (name != to_string(id)) throw ValidationError("expected '" + std::string(to_string(id)) + "'", r.path("id"));
    }
    if (r.has("efficiency")) d.efficiency = read_table(r.raw("efficiency"), r.path("efficiency"), false);
    d.dark_count_prob = r.probability("dark_count_prob", d.dark_count_prob);
    if (r.has("blind_threshold")) {
        d.blind_threshold = read_table(r.raw("blind_threshold"), r.path("blind_threshold"), true);
    }
    r.finish();
    return d;
}

std::vector<double> read_grid(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ValidationError("must be a non-empty array of numbers", path);
    std::vector<double> out;
    for (const json& x : v) {
        if (!x.is_number() || !(x.get<double>() > 0.0)) throw ValidationError("entries must be numbers > 0", path);
        out.push_back(x.get<double>());
    }
    return out;
}

json table_to_json(const WavelengthTable& table) {
    json out = json::object();
    for (const auto& [wl, value] : table.entries()) out[format_double(wl)] = value;
    return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

SessionConfig parse_config(const json& doc) {
    SessionConfig c;
    Reader root(doc, "");
    c.n_slots = root.u64("n_slots", c.n_slots);
    if (c.n_slots == 0) throw ValidationError("must be >= 1", "n_slots");
    c.seed = root.u64("seed", c.seed);
    c.wavelength_nm = root.positive("wavelength_nm", c.wavelength_nm);
    c.eta_expected = root.probability("eta_expected", c.eta_expected);
    c.basis_choice_prob = root.probability("basis_choice_prob", c.basis_choice_prob);
    c.bob_bit_one_prob = root.probability("bob_bit_one_prob", c.bob_bit_one_prob);
    c.alpha = root.number("alpha", c.alpha);
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ValidationError("must lie in (0, 1)", "alpha");
    c.mode = parse_mode(root.string("mode", "honest"));
    const std::string policy = root.string("double_click_policy", "discard_and_count");
    if (policy != "discard_and_count") throw ValidationError("only 'discard_and_count' is supported", "double_click_policy");

    if (root.has("channel")) {
        Reader ch(root.raw("channel"), "channel");
        c.channel.transmittance = ch.probability("transmittance", c.channel.transmittance);
        ch.finish();
    }

    if (root.has("detectors")) {
        const json& dets = root.raw("detectors");
        if (dets.is_array()) {
            if (dets.size() != 4) throw ValidationError("must list exactly four detectors", "detectors");
            for (std::size_t k = 0; k < 4; ++k) {
                c.detectors[k] = read_detector(dets[k], "detectors[" + std::to_string(k) + "]", kAllOutcomes[k],
                                               c.detectors[k]);
            }
        } else {
            // A single object configures all four detectors identically.
            for (std::size_t k = 0; k < 4; ++k) {
                c.detectors[k] = read_detector(dets, "detectors", kAllOutcomes[k], c.detectors[k]);
            }
        }
    }

    if (root.has("covert")) {
        Reader cv(root.raw("covert"), "covert");
        c.covert.eta_true = cv.probability("eta_true", c.covert.eta_true);
        c.covert.keyed = cv.boolean("keyed", c.covert.keyed);
        c.covert.key_seed = cv.u64("key_seed", c.covert.key_seed);
        c.covert.rate_matching = cv.boolean("rate_matching", c.covert.rate_matching);
        if (cv.has("trojan")) {
            Reader tj(cv.raw("trojan"), "covert.trojan");
            c.covert.trojan.enabled = tj.boolean("enabled", c.covert.trojan.enabled);
            c.covert.trojan.readout_success_prob =
                tj.probability("readout_success_prob", c.covert.trojan.readout_success_prob);
            tj.finish();
        }
        cv.finish();
    }

    if (root.has("blinding")) {
        Reader bl(root.raw("blinding"), "blinding");
        auto& ic = c.blinding.intercept;
        ic.enabled = bl.boolean("enabled", ic.enabled);
        ic.pulse_power_mw = bl.positive("pulse_power_mw", ic.pulse_power_mw);
        ic.wavelength_nm = bl.positive("wavelength_nm", ic.wavelength_nm);
        if (bl.has("optimize") && !bl.raw("optimize").is_null()) {
            Reader opt(bl.raw("optimize"), "blinding.optimize");
            BlindingGrid grid;
            if (!opt.has("wavelength_grid") || !opt.has("power_grid")) {
                throw ValidationError("needs wavelength_grid and power_grid", "blinding.optimize");
            }
            grid.wavelength_grid = read_grid(opt.raw("wavelength_grid"), "blinding.optimize.wavelength_grid");
            grid.power_grid = read_grid(opt.raw("power_grid"), "blinding.optimize.power_grid");
            opt.finish();
            c.blinding.optimize = std::move(grid);
        }
        bl.finish();
    }
    root.finish();
    validate(c);
    return c;
}

json serialize_config(const SessionConfig& c) {
    json dets = json::array();
    for (const DetectorSpec& d : c.detectors) {
        dets.push_back({{"id", std::string(to_string(d.id))},
                        {"efficiency", table_to_json(d.efficiency)},
                        {"dark_count_prob", d.dark_count_prob},
                        {"blind_threshold", table_to_json(d.blind_threshold)}});
    }
    json blinding = {{"enabled", c.blinding.intercept.enabled},
                     {"pulse_power_mw", c.blinding.intercept.pulse_power_mw},
                     {"wavelength_nm", c.blinding.intercept.wavelength_nm},
                     {"optimize", nullptr}};
    if (c.blinding.optimize) {
        blinding["optimize"] = {{"wavelength_grid", c.blinding.optimize->wavelength_grid},
                                {"power_grid", c.blinding.optimize->power_grid}};
    }
    return {
        {"n_slots", c.n_slots},
        {"seed", c.seed},
        {"mode", std::string(to_string(c.mode))},
        {"channel", {{"transmittance", c.channel.transmittance}}},
        {"detectors", dets},
        {"wavelength_nm", c.wavelength_nm},
        {"eta_expected", c.eta_expected},
        {"basis_choice_prob", c.basis_choice_prob},
        {"bob_bit_one_prob", c.bob_bit_one_prob},
        {"double_click_policy", "discard_and_count"},
        {"alpha", c.alpha},
        {"covert",
         {{"eta_true", c.covert.eta_true},
          {"keyed", c.covert.keyed},
          {"key_seed", c.covert.key_seed},
          {"rate_matching", c.covert.rate_matching},
          {"trojan",
           {{"enabled", c.covert.trojan.enabled}, {"readout_success_prob", c.covert.trojan.readout_success_prob}}}}},
        {"blinding", blinding},
    };
}

std::string config_hash(const SessionConfig& config) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : serialize_config(config).dump()) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json to_json(const BlindingPlan& plan) {
    return {{"wavelength_nm", plan.wavelength_nm},
            {"peak_power_mw", plan.peak_power_mw},
            {"same_basis_single_prob", plan.same_basis_single_prob},
            {"same_basis_double_prob", plan.same_basis_double_prob},
            {"cross_basis_click_prob", plan.cross_basis_click_prob}};
}

json to_json(const DetectabilityReport& r) {
    json out;
    out["alpha"] = r.params.alpha;
    out["expected_rate"] = r.params.expected_rate;
    out["expected_double_click_rate"] = r.params.expected_double_click_rate;
    json notes = json::array();

    if (r.gap_parity) {
        out["gap_parity"] = {{"chi_square", r.gap_parity->statistic},
                             {"p_value", r.gap_parity->p_value},
                             {"verdict", std::string(to_string(r.gap_parity_verdict))}};
    } else {
        out["gap_parity"] = nullptr;
        notes.push_back("fewer than two reports: gap-parity monitor absent");
    }
    // JSON has no infinity; degenerate z-scores are written as strings.
    json z = std::isfinite(r.rate_z_score) ? json(r.rate_z_score) : json(r.rate_z_score > 0 ? "+inf" : "-inf");
    out["rate"] = {{"z_score", z}, {"verdict", std::string(to_string(r.rate_verdict))}};
    if (r.outcomes) {
        out["outcome_uniformity"] = {{"counts", r.outcomes->counts},
                                     {"frequencies", r.outcomes->frequencies},
                                     {"chi_square", r.outcomes->test.statistic},
                                     {"p_value", r.outcomes->test.p_value},
                                     {"verdict", std::string(to_string(r.outcome_verdict))}};
    } else {
        out["outcome_uniformity"] = nullptr;
        notes.push_back("no reports: outcome-uniformity monitor absent");
    }
    out["double_click"] = {{"rate", r.double_click_rate}, {"verdict", std::string(to_string(r.double_click_verdict))}};
    out["gap_geometric_ks"] =
        r.gap_ks ? json{{"statistic", r.gap_ks->statistic}, {"p_value", r.gap_ks->p_value}} : json(nullptr);
    out["all_pass"] = r.all_pass();
    out["notes"] = notes;
    return out;
}

json report_to_json(const SessionReport& r, const SessionConfig& config) {
    json out;
    out["tool"] = "ddiqkd-sim";
    out["version"] = std::string(kToolVersion);
    out["config_hash"] = config_hash(config);
    out["seed"] = r.seed;
    out["mode"] = std::string(to_string(r.mode));
    out["counts"] = {{"sent", r.sent},
                     {"arrived", r.arrived},
                     {"reported", r.reported},
                     {"sifted", r.sifted},
                     {"double_clicks", r.double_clicks}};
    out["qber"] = optional_number(r.qber);
    out["sifted_fraction"] = r.sifted_fraction;
    out["key_rate"] = r.key_rate;
    out["reported_rate"] = r.reported_rate;
    out["double_click_rate"] = r.double_click_rate;
    out["eve_leak_fraction"] = r.eve_leak_fraction;
    out["eve_bits_recovered"] = r.eve_bits_recovered;
    out["thinning_prob"] = optional_number(r.thinning_prob);
    out["blinding_plan"] = r.blinding_plan ? to_json(*r.blinding_plan) : json(nullptr);
    out["detectability"] = to_json(r.detectability);
    return out;
}

void write_transcript_csv(std::ostream& out, const Transcript& transcript, const SessionConfig& config) {
    const double expected_rate = config.channel.transmittance * config.eta_expected;
    std::array<double, 4> dark{};
    for (std::size_t k = 0; k < 4; ++k) dark[k] = config.detectors[k].dark_count_prob;
    out << "# tool=ddiqkd-sim\n"
        << "# version=" << kToolVersion << '\n'
        << "# config_hash=" << config_hash(config) << '\n'
        << "# seed=" << config.seed << '\n'
        << "# mode=" << to_string(config.mode) << '\n'
        << "# expected_rate=" << format_double(expected_rate) << '\n'
        << "# expected_double_click_rate=" << format_double(honest_double_click_prob(dark, expected_rate)) << '\n'
        << kTranscriptHeader << '\n';
    std::string line;
    for (const SlotRecord& r : transcript.records) {
        line.clear();
        line += std::to_string(r.slot);
        line += ',';
        line += to_string(r.alice.basis);
        line += r.alice.bit == BitValue::One ? ",1," : ",0,";
        line += to_string(r.bob.basis);
        line += r.bob.bit == BitValue::One ? ",1," : ",0,";
        line += r.arrived ? "1," : "0,";
        if (r.reported) line += to_string(*r.reported);
        line += r.double_click ? ",1\n" : ",0\n";
        out << line;
    }
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

}  // namespace

ParsedTranscript read_transcript_csv(std::istream& in) {
    ParsedTranscript parsed;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::optional<std::uint64_t> prev_slot;
    auto fail = [&](const std::string& what) -> ValidationError {
        return ValidationError("line " + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (header_seen) throw fail("comment after header");
            const std::string_view body = std::string_view(line).substr(1);
            const std::size_t eq = body.find('=');
            if (eq == std::string_view::npos) continue;
            std::string_view key = body.substr(0, eq);
            while (!key.empty() && key.front() == ' ') key.remove_prefix(1);
            const std::string_view value = body.substr(eq + 1);
            if (key == "expected_rate") {
                parsed.expected_rate = parse_double(value);
                if (!parsed.expected_rate) throw fail("bad expected_rate");
            } else if (key == "expected_double_click_rate") {
                parsed.expected_double_click_rate = parse_double(value);
                if (!parsed.expected_double_click_rate) throw fail("bad expected_double_click_rate");
            } else if (key == "seed") {
                parsed.seed = parse_u64(value);
                if (!parsed.seed) throw fail("bad seed");
            } else if (key == "config_hash") {
                parsed.config_hash = std::string(value);
            }
            continue;
        }
        if (!header_seen) {
            if (line != kTranscriptHeader) throw fail("expected header '" + std::string(kTranscriptHeader) + "'");
            header_seen = true;
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() != 8) throw fail("expected 8 fields, found " + std::to_string(f.size()));
        const auto slot = parse_u64(f[0]);
        if (!slot) throw fail("slot is not a non-negative integer");
        if (prev_slot && *slot <= *prev_slot) throw fail("slots must be strictly increasing");
        prev_slot = slot;
        Basis bob_basis;
        try {
            bob_basis = parse_basis(f[3]);
        } catch (const ValidationError& e) {
            throw fail(e.what());
        }
        if (f[7] != "0" && f[7] != "1") throw fail("double_click must be 0 or 1");
        ++parsed.view.n_slots;
        parsed.view.double_clicks += f[7] == "1" ? 1 : 0;
        if (!f[6].empty()) {
            if (f[7] == "1") throw fail("a double click cannot carry a reported outcome");
            try {
                parsed.view.outcomes.push_back(parse_outcome(f[6]));
            } catch (const ValidationError& e) {
                throw fail(e.what());
            }
            parsed.view.reported_slots.push_back(*slot);
            parsed.view.bob_bases.push_back(bob_basis);
        }
    }
    if (!header_seen) throw ValidationError("line " + std::to_string(line_no) + ": missing transcript header");
    return parsed;
}

}  // namespace ddiqkd
