#include "signgate/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace signgate {

namespace {

class TomlParser {
public:
    explicit TomlParser(std::string_view text) : text_(text) {}

    nlohmann::json parse() {
        nlohmann::json root = nlohmann::json::object();
        nlohmann::json* table = &root;
        std::string table_name;
        while (true) {
            skip_blank_lines();
            if (at_end()) {
                break;
            }
            if (peek() == '[') {
                ++pos_;
                if (peek() == '[') {
                    fail("array tables are not supported");
                }
                skip_ws();
                const std::vector<std::string> path = parse_key();
                skip_ws();
                expect(']');
                table = &root;
                table_name.clear();
                for (const auto& part : path) {
                    table_name += (table_name.empty() ? "" : ".") + part;
                    auto& child = (*table)[part];
                    if (child.is_null()) {
                        child = nlohmann::json::object();
                    } else if (!child.is_object()) {
                        fail("'" + table_name + "' is already a value");
                    }
                    table = &child;
                }
            } else {
                parse_keyval(*table, table_name);
            }
            end_of_line();
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("", "TOML line " + std::to_string(line()) + ": " + what);
    }

    std::size_t line() const {
        std::size_t n = 1;
        for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
            n += text_[i] == '\n';
        }
        return n;
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }

    void expect(char c) {
        if (peek() != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    void skip_ws() {
        while (peek() == ' ' || peek() == '\t') {
            ++pos_;
        }
    }

    void skip_comment() {
        if (peek() == '#') {
            while (!at_end() && peek() != '\n') {
                ++pos_;
            }
        }
    }

    // Whitespace, newlines and comments, as allowed inside arrays.
    void skip_blank_lines() {
        while (true) {
            skip_ws();
            skip_comment();
            if (peek() == '\n' || peek() == '\r') {
                ++pos_;
                continue;
            }
            return;
        }
    }

    void end_of_line() {
        skip_ws();
        skip_comment();
        if (at_end()) {
            return;
        }
        if (peek() == '\r') {
            ++pos_;
        }
        if (peek() != '\n') {
            fail("unexpected trailing characters");
        }
        ++pos_;
    }

    std::vector<std::string> parse_key() {
        std::vector<std::string> parts;
        while (true) {
            skip_ws();
            if (peek() == '"' || peek() == '\'') {
                parts.push_back(parse_string());
            } else {
                const std::size_t start = pos_;
                while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-') {
                    ++pos_;
                }
                if (pos_ == start) {
                    fail("expected a key");
                }
                parts.emplace_back(text_.substr(start, pos_ - start));
            }
            skip_ws();
            if (peek() != '.') {
                return parts;
            }
            ++pos_;
        }
    }

    void parse_keyval(nlohmann::json& table, const std::string& table_name) {
        const std::vector<std::string> path = parse_key();
        skip_ws();
        expect('=');
        skip_ws();
        nlohmann::json* target = &table;
        std::string name = table_name;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            name += (name.empty() ? "" : ".") + path[i];
            auto& child = (*target)[path[i]];
            if (child.is_null()) {
                child = nlohmann::json::object();
            } else if (!child.is_object()) {
                fail("'" + name + "' is already a value");
            }
            target = &child;
        }
        name += (name.empty() ? "" : ".") + path.back();
        if (target->contains(path.back())) {
            fail("duplicate key '" + name + "'");
        }
        (*target)[path.back()] = parse_value();
    }

    nlohmann::json parse_value() {
        const char c = peek();
        if (c == '"' || c == '\'') {
            return parse_string();
        }
        if (c == '[') {
            return parse_array();
        }
        if (c == '{') {
            return parse_inline_table();
        }
        if (text_.substr(pos_, 4) == "true") {
            pos_ += 4;
            return true;
        }
        if (text_.substr(pos_, 5) == "false") {
            pos_ += 5;
            return false;
        }
        return parse_number();
    }

    std::string parse_string() {
        const char quote = peek();
        ++pos_;
        std::string out;
        while (true) {
            if (at_end() || peek() == '\n') {
                fail("unterminated string");
            }
            const char c = text_[pos_++];
            if (c == quote) {
                return out;
            }
            if (c == '\\' && quote == '"') {
                const char e = text_[pos_++];
                switch (e) {
                case 'n':
                    out += '\n';
                    break;
                case 't':
                    out += '\t';
                    break;
                case '"':
                case '\\':
                    out += e;
                    break;
                default:
                    fail(std::string("unsupported escape \\") + e);
                }
                continue;
            }
            out += c;
        }
    }

    nlohmann::json parse_number() {
        const std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                             peek() == '.' || peek() == '_')) {
            ++pos_;
        }
        std::string token;
        for (char ch : text_.substr(start, pos_ - start)) {
            if (ch != '_') {
                token += ch;
            }
        }
        if (token.empty()) {
            fail("expected a value");
        }
        const bool is_float = token.find_first_of(".eE") != std::string::npos;
        const char* first = token.data() + (token[0] == '+' ? 1 : 0);
        const char* last = token.data() + token.size();
        if (is_float) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last) {
                fail("invalid number '" + token + "'");
            }
            return v;
        }
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) {
            fail("invalid number '" + token + "'");
        }
        return v;
    }

    nlohmann::json parse_array() {
        expect('[');
        nlohmann::json arr = nlohmann::json::array();
        while (true) {
            skip_blank_lines();
            if (peek() == ']') {
                ++pos_;
                return arr;
            }
            arr.push_back(parse_value());
            skip_blank_lines();
            if (peek() == ',') {
                ++pos_;
            } else if (peek() != ']') {
                fail("expected ',' or ']' in array");
            }
        }
    }

    nlohmann::json parse_inline_table() {
        expect('{');
        nlohmann::json table = nlohmann::json::object();
        skip_ws();
        if (peek() == '}') {
            ++pos_;
            return table;
        }
        while (true) {
            skip_ws();
            parse_keyval(table, "");
            skip_ws();
            if (peek() == '}') {
                ++pos_;
                return table;
            }
            expect(',');
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

const nlohmann::json& required(const nlohmann::json& cfg, const char* key) {
    if (!cfg.contains(key)) {
        throw ConfigError(key, "missing required key");
    }
    return cfg.at(key);
}

std::uint64_t unsigned_value(const nlohmann::json& v, const char* key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        if (v.is_number_unsigned()) {
            return v.get<std::uint64_t>();
        }
        throw ConfigError(key, "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

double real_value(const nlohmann::json& v, const char* key) {
    if (!v.is_number()) {
        throw ConfigError(key, "must be a number");
    }
    return v.get<double>();
}

std::string tau_label(double tau) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", tau);
    return buf;
}

} // namespace

nlohmann::json parse_toml(std::string_view text) {
    return TomlParser(text).parse();
}

std::vector<Scenario> scenarios_from_json(const nlohmann::json& cfg, const ScenarioOverrides& overrides,
                                          std::string_view default_name) {
    if (!cfg.is_object()) {
        throw ConfigError("", "scenario config must be a table");
    }
    static const std::vector<std::string> known{"name",       "m",        "replicates", "alpha_s", "seed",
                                                "effect",     "procedures", "tau_grid", "auto_tau"};
    for (const auto& [key, _] : cfg.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(key, "unknown key");
        }
    }
    if (cfg.contains("tau_grid") && cfg.contains("auto_tau")) {
        throw ConfigError("auto_tau", "tau_grid and auto_tau are mutually exclusive");
    }

    Scenario base;
    const std::string name = cfg.contains("name") ? cfg.at("name").get<std::string>() : std::string(default_name);
    base.m = unsigned_value(required(cfg, "m"), "m");
    base.replicates = overrides.replicates.value_or(
        cfg.contains("replicates") ? unsigned_value(cfg.at("replicates"), "replicates") : 1000);
    base.alpha_s = real_value(required(cfg, "alpha_s"), "alpha_s");
    if (!(base.alpha_s > 0.0 && base.alpha_s < 0.5)) {
        throw ConfigError("alpha_s", "must lie in (0, 0.5)");
    }
    if (base.m < 1) {
        throw ConfigError("m", "must be >= 1");
    }
    if (base.replicates < 1) {
        throw ConfigError("replicates", "must be >= 1");
    }
    std::uint64_t master = overrides.default_seed.value_or(kBuiltinSeed);
    if (cfg.contains("seed")) {
        master = unsigned_value(cfg.at("seed"), "seed");
    }
    if (overrides.seed) {
        master = *overrides.seed;
    }

    const auto& procs = required(cfg, "procedures");
    if (!procs.is_array() || procs.empty()) {
        throw ConfigError("procedures", "must be a non-empty list");
    }
    for (const auto& p : procs) {
        if (!p.is_string()) {
            throw ConfigError("procedures", "entries must be strings");
        }
        try {
            base.procedures.push_back(parse_procedure(p.get<std::string>()));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("procedures", e.what());
        }
    }

    nlohmann::json effect = required(cfg, "effect");
    if (!effect.is_object() || effect.size() != 1) {
        throw ConfigError("effect", "must hold exactly one of ald, spike_slab, shifted_chisq, normal");
    }
    const std::string family = effect.begin().key();

    // The swept scale lives at effect.ald.tau or effect.spike_slab.spike.tau.
    nlohmann::json* scale_table = nullptr;
    if (family == "ald") {
        scale_table = &effect["ald"];
    } else if (family == "spike_slab" && effect["spike_slab"].contains("spike")) {
        scale_table = &effect["spike_slab"]["spike"];
    }

    std::vector<double> taus;
    if (cfg.contains("tau_grid")) {
        const auto& grid = cfg.at("tau_grid");
        if (!grid.is_array() || grid.empty() || !scale_table) {
            throw ConfigError("tau_grid", "must be a non-empty list and needs an ald or spike_slab effect");
        }
        for (const auto& t : grid) {
            taus.push_back(real_value(t, "tau_grid"));
        }
    } else if (cfg.contains("auto_tau")) {
        const auto& at = cfg.at("auto_tau");
        if (family != "ald") {
            throw ConfigError("auto_tau", "requires an ald effect");
        }
        if (!at.is_object() || !at.contains("q")) {
            throw ConfigError("auto_tau.q", "missing required key");
        }
        for (const auto& [key, _] : at.items()) {
            if (key != "q" && key != "m") {
                throw ConfigError("auto_tau." + key, "unknown key");
            }
        }
        const double q = real_value(at.at("q"), "auto_tau.q");
        if (!(q > 0.0 && q < 1.0)) {
            throw ConfigError("auto_tau.q", "must lie in (0, 1)");
        }
        if (scale_table->contains("q") && scale_table->at("q").get<double>() != q) {
            throw ConfigError("auto_tau.q", "disagrees with effect.ald.q");
        }
        (*scale_table)["q"] = q;
        taus = auto_tau_grid(q);
    }

    std::vector<Scenario> points;
    auto build = [&](const nlohmann::json& spec) {
        try {
            return distribution_from_json(spec);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("effect", e.what());
        }
    };
    if (taus.empty()) {
        Scenario s = base;
        s.id = name;
        s.effect = build(effect);
        s.master_seed = derive_seed(master, 0);
        points.push_back(std::move(s));
        return points;
    }
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(taus[i] > 0.0)) {
            throw ConfigError("tau_grid", "values must be positive");
        }
        (*scale_table)["tau"] = taus[i];
        Scenario s = base;
        s.id = name + "/tau=" + tau_label(taus[i]);
        s.effect = build(effect);
        s.master_seed = derive_seed(master, i);
        points.push_back(std::move(s));
    }
    return points;
}

std::vector<Scenario> load_scenario_file(const std::filesystem::path& path, const ScenarioOverrides& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("", "cannot read scenario file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    nlohmann::json cfg;
    if (path.extension() == ".json") {
        try {
            cfg = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("", e.what());
        }
    } else {
        cfg = parse_toml(text);
    }
    try {
        return scenarios_from_json(cfg, overrides, path.stem().string());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("", e.what());
    }
}

} // namespace signgate
