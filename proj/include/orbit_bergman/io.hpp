#pragma once

// Run configuration (key=value text, command-line overrides, JSON echo) and result
// records with byte-stable JSON and CSV output.

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "common.hpp"

namespace orbit_bergman {

using Json = nlohmann::ordered_json;

/// Raised for malformed or out-of-range configuration; the CLI maps it to exit status 2.
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"orbit",     "reduce", "forms", "eval",  "petersson",
                                                "dims",      "poincare", "tracelike", "gram", "vndim",
                                                "density",   "extremal", "wandering", "verify"};
    return names;
}

/// 17 significant digits; integral values keep a trailing ".0" so they read back as doubles.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::string s = fmt::format("{:.17g}", v);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

inline double parse_double(const std::string& text, const std::string& what) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("cannot read " + what + " from '" + text + "'");
    }
    if (used != text.size()) throw ConfigError("trailing characters in " + what + " '" + text + "'");
    return v;
}

inline std::int64_t parse_int(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("cannot read integer " + what + " from '" + text + "'");
    }
    if (used != text.size()) throw ConfigError("trailing characters in " + what + " '" + text + "'");
    return v;
}

/// Complex numbers in the form "re+imi": "2i", "-0.5+0.866i", "0.3", "i", "1e-3-2i".
inline Complex parse_complex(std::string text) {
    std::erase_if(text, [](char c) { return c == ' '; });
    if (text.empty()) throw ConfigError("empty complex number");
    if (text.back() != 'i') return {parse_double(text, "complex number"), 0.0};
    text.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = text.size(); k-- > 1;) {
        if ((text[k] == '+' || text[k] == '-') && text[k - 1] != 'e' && text[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    const std::string re = split == std::string::npos ? "" : text.substr(0, split);
    std::string im = split == std::string::npos ? text : text.substr(split);
    if (im.empty() || im == "+") im = "1";
    if (im == "-") im = "-1";
    return {re.empty() ? 0.0 : parse_double(re, "real part"), parse_double(im, "imaginary part")};
}

inline std::string format_complex(Complex z) {
    const std::string im = format_double(z.imag());
    return format_double(z.real()) + (im.front() == '-' ? "" : "+") + im + "i";
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::erase_if(item, [](char c) { return c == ' '; });
        if (!item.empty()) out.push_back(parse_double(item, what));
    }
    return out;
}

inline std::string format_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + format_double(v[k]);
    return out;
}

/// Everything that determines a run. Unset optionals fall back to per-command defaults;
/// command-specific parameters live in params under their key names.
struct RunConfig {
    std::string command;
    std::string preset = "PSL2Z";
    std::optional<double> s;
    std::optional<Complex> z;
    std::optional<std::int64_t> budget_word;
    std::optional<std::int64_t> budget_norm;
    std::optional<std::int64_t> basis_n;
    std::optional<std::int64_t> grid;
    std::vector<double> radii;
    std::string out;
    std::string format = "json";
    std::uint64_t seed = 1;
    std::string level = "fast";
    std::map<std::string, std::string> params;

    /// Sets one key from its text form, as read from a config file or a --set flag.
    void set(const std::string& key, const std::string& value) {
        if (key == "command") command = value;
        else if (key == "preset") preset = value;
        else if (key == "s") s = parse_double(value, "s");
        else if (key == "z") z = parse_complex(value);
        else if (key == "budget-word") budget_word = parse_int(value, key);
        else if (key == "budget-norm") budget_norm = parse_int(value, key);
        else if (key == "basis-n") basis_n = parse_int(value, key);
        else if (key == "grid") grid = parse_int(value, key);
        else if (key == "radii") radii = parse_list(value, key);
        else if (key == "out") out = value;
        else if (key == "format") format = value;
        else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(value, key));
        else if (key == "level") level = value;
        else params[key] = value;
    }

    double param_double(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : parse_double(it->second, key);
    }
    std::int64_t param_int(const std::string& key, std::int64_t fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : parse_int(it->second, key);
    }
    std::string param_string(const std::string& key, const std::string& fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
    std::vector<double> param_list(const std::string& key, const std::vector<double>& fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : parse_list(it->second, key);
    }

    void validate() const {
        const auto& names = command_names();
        if (std::find(names.begin(), names.end(), command) == names.end())
            throw ConfigError("unknown command '" + command + "'");
        static const std::set<std::string> presets{"PSL2Z", "pslz", "psl2z", "Gamma2", "gamma2"};
        if (!presets.count(preset)) throw ConfigError("unknown preset '" + preset + "'");
        if (s && !(*s > 1.0 && std::isfinite(*s))) throw ConfigError("s must be a finite number > 1, got " + format_double(*s));
        if (z && !(z->imag() > 0.0)) throw ConfigError("z must lie in the upper half-plane");
        for (const auto& [name, v] : {std::pair{"budget-word", budget_word}, std::pair{"budget-norm", budget_norm},
                                      std::pair{"basis-n", basis_n}, std::pair{"grid", grid}})
            if (v && *v < 0) throw ConfigError(std::string(name) + " must be >= 0");
        for (std::size_t k = 0; k < radii.size(); ++k) {
            if (!(radii[k] > 0.0 && radii[k] < 1.0)) throw ConfigError("radii must lie in (0,1)");
            if (k && !(radii[k] > radii[k - 1])) throw ConfigError("radii must increase");
        }
        if (format != "json" && format != "csv") throw ConfigError("format must be csv or json");
        if (level != "fast" && level != "full") throw ConfigError("level must be fast or full");
    }

    /// Key=value lines in a fixed order; reading them back with from_text gives an equal config.
    std::vector<std::pair<std::string, std::string>> entries() const {
        std::vector<std::pair<std::string, std::string>> e{{"command", command}, {"preset", preset}};
        if (s) e.emplace_back("s", format_double(*s));
        if (z) e.emplace_back("z", format_complex(*z));
        if (budget_word) e.emplace_back("budget-word", std::to_string(*budget_word));
        if (budget_norm) e.emplace_back("budget-norm", std::to_string(*budget_norm));
        if (basis_n) e.emplace_back("basis-n", std::to_string(*basis_n));
        if (grid) e.emplace_back("grid", std::to_string(*grid));
        if (!radii.empty()) e.emplace_back("radii", format_list(radii));
        if (!out.empty()) e.emplace_back("out", out);
        e.emplace_back("format", format);
        e.emplace_back("seed", std::to_string(seed));
        e.emplace_back("level", level);
        for (const auto& [k, v] : params) e.emplace_back(k, v);
        return e;
    }

    std::string to_text() const {
        std::string t;
        for (const auto& [k, v] : entries()) t += k + " = " + v + "\n";
        return t;
    }

    static RunConfig from_text(const std::string& text) {
        RunConfig c;
        std::stringstream ss(text);
        std::string line;
        int lineno = 0;
        auto trim = [](std::string v) {
            const auto b = v.find_first_not_of(" \t\r");
            const auto e = v.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
        };
        while (std::getline(ss, line)) {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        return c;
    }

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::io, "cannot read config file " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return from_text(ss.str());
    }

    Json to_json() const {
        Json j = Json::object();
        for (const auto& [k, v] : entries()) j[k] = v;
        return j;
    }

    static RunConfig from_json(const Json& j) {
        RunConfig c;
        for (const auto& [k, v] : j.items()) c.set(k, v.get<std::string>());
        return c;
    }

    friend bool operator==(const RunConfig& a, const RunConfig& b) { return a.entries() == b.entries(); }
};

/// Result of one run. The payload is the module report; a "table" member (columns, rows)
/// is what the CSV view prints. Timings are kept apart so payload bytes stay deterministic.
struct ResultRecord {
    RunConfig config;
    std::string version = orbit_bergman::version;
    std::string status = "ok";
    Json payload = Json::object();
    std::vector<std::string> warnings;
    std::map<std::string, double> timings;

    void warn(const std::string& w) { warnings.push_back(w); }

    Json to_json(bool with_timings = false) const {
        Json j = Json::object();
        j["version"] = version;
        j["status"] = status;
        j["config"] = config.to_json();
        j["warnings"] = warnings;
        j["payload"] = payload;
        if (with_timings) {
            Json t = Json::object();
            for (const auto& [k, v] : timings) t[k] = v;
            j["timings"] = t;
        }
        return j;
    }

    static ResultRecord from_json(const Json& j) {
        ResultRecord r;
        r.version = j.at("version").get<std::string>();
        r.status = j.at("status").get<std::string>();
        r.config = RunConfig::from_json(j.at("config"));
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        r.payload = j.at("payload");
        if (j.contains("timings"))
            for (const auto& [k, v] : j.at("timings").items()) r.timings[k] = v.get<double>();
        return r;
    }
};

/// Doubles that are not finite are stored as the strings "inf", "-inf", "nan".
inline Json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

inline Json json_complex(Complex z) { return Json::array({json_number(z.real()), json_number(z.imag())}); }

namespace detail {

inline void write_scalar(std::string& out, const Json& v) {
    if (v.is_number_float()) out += format_double(v.get<double>());
    else out += v.dump();
}

inline void write_json(std::string& out, const Json& v, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' '), end_pad(static_cast<std::size_t>(indent), ' ');
    if (v.is_object()) {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        std::size_t k = 0;
        for (const auto& [key, val] : v.items()) {
            out += pad + Json(key).dump() + ": ";
            write_json(out, val, indent + 2);
            out += ++k < v.size() ? ",\n" : "\n";
        }
        out += end_pad + "}";
    } else if (v.is_array()) {
        // arrays of scalars stay on one line
        const bool flat = std::none_of(v.begin(), v.end(), [](const Json& e) { return e.is_structured(); });
        if (v.empty()) {
            out += "[]";
        } else if (flat) {
            out += "[";
            for (std::size_t k = 0; k < v.size(); ++k) {
                if (k) out += ", ";
                write_scalar(out, v[k]);
            }
            out += "]";
        } else {
            out += "[\n";
            for (std::size_t k = 0; k < v.size(); ++k) {
                out += pad;
                write_json(out, v[k], indent + 2);
                out += k + 1 < v.size() ? ",\n" : "\n";
            }
            out += end_pad + "]";
        }
    } else {
        write_scalar(out, v);
    }
}

inline std::string csv_cell(const Json& v) {
    std::string s;
    if (v.is_string()) s = v.get<std::string>();
    else if (v.is_structured()) s = v.dump();
    else write_scalar(s, v);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

}  // namespace detail

/// JSON text with the record's key order and 17 significant digits for every double.
inline std::string render_json(const Json& j) {
    std::string out;
    detail::write_json(out, j, 0);
    return out + "\n";
}

/// CSV view of the payload: its table when present, else one key,value row per scalar member.
inline std::string render_csv(const ResultRecord& r) {
    std::string out;
    auto row = [&](const std::vector<Json>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) out += (k ? "," : "") + detail::csv_cell(cells[k]);
        out += "\n";
    };
    if (r.payload.contains("table")) {
        const auto& t = r.payload["table"];
        row(t.at("columns").get<std::vector<Json>>());
        for (const auto& cells : t.at("rows")) row(cells.get<std::vector<Json>>());
        return out;
    }
    row({"key", "value"});
    for (const auto& [k, v] : r.payload.items()) row({k, v});
    return out;
}

struct EmitOptions {
    bool with_timings = false;
};

inline std::string render(const ResultRecord& r, const std::string& format, const EmitOptions& opts = {}) {
    if (format == "csv") return render_csv(r);
    require(format == "json", ErrorKind::precondition, "format must be csv or json");
    return render_json(r.to_json(opts.with_timings));
}

/// Writes the record to path; "-" or an empty path means standard output.
inline void emit_results(const ResultRecord& r, const std::string& path, const std::string& format,
                         const EmitOptions& opts = {}) {
    const std::string text = render(r, format, opts);
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        std::fflush(stdout);
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::io, "cannot open " + path + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.close();
    if (!f) throw Error(ErrorKind::io, "write to " + path + " failed");
}

inline ResultRecord read_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot read " + path);
    try {
        return ResultRecord::from_json(Json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::io, std::string("malformed record: ") + e.what());
    }
}

}  // namespace orbit_bergman
