// Scenario configuration: a sectioned key = value text format, diffable and
// hashable. Complex values are two-element arrays [re, im].

#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cavio/extraction.hpp"
#include "cavio/optics.hpp"
#include "cavio/states.hpp"

namespace cavio {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// FNV-1a 64-bit, printed as 16 hex digits; stamped into every output file.
inline std::string config_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

class ConfigFile {
public:
    static ConfigFile parse(const std::string& text) {
        ConfigFile cf;
        cf.hash_ = config_hash(text);
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hashpos = line.find('#');
            if (hashpos != std::string::npos) line = line.substr(0, hashpos);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key.empty() || section.empty())
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": key outside a [section]");
            cf.values_[section + "." + key] = val;
        }
        return cf;
    }

    static ConfigFile load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    const std::string& hash() const { return hash_; }

    bool has(const std::string& field) const { return values_.count(field) > 0; }

    std::string get_string(const std::string& field) const {
        auto it = values_.find(field);
        if (it == values_.end()) throw ConfigError("config: missing field '" + field + "'");
        return it->second;
    }
    std::string get_string(const std::string& field, const std::string& dflt) const {
        auto it = values_.find(field);
        return it == values_.end() ? dflt : it->second;
    }

    double get_double(const std::string& field) const { return to_double(field, get_string(field)); }
    double get_double(const std::string& field, double dflt) const {
        return has(field) ? get_double(field) : dflt;
    }
    int get_int(const std::string& field) const {
        const double v = get_double(field);
        const int i = static_cast<int>(v);
        if (v != i) throw ConfigError("config: field '" + field + "' must be an integer");
        return i;
    }
    int get_int(const std::string& field, int dflt) const {
        return has(field) ? get_int(field) : dflt;
    }
    bool get_bool(const std::string& field, bool dflt) const {
        if (!has(field)) return dflt;
        const std::string v = get_string(field);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("config: field '" + field + "' must be a boolean");
    }
    cplx get_complex(const std::string& field) const {
        const std::string v = get_string(field);
        if (v.size() < 2 || v.front() != '[' || v.back() != ']')
            throw ConfigError("config: field '" + field + "' must be a [re, im] pair");
        const std::string body = v.substr(1, v.size() - 2);
        const std::size_t comma = body.find(',');
        if (comma == std::string::npos)
            throw ConfigError("config: field '" + field + "' must be a [re, im] pair");
        return {to_double(field, trim(body.substr(0, comma))),
                to_double(field, trim(body.substr(comma + 1)))};
    }
    cplx get_complex(const std::string& field, cplx dflt) const {
        return has(field) ? get_complex(field) : dflt;
    }

private:
    static double to_double(const std::string& field, const std::string& v) {
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return d;
        } catch (const std::exception&) {
            throw ConfigError("config: field '" + field + "' is not a number: '" + v + "'");
        }
    }

    std::map<std::string, std::string> values_;
    std::string hash_;
};

// Typed view of the scenario sections.
struct ScenarioConfig {
    ConfigFile file;

    CavityGeometry geometry;
    int k_min = 1, k_max = 1;
    ResonanceOptions resonance_options;
    int sweep_points = 400;

    int extraction_k = 1;
    double t0 = 0.0;
    double t_gamma = 1.0;          // observation time in 1/(gamma_rad+gamma_abs)
    double curve_t_gamma_max = 5.0;
    int curve_points = 10;
    double delta_t = 0.0;
    int quad_order = 128;
    BasisKind basis = BasisKind::Svd;
    int basis_size = 12;
    GridKind grid_kind = GridKind::Adapted;

    StateSpec cavity_state;
    ChannelMode channel_mode = ChannelMode::Prescribed;
    double eta = 0.9;
    cplx chi_in = 0.9;
    cplx chi = 0.1;
    double nbar = 0.001;
    cplx beta = 2.0;
    std::vector<ChannelCoupling> channels;  // wigner-map channel list
    GridSpec grid_spec;

    std::string out_dir = "out";
    std::vector<std::string> formats{"csv", "json", "grid"};

    static ScenarioConfig from_file(const ConfigFile& cf) {
        ScenarioConfig c;
        c.file = cf;

        c.geometry.l = cf.get_double("geometry.l");
        c.geometry.d = cf.get_double("geometry.d");
        c.geometry.medium1 = OpticalMedium(cf.get_complex("geometry.n1"));
        c.geometry.medium2 = OpticalMedium(cf.get_complex("geometry.n2"));
        c.geometry.validate();

        c.k_min = cf.get_int("resonance.k_min");
        c.k_max = cf.get_int("resonance.k_max");
        if (c.k_max < c.k_min) throw ConfigError("config: resonance.k_max < resonance.k_min");
        c.resonance_options.tol = cf.get_double("resonance.tol", 1e-10);
        c.resonance_options.max_iterations = cf.get_int("resonance.max_iterations", 100);
        c.resonance_options.validity_threshold =
            cf.get_double("resonance.validity_threshold", 0.1);
        c.sweep_points = cf.get_int("resonance.sweep_points", 400);

        c.extraction_k = cf.get_int("extraction.k", c.k_min);
        c.t0 = cf.get_double("extraction.t0", 0.0);
        c.t_gamma = cf.get_double("extraction.t_gamma", 1.0);
        c.curve_t_gamma_max = cf.get_double("extraction.curve_t_gamma_max", 5.0);
        c.curve_points = cf.get_int("extraction.curve_points", 10);
        c.delta_t = cf.get_double("extraction.delta_t", 0.0);
        c.quad_order = cf.get_int("extraction.quad_order", 128);
        const std::string basis = cf.get_string("extraction.basis", "svd");
        if (basis == "svd") c.basis = BasisKind::Svd;
        else if (basis == "legendre") c.basis = BasisKind::Legendre;
        else if (basis == "grid") c.basis = BasisKind::Grid;
        else throw ConfigError("config: extraction.basis must be svd|legendre|grid");
        c.basis_size = cf.get_int("extraction.basis_size", 12);
        const std::string grid = cf.get_string("extraction.grid", "adapted");
        if (grid == "adapted") c.grid_kind = GridKind::Adapted;
        else if (grid == "gauss") c.grid_kind = GridKind::PlainGauss;
        else throw ConfigError("config: extraction.grid must be adapted|gauss");

        const bool swap = cf.get_bool("state.swap_squeeze_axes", false);
        const std::string kind = cf.get_string("state.cavity", "vacuum");
        if (kind == "vacuum") c.cavity_state = StateSpec::vacuum();
        else if (kind == "coherent")
            c.cavity_state = StateSpec::coherent(cf.get_complex("state.beta_cavity",
                                                                cf.get_complex("state.beta", 2.0)));
        else if (kind == "thermal")
            c.cavity_state = StateSpec::thermal(cf.get_double("state.nbar_cavity", 0.0));
        else if (kind == "squeezed_number")
            c.cavity_state = StateSpec::squeezed_number(cf.get_double("state.r"),
                                                        cf.get_int("state.n"), swap);
        else throw ConfigError("config: state.cavity must be "
                               "vacuum|coherent|thermal|squeezed_number");

        const std::string mode = cf.get_string("state.mode", "prescribed");
        if (mode == "prescribed") c.channel_mode = ChannelMode::Prescribed;
        else if (mode == "derived") c.channel_mode = ChannelMode::Derived;
        else throw ConfigError("config: state.mode must be prescribed|derived");
        c.eta = cf.get_double("state.eta", 0.9);
        c.chi_in = cf.get_complex("state.chi_in", cplx(cf.get_double("state.chi_in", 0.9)));
        c.chi = cf.get_complex("state.chi", cplx(cf.get_double("state.chi", 0.1)));
        c.nbar = cf.get_double("state.nbar", 0.001);
        c.beta = cf.get_complex("state.beta", 2.0);

        for (int i = 1;; ++i) {
            const std::string base = "state.channel" + std::to_string(i);
            if (!cf.has(base)) break;
            ChannelCoupling cc;
            cc.id = "channel" + std::to_string(i);
            cc.chi = cf.get_complex(base + "_chi");
            const std::string ck = cf.get_string(base);
            if (ck == "vacuum") cc.state = StateSpec::vacuum();
            else if (ck == "coherent") cc.state = StateSpec::coherent(cf.get_complex(base + "_beta"));
            else if (ck == "thermal") cc.state = StateSpec::thermal(cf.get_double(base + "_nbar"));
            else if (ck == "squeezed_number")
                cc.state = StateSpec::squeezed_number(cf.get_double(base + "_r"),
                                                      cf.get_int(base + "_n"), swap);
            else throw ConfigError("config: field '" + base + "' has unknown state kind");
            c.channels.push_back(cc);
        }

        c.grid_spec.points = cf.get_int("state.grid_points", 257);
        c.grid_spec.half_extent = cf.get_double("state.grid_extent", 6.0);
        c.grid_spec.center = cf.get_complex("state.grid_center", 0.0);
        c.grid_spec.auto_expand = cf.get_bool("state.auto_expand", true);

        c.out_dir = cf.get_string("output.dir", "out");
        c.formats.clear();
        std::string fmts = cf.get_string("output.formats", "csv,json,grid");
        std::istringstream fs(fmts);
        std::string tok;
        while (std::getline(fs, tok, ',')) {
            tok = trim(tok);
            if (tok != "csv" && tok != "json" && tok != "grid")
                throw ConfigError("config: output.formats entries must be csv|json|grid");
            c.formats.push_back(tok);
        }
        return c;
    }

    bool wants(const std::string& fmt) const {
        for (const auto& f : formats)
            if (f == fmt) return true;
        return false;
    }
};

}  // namespace cavio
