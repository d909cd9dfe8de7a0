// Scenario pipelines behind the CLI subcommands, plus the CSV / JSON / grid
// writers. All outputs are deterministic for a fixed config and carry its
// hash.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cavio/config.hpp"
#include "cavio/extraction.hpp"
#include "cavio/resonances.hpp"
#include "cavio/states.hpp"

namespace cavio {

using json = nlohmann::ordered_json;

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path.string());
    out << text;
}

inline void write_grid_file(const std::filesystem::path& path, const WignerGrid& g,
                            const std::string& hash) {
    std::string text;
    text.reserve(g.values.size() * 20);
    text += "# wigner " + std::to_string(g.m) + " " + format_double(g.half_extent) + " " +
            format_double(g.center.real()) + " " + format_double(g.center.imag()) + "\n";
    text += "# config_hash " + hash + "\n";
    for (int ip = 0; ip < g.m; ++ip) {
        for (int ix = 0; ix < g.m; ++ix) {
            if (ix) text += ' ';
            text += format_double(g.at(ix, ip));
        }
        text += '\n';
    }
    write_text(path, text);
}

inline json mode_to_json(const ResonantMode& m) {
    json j;
    j["k"] = m.k;
    j["omega_k"] = m.omega;
    j["gamma_k"] = m.gamma;
    j["Omega_k"] = to_json(m.Omega());
    j["interval"] = json::array({m.interval_lo, m.interval_hi});
    j["delta_omega"] = m.delta_omega();
    j["root_residual"] = m.residual;
    j["T_k"] = to_json(m.couplings.T);
    j["A_k_plus"] = to_json(m.couplings.A_plus);
    j["A_k_minus"] = to_json(m.couplings.A_minus);
    j["A_k_cav"] = to_json(m.couplings.A_cav);
    j["T_k_out"] = to_json(m.couplings.T_out);
    j["A_k_plus_out"] = to_json(m.couplings.A_plus_out);
    j["A_k_minus_out"] = to_json(m.couplings.A_minus_out);
    j["R_k_out"] = to_json(m.couplings.R_out);
    j["gamma_rad"] = m.rates.gamma_rad;
    j["gamma_rad_out"] = m.rates.gamma_rad_out;
    j["gamma_abs"] = m.rates.gamma_abs;
    j["gamma_lambda"] = {{"cav", m.rates.gamma_cav},
                         {"plus", m.rates.gamma_plus},
                         {"minus", m.rates.gamma_minus}};
    j["closure_residual"] = m.rates.closure_residual;
    j["validity_ratio"] = m.validity_ratio;
    j["validity_flag"] = m.validity_flag;
    return j;
}

struct RunSummary {
    int exit_code = 0;
    std::vector<std::string> messages;
    std::vector<std::filesystem::path> files;
};

inline std::filesystem::path ensure_out_dir(const ScenarioConfig& cfg,
                                            const std::string& override_dir) {
    std::filesystem::path dir = override_dir.empty() ? cfg.out_dir : override_dir;
    std::filesystem::create_directories(dir);
    return dir;
}

// Per-mode report JSON plus a |D1(w)|^-2 spectral-response sweep CSV.
inline RunSummary run_resonances(const ScenarioConfig& cfg, const std::string& override_dir = "") {
    RunSummary sum;
    const auto dir = ensure_out_dir(cfg, override_dir);
    json modes_json = json::array();
    std::vector<ResonantMode> modes;
    int failures = 0;
    for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
        try {
            auto found = locate_resonances(cfg.geometry, k, k, cfg.resonance_options);
            modes.push_back(found.front());
            modes_json.push_back(mode_to_json(found.front()));
        } catch (const std::exception& e) {
            ++failures;
            sum.messages.push_back("mode k=" + std::to_string(k) + " failed: " + e.what());
            json j;
            j["k"] = k;
            j["error"] = e.what();
            modes_json.push_back(j);
        }
    }
    if (failures == cfg.k_max - cfg.k_min + 1) sum.exit_code = 1;

    if (cfg.wants("json")) {
        json j;
        j["config_hash"] = cfg.file.hash();
        j["modes"] = modes_json;
        const auto p = dir / "resonances.json";
        write_text(p, j.dump(2) + "\n");
        sum.files.push_back(p);
    }
    if (cfg.wants("csv") && !modes.empty()) {
        std::string csv = "# config_hash " + cfg.file.hash() + "\n";
        csv += "omega,abs_D1,inv_abs_D1_sq\n";
        const double lo = modes.front().interval_lo;
        const double hi = modes.back().interval_hi;
        for (int i = 0; i <= cfg.sweep_points; ++i) {
            const double w = lo + (hi - lo) * i / cfg.sweep_points;
            const double a = std::abs(spectral_denominators(cfg.geometry, w).D1);
            csv += format_double(w) + "," + format_double(a) + "," +
                   format_double(1.0 / (a * a)) + "\n";
        }
        const auto p = dir / "spectral_response.csv";
        write_text(p, csv);
        sum.files.push_back(p);
    }
    return sum;
}

inline ResonantMode solve_single_mode(const ScenarioConfig& cfg, int k) {
    return locate_resonances(cfg.geometry, k, k, cfg.resonance_options).front();
}

// eta(t) curve with the closed-form column alongside, chi tables, residual.
inline RunSummary run_extraction(const ScenarioConfig& cfg, const std::string& override_dir = "") {
    RunSummary sum;
    const auto dir = ensure_out_dir(cfg, override_dir);
    const ResonantMode mode = solve_single_mode(cfg, cfg.extraction_k);
    const double gsum = mode.rates.gamma_rad + mode.rates.gamma_abs;

    ExtractionSettings s;
    s.t0 = cfg.t0;
    s.delta_t = cfg.delta_t;
    s.quad_order = cfg.quad_order;
    s.basis = cfg.basis;
    s.basis_size = cfg.basis_size;
    s.grid = cfg.grid_kind;

    if (cfg.wants("csv")) {
        std::string csv = "# config_hash " + cfg.file.hash() + "\n";
        csv += "t,gamma_t,eta_quadrature,eta_closed_form\n";
        for (int i = 1; i <= cfg.curve_points; ++i) {
            const double gt = cfg.curve_t_gamma_max * i / cfg.curve_points;
            ExtractionSettings si = s;
            si.t = cfg.t0 + gt / gsum;
            const OutputMode om = build_output_mode(mode, cfg.geometry, si);
            csv += format_double(si.t) + "," + format_double(gt) + "," +
                   format_double(om.eta) + "," + format_double(eta_closed_form(mode, si)) + "\n";
        }
        const auto p = dir / "eta_curve.csv";
        write_text(p, csv);
        sum.files.push_back(p);
    }

    ExtractionSettings st = s;
    st.t = cfg.t0 + cfg.t_gamma / gsum;
    const ExtractionResult res = mode_couplings(mode, cfg.geometry, st);
    if (res.resolution_warning)
        sum.messages.push_back("quadrature warning: plain grid with N < 16 delta_omega/Gamma");

    if (cfg.wants("json")) {
        json j;
        j["config_hash"] = cfg.file.hash();
        j["k"] = mode.k;
        j["t"] = st.t;
        j["gamma_t"] = cfg.t_gamma;
        j["eta"] = res.eta;
        j["eta_discrete"] = res.eta_discrete;
        j["eta_closed_form"] = res.eta_closed;
        j["residual"] = res.residual;
        j["sum_rule_total"] = res.sum_rule_total();
        json chij;
        for (Channel ch : kChannels) {
            json arr = json::array();
            for (const cplx& v : res.chi[static_cast<int>(ch)]) {
                json e;
                e["chi"] = to_json(v);
                e["abs"] = std::abs(v);
                arr.push_back(e);
            }
            chij[channel_name(ch)] = arr;
        }
        j["chi"] = chij;
        const auto p = dir / "extraction.json";
        write_text(p, j.dump(2) + "\n");
        sum.files.push_back(p);
    }
    if (cfg.wants("csv") && res.has_output) {
        std::string csv = "# config_hash " + cfg.file.hash() + "\n";
        csv += "omega,re,im\n";
        for (std::size_t i = 0; i < res.omega.size(); ++i)
            csv += format_double(res.omega[i]) + "," + format_double(res.phi_out[i].real()) +
                   "," + format_double(res.phi_out[i].imag()) + "\n";
        const auto p = dir / "phi_out.csv";
        write_text(p, csv);
        sum.files.push_back(p);
    }
    return sum;
}

inline json grid_metrics_json(const ScenarioConfig& cfg, const WignerGrid& g,
                              const std::vector<std::string>& notes) {
    const NegativityMetrics nm = negativity_metrics(g);
    json j;
    j["config_hash"] = cfg.file.hash();
    j["grid_points"] = g.m;
    j["half_extent"] = g.half_extent;
    j["center"] = to_json(g.center);
    j["normalization"] = g.integral();
    j["min_W"] = nm.min_value;
    j["negative_volume"] = nm.negative_volume;
    j["notes"] = notes;
    return j;
}

// Cat-state demo: Gaussian-noise smoothing of the (displaced) cavity state
// per the prescribed eta, chi_in, chi, nbar scalars.
inline RunSummary run_cat_demo(const ScenarioConfig& cfg, const std::string& override_dir = "") {
    RunSummary sum;
    const auto dir = ensure_out_dir(cfg, override_dir);
    std::vector<std::string> notes;
    const double noise = 2.0 * cfg.nbar * std::norm(cfg.chi);
    const WignerGrid out = cat_output_wigner(cfg.cavity_state, cfg.eta, cfg.chi_in, cfg.beta,
                                             noise, cfg.grid_spec, &notes);
    if (cfg.wants("grid")) {
        const auto p = dir / "cat_wigner.grid";
        write_grid_file(p, out, cfg.file.hash());
        sum.files.push_back(p);
    }
    if (cfg.wants("json")) {
        json j = grid_metrics_json(cfg, out, notes);
        j["eta"] = cfg.eta;
        j["chi_in"] = to_json(cfg.chi_in);
        j["chi"] = to_json(cfg.chi);
        j["nbar"] = cfg.nbar;
        j["beta"] = to_json(cfg.beta);
        j["noise_sum"] = noise;
        j["fidelity_condition"] = fidelity_condition(cfg.eta, noise);
        const auto p = dir / "cat_metrics.json";
        write_text(p, j.dump(2) + "\n");
        sum.files.push_back(p);
    }
    for (const auto& n : notes) sum.messages.push_back(n);
    return sum;
}

// General channel map: cavity state in, output Wigner grid out. Channel
// couplings either prescribed in the config or derived from an extraction.
inline RunSummary run_wigner_map(const ScenarioConfig& cfg, const std::string& override_dir = "") {
    RunSummary sum;
    const auto dir = ensure_out_dir(cfg, override_dir);
    std::vector<std::string> notes;

    ChannelConfig channels;
    channels.mode = cfg.channel_mode;
    if (cfg.channel_mode == ChannelMode::Prescribed) {
        channels.eta = cfg.eta;
        channels.couplings = cfg.channels;
    } else {
        const ResonantMode mode = solve_single_mode(cfg, cfg.extraction_k);
        const double gsum = mode.rates.gamma_rad + mode.rates.gamma_abs;
        ExtractionSettings s;
        s.t0 = cfg.t0;
        s.t = cfg.t0 + cfg.t_gamma / gsum;
        s.delta_t = cfg.delta_t;
        s.quad_order = cfg.quad_order;
        s.basis = cfg.basis;
        s.basis_size = cfg.basis_size;
        s.grid = cfg.grid_kind;
        const ExtractionResult res = mode_couplings(mode, cfg.geometry, s);
        channels.eta = res.eta_discrete;
        for (Channel ch : kChannels) {
            const auto& chiv = res.chi[static_cast<int>(ch)];
            for (std::size_t i = 0; i < chiv.size(); ++i) {
                if (std::abs(chiv[i]) < 1e-6) continue;
                ChannelCoupling cc;
                cc.id = std::string(channel_name(ch)) + "_" + std::to_string(i);
                cc.chi = chiv[i];
                cc.state = StateSpec::thermal(cfg.nbar);
                channels.couplings.push_back(cc);
            }
        }
        sum.messages.push_back("derived " + std::to_string(channels.couplings.size()) +
                               " channel couplings, eta = " + format_double(channels.eta));
    }

    const WignerGrid in = wigner_of(cfg.cavity_state, cfg.grid_spec, &notes);
    const WignerGrid out = output_wigner(cfg.cavity_state, channels, cfg.grid_spec, {}, &notes);
    if (cfg.wants("grid")) {
        const auto p_in = dir / "input_wigner.grid";
        write_grid_file(p_in, in, cfg.file.hash());
        sum.files.push_back(p_in);
        const auto p = dir / "output_wigner.grid";
        write_grid_file(p, out, cfg.file.hash());
        sum.files.push_back(p);
    }
    if (cfg.wants("json")) {
        json j = grid_metrics_json(cfg, out, notes);
        j["eta"] = channels.eta;
        j["input_min_W"] = negativity_metrics(in).min_value;
        j["input_normalization"] = in.integral();
        json chans = json::array();
        for (const auto& cc : channels.couplings) {
            json e;
            e["id"] = cc.id;
            e["chi"] = to_json(cc.chi);
            chans.push_back(e);
        }
        j["channels"] = chans;
        const auto p = dir / "wigner_map_metrics.json";
        write_text(p, j.dump(2) + "\n");
        sum.files.push_back(p);
    }
    for (const auto& n : notes) sum.messages.push_back(n);
    return sum;
}

}  // namespace cavio
