// Complex resonance search and the mode data derived from it: inward and
// outward coupling constants, standing-wave profile, and the decomposition
// of the total decay rate into radiative and absorptive channels.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "cavio/optics.hpp"

namespace cavio {

// Noise-channel normalization constants. A lossless medium has no
// absorption channel: its alpha is +infinity and the matching A coupling
// is exactly zero.
struct NoiseNormalizations {
    double alpha_cav;
    double alpha_plus;
    double alpha_minus;
};

inline NoiseNormalizations noise_normalizations(const CavityGeometry& g, double omega) {
    const cplx n1 = g.medium1.at(omega);
    const cplx n2 = g.medium2.at(omega);
    const cplx b1 = n1 * omega;
    const cplx b2 = n2 * omega;
    constexpr double inf = std::numeric_limits<double>::infinity();

    NoiseNormalizations a{inf, inf, inf};
    const double rad_cav =
        n1.real() * std::sinh(2.0 * b1.imag() * g.l) - n1.imag() * std::sin(2.0 * b1.real() * g.l);
    if (n1.imag() > 0.0) {
        if (rad_cav <= 0.0)
            throw NumericError("noise_normalizations: nonpositive radicand for alpha_cav");
        a.alpha_cav = 2.0 * std::sqrt(2.0) * std::abs(n1) / std::sqrt(rad_cav);
    }
    if (n2.imag() > 0.0) {
        const double pre = std::abs(n2) * std::exp(0.5 * b2.imag() * g.d);
        const double sh = n2.real() * std::sinh(b2.imag() * g.d);
        const double sn = n2.imag() * std::sin(b2.real() * g.d);
        const double rad_p = sh + sn;
        const double rad_m = sh - sn;
        if (rad_p <= 0.0 || rad_m <= 0.0)
            throw NumericError("noise_normalizations: nonpositive radicand for alpha_pm");
        a.alpha_plus = pre / std::sqrt(rad_p);
        a.alpha_minus = pre / std::sqrt(rad_m);
    }
    return a;
}

// The eight coefficient functions evaluated at a real frequency.
// Inward: T, A+, A-, A_cav; outward: T_out, A+_out, A-_out, R_out.
struct CouplingSet {
    cplx T, A_plus, A_minus, A_cav;
    cplx T_out, A_plus_out, A_minus_out, R_out;
};

inline CouplingSet coupling_constants(const CavityGeometry& g, double omega) {
    const StackCoefficients s = stack_coefficients(g, omega);
    const NoiseNormalizations a = noise_normalizations(g, omega);
    const cplx n1 = g.medium1.at(omega);
    const cplx n3 = CavityGeometry::medium3().at(omega);
    const cplx sqrt_n1 = std::sqrt(n1);

    CouplingSet c;
    c.T = -s.t31 * std::sqrt(n1 * n3.real()) / std::abs(n3) * s.phase1_l;
    c.A_cav = std::isinf(a.alpha_cav) ? cplx(0.0)
                                      : cplx(0, -4) * sqrt_n1 / a.alpha_cav;
    if (std::isinf(a.alpha_plus)) {
        c.A_plus = c.A_minus = cplx(0.0);
        c.A_plus_out = c.A_minus_out = cplx(0.0);
    } else {
        const cplx common = -s.t21 * sqrt_n1 / s.D2_prime * s.phase1_l;
        c.A_plus = common * (s.r23 * s.phase2 + 1.0) / a.alpha_plus;
        c.A_minus = common * (s.r23 * s.phase2 - 1.0) / a.alpha_minus;
        c.A_plus_out = s.t23 / s.D2_prime * (1.0 + s.r21 * s.phase2) / a.alpha_plus;
        c.A_minus_out = s.t23 / s.D2_prime * (1.0 - s.r21 * s.phase2) / a.alpha_minus;
    }
    c.T_out = s.t13 / sqrt_n1 * s.phase1_l;
    c.R_out = s.r31;
    return c;
}

struct DecayRates {
    double gamma_rad = 0.0;
    double gamma_abs = 0.0;
    double gamma_cav = 0.0;
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;
    double gamma_rad_out = 0.0;
    double closure_residual = 0.0;  // |Gamma - gamma_rad - gamma_abs| / Gamma
};

// One located resonance with everything attached.
struct ResonantMode {
    int k = 0;
    double omega = 0.0;           // Re Omega_k
    double gamma = 0.0;           // total decay rate, -2 Im Omega_k
    double interval_lo = 0.0;     // (Delta_k) lower edge
    double interval_hi = 0.0;     // (Delta_k) upper edge
    double residual = 0.0;        // |D1(Omega_k)| at convergence
    CouplingSet couplings;        // evaluated at omega (real part of the root)
    DecayRates rates;
    double validity_ratio = 0.0;  // gamma / delta_omega
    bool validity_flag = false;   // true when the ratio exceeds the threshold

    cplx Omega() const { return {omega, -0.5 * gamma}; }
    double delta_omega() const { return interval_hi - interval_lo; }
};

struct ResonanceOptions {
    double tol = 1e-10;              // on |D1|, relative to term magnitudes
    int max_iterations = 100;
    double validity_threshold = 0.1; // flag when gamma/delta_omega exceeds this
    int scan_points = 64;            // real-axis seeding scan per interval
};

namespace detail {

inline cplx d1_value(const CavityGeometry& g, cplx w) {
    return spectral_denominators(g, w).D1;
}

inline double d1_scale(const CavityGeometry& g, cplx w) {
    const StackCoefficients s = stack_coefficients(g, w);
    return 1.0 + std::abs(s.r13 * s.phase1_l * s.phase1_l);
}

// Damped Newton with central-difference derivative; Muller step when the
// Newton step stagnates.
inline cplx refine_root(const CavityGeometry& g, cplx w0, const ResonanceOptions& opt,
                        double* out_residual) {
    cplx w = w0;
    cplx f = d1_value(g, w);
    cplx w_prev = w0 * (1.0 + 1e-4), f_prev = d1_value(g, w_prev);
    for (int it = 0; it < opt.max_iterations; ++it) {
        const double scale = d1_scale(g, w);
        if (std::abs(f) < opt.tol * scale) {
            *out_residual = std::abs(f);
            return w;
        }
        const double h = 1e-6 * std::abs(w);
        const cplx df = (d1_value(g, w + h) - d1_value(g, w - h)) / (2.0 * h);
        cplx step = (std::abs(df) > 0.0) ? f / df : cplx(0.0);
        bool moved = false;
        if (std::abs(step) > 0.0) {
            double lam = 1.0;
            for (int back = 0; back < 40; ++back) {
                const cplx cand = w - lam * step;
                const cplx fc = d1_value(g, cand);
                if (std::abs(fc) < std::abs(f)) {
                    w_prev = w; f_prev = f;
                    w = cand; f = fc;
                    moved = true;
                    break;
                }
                lam *= 0.5;
            }
        }
        if (!moved) {
            // Muller step through (w_prev, w_mid, w) on the secant triple.
            const cplx w_mid = 0.5 * (w + w_prev);
            const cplx f_mid = d1_value(g, w_mid);
            const cplx q = (w - w_mid) / (w_mid - w_prev);
            const cplx A = q * f - q * (1.0 + q) * f_mid + q * q * f_prev;
            const cplx B = (2.0 * q + 1.0) * f - (1.0 + q) * (1.0 + q) * f_mid + q * q * f_prev;
            const cplx C = (1.0 + q) * f;
            const cplx disc = std::sqrt(B * B - 4.0 * A * C);
            const cplx den1 = B + disc, den2 = B - disc;
            const cplx den = (std::abs(den1) > std::abs(den2)) ? den1 : den2;
            if (std::abs(den) == 0.0)
                throw NumericError("locate_resonances: Muller fallback stalled");
            const cplx cand = w - (w - w_mid) * 2.0 * C / den;
            w_prev = w; f_prev = f;
            w = cand; f = d1_value(g, w);
        }
    }
    std::ostringstream msg;
    msg << "locate_resonances: no convergence after " << opt.max_iterations
        << " iterations, last iterate Omega = (" << w.real() << ", " << w.imag()
        << "), |D1| = " << std::abs(f);
    throw NumericError(msg.str());
}

// Scan |D1| along the real axis around the empty-cavity guess for mode k and
// Newton-refine from the minimum.
inline cplx locate_single(const CavityGeometry& g, int k, const ResonanceOptions& opt,
                          double* out_residual) {
    if (k < 1) throw ConfigError("locate_resonances: mode index must be >= 1");
    const double guess = k * M_PI / (g.medium1.at(k * M_PI / g.l).real() * g.l);
    const double spacing = M_PI / (g.medium1.at(guess).real() * g.l);
    double best_w = guess;
    double best = std::numeric_limits<double>::infinity();
    const int n = std::max(8, opt.scan_points);
    for (int i = 0; i <= n; ++i) {
        const double w = guess + spacing * (-0.45 + 0.9 * i / n);
        if (w <= 0.0) continue;
        const double v = std::abs(d1_value(g, cplx(w, 0.0)));
        if (v < best) { best = v; best_w = w; }
    }
    const cplx root = refine_root(g, cplx(best_w, 0.0), opt, out_residual);
    if (root.imag() >= 0.0) {
        std::ostringstream msg;
        msg << "locate_resonances: root with Im Omega >= 0 at k=" << k
            << " (Omega = " << root.real() << " + " << root.imag()
            << "i); non-decaying mode indicates a bad branch or active medium";
        throw NumericError(msg.str());
    }
    return root;
}

}  // namespace detail

inline DecayRates decay_decomposition(const CouplingSet& c, const CavityGeometry& g,
                                      double omega, double gamma_total) {
    const double n1_abs = std::abs(g.medium1.at(omega));
    const double pre = 1.0 / (2.0 * n1_abs * g.l);
    DecayRates r;
    r.gamma_rad = pre * std::norm(c.T);
    r.gamma_cav = pre * std::norm(c.A_cav);
    r.gamma_plus = pre * std::norm(c.A_plus);
    r.gamma_minus = pre * std::norm(c.A_minus);
    r.gamma_abs = r.gamma_cav + r.gamma_plus + r.gamma_minus;
    r.gamma_rad_out = pre * std::norm(c.T_out);
    r.closure_residual =
        (gamma_total > 0.0)
            ? std::abs(gamma_total - r.gamma_rad - r.gamma_abs) / gamma_total
            : 0.0;
    return r;
}

// Locate modes k_min..k_max. Neighbors k_min-1 and k_max+1 are solved
// internally so every returned mode carries its (Delta_k) interval.
inline std::vector<ResonantMode> locate_resonances(const CavityGeometry& g, int k_min,
                                                   int k_max,
                                                   const ResonanceOptions& opt = {}) {
    g.validate();
    if (k_max < k_min) throw ConfigError("locate_resonances: empty k range");
    struct Root { cplx w; double res; };
    std::vector<Root> roots;
    for (int k = k_min - 1; k <= k_max + 1; ++k) {
        if (k < 1) { roots.push_back({cplx(0.0), 0.0}); continue; }
        double res = 0.0;
        const cplx w = detail::locate_single(g, k, opt, &res);
        roots.push_back({w, res});
    }
    for (std::size_t i = 1; i < roots.size(); ++i) {
        if (roots[i - 1].w == cplx(0.0)) continue;
        if (!(roots[i].w.real() > roots[i - 1].w.real()))
            throw NumericError("locate_resonances: non-monotone roots (basins collided); "
                               "refine the scan or the k range");
    }

    std::vector<ResonantMode> modes;
    for (int k = k_min; k <= k_max; ++k) {
        const std::size_t i = static_cast<std::size_t>(k - (k_min - 1));
        const cplx w = roots[i].w;
        ResonantMode m;
        m.k = k;
        m.omega = w.real();
        m.gamma = -2.0 * w.imag();
        m.residual = roots[i].res;
        const double w_lo = roots[i - 1].w == cplx(0.0) ? 0.0 : roots[i - 1].w.real();
        m.interval_lo = 0.5 * (w_lo + m.omega);
        m.interval_hi = 0.5 * (m.omega + roots[i + 1].w.real());
        m.couplings = coupling_constants(g, m.omega);
        m.rates = decay_decomposition(m.couplings, g, m.omega, m.gamma);
        m.validity_ratio = m.gamma / m.delta_omega();
        m.validity_flag = m.validity_ratio > opt.validity_threshold;
        modes.push_back(m);
    }
    std::sort(modes.begin(), modes.end(),
              [](const ResonantMode& a, const ResonantMode& b) { return a.omega < b.omega; });
    return modes;
}

// Standing-wave amplitude at position z inside the cavity layer,
// i sqrt(w_k / l) / n1(w_k) * sin(beta1(w_k) z). Vanishes at the mirror.
inline cplx mode_profile(const ResonantMode& mode, const CavityGeometry& g, double z) {
    if (z < 0.0 || z > g.l)
        throw ConfigError("mode_profile: z outside [0, l]");
    const cplx n1 = g.medium1.at(mode.omega);
    const cplx b1 = n1 * mode.omega;
    return cplx(0, 1) * std::sqrt(mode.omega / g.l) / n1 * std::sin(b1 * z);
}

}  // namespace cavio
