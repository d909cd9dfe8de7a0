// Phase-space representation of single-mode states and the quantum-state
// channel maps: characteristic-function product formula, Wigner-function
// smoothing maps (Gaussian-reduced and general nested-quadrature routes),
// the thermal reduction, and the Schroedinger-cat generation map.
//
// Conventions: alpha = x + i p, vacuum W(alpha) = (2/pi) e^{-2|alpha|^2},
// characteristic function C(beta) = integral W(alpha) e^{beta alpha^* -
// beta^* alpha} d^2 alpha, so C(0) = 1.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "cavio/optics.hpp"

namespace cavio {

// Square phase-space grid of Wigner values. Rows hold constant p,
// x increases along a row; both axes span [-L, L] around the center.
struct WignerGrid {
    int m = 0;
    double half_extent = 0.0;
    cplx center = 0.0;
    std::vector<double> values;  // values[ip * m + ix]

    double h() const { return 2.0 * half_extent / (m - 1); }
    double x(int ix) const { return center.real() - half_extent + ix * h(); }
    double p(int ip) const { return center.imag() - half_extent + ip * h(); }
    double at(int ix, int ip) const { return values[static_cast<std::size_t>(ip) * m + ix]; }
    double& at(int ix, int ip) { return values[static_cast<std::size_t>(ip) * m + ix]; }

    double integral() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * h() * h();
    }
    double min_value() const {
        double s = std::numeric_limits<double>::infinity();
        for (double v : values) s = std::min(s, v);
        return s;
    }
    double max_abs() const {
        double s = 0.0;
        for (double v : values) s = std::max(s, std::abs(v));
        return s;
    }

    // bilinear interpolation; zero outside the grid
    double sample(cplx alpha) const {
        const double fx = (alpha.real() - (center.real() - half_extent)) / h();
        const double fp = (alpha.imag() - (center.imag() - half_extent)) / h();
        if (fx < 0.0 || fp < 0.0 || fx > m - 1 || fp > m - 1) return 0.0;
        const int ix = std::min(static_cast<int>(fx), m - 2);
        const int ip = std::min(static_cast<int>(fp), m - 2);
        const double tx = fx - ix, tp = fp - ip;
        return (1 - tx) * (1 - tp) * at(ix, ip) + tx * (1 - tp) * at(ix + 1, ip) +
               (1 - tx) * tp * at(ix, ip + 1) + tx * tp * at(ix + 1, ip + 1);
    }
};

struct GridSpec {
    int points = 257;
    double half_extent = 6.0;
    cplx center = 0.0;
    bool auto_expand = true;
};

struct NegativityMetrics {
    double min_value = 0.0;
    double negative_volume = 0.0;
};

inline NegativityMetrics negativity_metrics(const WignerGrid& g) {
    NegativityMetrics nm{std::numeric_limits<double>::infinity(), 0.0};
    for (double v : g.values) {
        nm.min_value = std::min(nm.min_value, v);
        if (v < 0.0) nm.negative_volume -= v;
    }
    nm.negative_volume *= g.h() * g.h();
    return nm;
}

// ---------------------------------------------------------------------------
// Single-mode states

enum class StateKind { Vacuum, Coherent, Thermal, SqueezedNumber, Grid };

struct StateSpec {
    StateKind kind = StateKind::Vacuum;
    cplx beta = 0.0;                 // coherent amplitude
    double nbar = 0.0;               // thermal mean photon number
    double r = 0.0;                  // squeeze parameter
    int n = 0;                       // photon number
    bool swap_squeeze_axes = false;  // alternative squeezing convention
    std::shared_ptr<const WignerGrid> grid;

    static StateSpec vacuum() { return {}; }
    static StateSpec coherent(cplx beta) {
        StateSpec s;
        s.kind = StateKind::Coherent;
        s.beta = beta;
        return s;
    }
    static StateSpec thermal(double nbar) {
        if (nbar < 0.0) throw ConfigError("thermal state: nbar must be >= 0");
        StateSpec s;
        s.kind = StateKind::Thermal;
        s.nbar = nbar;
        return s;
    }
    static StateSpec squeezed_number(double r, int n, bool swap_axes = false) {
        if (n < 0) throw ConfigError("squeezed_number state: n must be >= 0");
        StateSpec s;
        s.kind = StateKind::SqueezedNumber;
        s.r = r;
        s.n = n;
        s.swap_squeeze_axes = swap_axes;
        return s;
    }
    static StateSpec from_grid(std::shared_ptr<const WignerGrid> g) {
        const double norm = g->integral();
        if (std::abs(norm - 1.0) > 1e-3)
            throw ConfigError("grid state: Wigner grid not normalized to 1 within 1e-3");
        StateSpec s;
        s.kind = StateKind::Grid;
        s.grid = std::move(g);
        return s;
    }

    bool gaussian() const {
        return kind == StateKind::Vacuum || kind == StateKind::Coherent ||
               kind == StateKind::Thermal;
    }

    // recommended grid half-extent around the state's center
    double extent_hint() const {
        switch (kind) {
            case StateKind::Vacuum: return 1.0;
            case StateKind::Coherent: return 1.0 + std::abs(beta);
            case StateKind::Thermal: return 1.0 + std::sqrt(2.0 * nbar + 1.0);
            case StateKind::SqueezedNumber:
                return 1.0 + std::exp(std::abs(r)) * std::sqrt(2.0 * n + 1.0);
            default: return grid->half_extent;
        }
    }
    cplx center_hint() const {
        if (kind == StateKind::Coherent) return beta;
        if (kind == StateKind::Grid) return grid->center;
        return 0.0;
    }
    // smallest phase-space feature scale (for sampling-step choices)
    double feature_hint() const {
        switch (kind) {
            case StateKind::Thermal: return 0.5 * std::sqrt(2.0 * nbar + 1.0);
            case StateKind::SqueezedNumber:
                return 0.5 * std::exp(-std::abs(r)) / std::sqrt(n + 1.0);
            case StateKind::Grid: return 2.0 * grid->h();
            default: return 0.5;
        }
    }
};

namespace detail {

// L_n(4t) e^{-2t} with an underflow guard; the Gaussian always wins for
// the n in play, so past the cutoff the product is numerically zero.
inline double laguerre_gauss(int n, double t) {
    if (2.0 * t > 700.0) return 0.0;
    return std::laguerre(static_cast<unsigned>(n), 4.0 * t) * std::exp(-2.0 * t);
}

inline cplx squeeze_coords(cplx alpha, double r, bool swap) {
    const double rr = swap ? -r : r;
    return {alpha.real() * std::exp(rr), alpha.imag() * std::exp(-rr)};
}

}  // namespace detail

inline double wigner_number_state(int n, cplx alpha) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return 2.0 / M_PI * sign * detail::laguerre_gauss(n, std::norm(alpha));
}

// Pointwise Wigner value of a state.
inline double wigner_value(const StateSpec& s, cplx alpha) {
    switch (s.kind) {
        case StateKind::Vacuum:
            return 2.0 / M_PI * std::exp(-2.0 * std::norm(alpha));
        case StateKind::Coherent:
            return 2.0 / M_PI * std::exp(-2.0 * std::norm(alpha - s.beta));
        case StateKind::Thermal: {
            const double v = 2.0 * s.nbar + 1.0;
            return 2.0 / (M_PI * v) * std::exp(-2.0 * std::norm(alpha) / v);
        }
        case StateKind::SqueezedNumber:
            return wigner_number_state(s.n,
                                       detail::squeeze_coords(alpha, s.r, s.swap_squeeze_axes));
        default:
            return s.grid->sample(alpha);
    }
}

// Characteristic function of a state (Weyl-symmetric ordering).
inline cplx characteristic_value(const StateSpec& s, cplx beta) {
    switch (s.kind) {
        case StateKind::Vacuum:
            return std::exp(-0.5 * std::norm(beta));
        case StateKind::Coherent:
            return std::exp(-0.5 * std::norm(beta) + beta * std::conj(s.beta) -
                            std::conj(beta) * s.beta);
        case StateKind::Thermal:
            return std::exp(-0.5 * (2.0 * s.nbar + 1.0) * std::norm(beta));
        case StateKind::SqueezedNumber: {
            const double rr = s.swap_squeeze_axes ? -s.r : s.r;
            const cplx bt = beta * std::cosh(rr) + std::conj(beta) * std::sinh(rr);
            const double t = std::norm(bt);
            if (t > 700.0) return 0.0;
            return std::exp(-0.5 * t) * std::laguerre(static_cast<unsigned>(s.n), t);
        }
        default: {
            // Riemann Fourier transform of the stored grid
            const WignerGrid& g = *s.grid;
            cplx acc = 0.0;
            for (int ip = 0; ip < g.m; ++ip)
                for (int ix = 0; ix < g.m; ++ix) {
                    const cplx a(g.x(ix), g.p(ip));
                    acc += g.at(ix, ip) *
                           std::exp(beta * std::conj(a) - std::conj(beta) * a);
                }
            return acc * g.h() * g.h();
        }
    }
}

// Sample a state's Wigner function on a grid. Emits a note when the extent
// does not resolve the state.
inline WignerGrid wigner_of(const StateSpec& s, const GridSpec& spec,
                            std::vector<std::string>* notes = nullptr) {
    if (spec.points < 2) throw ConfigError("wigner_of: grid needs at least 2 points");
    if (notes && spec.half_extent < s.extent_hint())
        notes->push_back("grid half-extent " + std::to_string(spec.half_extent) +
                         " below the recommended " + std::to_string(s.extent_hint()));
    WignerGrid g;
    g.m = spec.points;
    g.half_extent = spec.half_extent;
    g.center = spec.center;
    g.values.assign(static_cast<std::size_t>(g.m) * g.m, 0.0);
    for (int ip = 0; ip < g.m; ++ip)
        for (int ix = 0; ix < g.m; ++ix)
            g.at(ix, ip) = wigner_value(s, cplx(g.x(ix), g.p(ip)));
    return g;
}

// ---------------------------------------------------------------------------
// Channel configuration

struct ChannelCoupling {
    std::string id;
    cplx chi = 0.0;
    StateSpec state;
};

enum class ChannelMode { Prescribed, Derived };

struct ChannelConfig {
    double eta = 1.0;
    std::vector<ChannelCoupling> couplings;
    ChannelMode mode = ChannelMode::Prescribed;

    double sum_chi_sq() const {
        double s = 0.0;
        for (const auto& c : couplings) s += std::norm(c.chi);
        return s;
    }
    void validate() const {
        if (eta < 0.0 || eta > 1.0) throw ConfigError("channels: eta must be in [0, 1]");
        if (eta * eta + sum_chi_sq() > 1.0 + 1e-8)
            throw ConfigError("channels: sum rule eta^2 + sum |chi|^2 <= 1 violated");
    }
};

// C_out(beta) = exp[-|beta|^2 (1 - eta^2 - sum|chi|^2) / 2] C_cav(eta beta)
//               prod_i C_i(chi_i beta)
inline cplx output_characteristic(const StateSpec& cavity, const ChannelConfig& ch, cplx beta) {
    ch.validate();
    const double leak = 1.0 - ch.eta * ch.eta - ch.sum_chi_sq();
    cplx c = std::exp(-0.5 * std::norm(beta) * leak) *
             characteristic_value(cavity, ch.eta * beta);
    for (const auto& cc : ch.couplings) c *= characteristic_value(cc.state, cc.chi * beta);
    return c;
}

// ---------------------------------------------------------------------------
// Wigner-function channel maps

namespace detail {

// Dense samples of W(alpha - shift) on its own lattice.
struct SampledField {
    double lo_x = 0.0, lo_p = 0.0, h = 0.0;
    int m = 0;
    std::vector<double> vals;  // vals[ix * m + ip]
    double v(int ix, int ip) const { return vals[static_cast<std::size_t>(ix) * m + ip]; }
};

inline SampledField sample_state(const StateSpec& s, cplx shift, double h_target) {
    SampledField f;
    // grid states with no displacement are taken on their stored lattice
    // verbatim, so downstream quadrature introduces no resampling error
    if (s.kind == StateKind::Grid && shift == cplx(0.0)) {
        const WignerGrid& g = *s.grid;
        f.h = g.h();
        f.m = g.m;
        f.lo_x = g.center.real() - g.half_extent;
        f.lo_p = g.center.imag() - g.half_extent;
        f.vals.resize(static_cast<std::size_t>(g.m) * g.m);
        for (int ix = 0; ix < g.m; ++ix)
            for (int ip = 0; ip < g.m; ++ip)
                f.vals[static_cast<std::size_t>(ix) * g.m + ip] = g.at(ix, ip);
        return f;
    }
    const cplx c = s.center_hint() + shift;
    const double ext = s.extent_hint() + 3.0;
    double h = std::min(0.5 * s.feature_hint(), h_target);
    int m = static_cast<int>(std::ceil(2.0 * ext / h)) + 1;
    if (m > 1401) { m = 1401; h = 2.0 * ext / (m - 1); }
    f.h = h;
    f.m = m;
    f.lo_x = c.real() - ext;
    f.lo_p = c.imag() - ext;
    f.vals.resize(static_cast<std::size_t>(m) * m);
    for (int ix = 0; ix < m; ++ix)
        for (int ip = 0; ip < m; ++ip)
            f.vals[static_cast<std::size_t>(ix) * m + ip] =
                wigner_value(s, cplx(f.lo_x + ix * h, f.lo_p + ip * h) - shift);
    return f;
}

// W_out(alpha) = 2/(pi S) * integral W_in(a') exp(-2 |eta a' - (alpha - mu)|^2 / S),
// evaluated exactly as the Riemann sum over the input lattice, reorganized
// into two separable passes.
inline WignerGrid smooth_scaled(const SampledField& in, double eta, double S, cplx mu,
                                const GridSpec& spec) {
    WignerGrid out;
    out.m = spec.points;
    out.half_extent = spec.half_extent;
    out.center = spec.center;
    out.values.assign(static_cast<std::size_t>(out.m) * out.m, 0.0);

    const int M = out.m, Mi = in.m;
    std::vector<double> tx(static_cast<std::size_t>(M) * Mi), tp(tx.size());
    for (int q = 0; q < M; ++q) {
        const double xq = out.x(q) - mu.real();
        const double pq = out.p(q) - mu.imag();
        for (int i = 0; i < Mi; ++i) {
            const double dx = eta * (in.lo_x + i * in.h) - xq;
            const double dp = eta * (in.lo_p + i * in.h) - pq;
            tx[static_cast<std::size_t>(q) * Mi + i] = std::exp(-2.0 * dx * dx / S);
            tp[static_cast<std::size_t>(q) * Mi + i] = std::exp(-2.0 * dp * dp / S);
        }
    }
    // tmp[q][jp] = sum_i tx[q][i] * in[i][jp]
    std::vector<double> tmp(static_cast<std::size_t>(M) * Mi, 0.0);
    for (int q = 0; q < M; ++q)
        for (int i = 0; i < Mi; ++i) {
            const double t = tx[static_cast<std::size_t>(q) * Mi + i];
            if (t < 1e-14) continue;
            const double* row = &in.vals[static_cast<std::size_t>(i) * Mi];
            double* dst = &tmp[static_cast<std::size_t>(q) * Mi];
            for (int jp = 0; jp < Mi; ++jp) dst[jp] += t * row[jp];
        }
    const double pref = 2.0 / (M_PI * S) * in.h * in.h;
    for (int q = 0; q < M; ++q)
        for (int rr = 0; rr < M; ++rr) {
            double acc = 0.0;
            const double* trow = &tp[static_cast<std::size_t>(rr) * Mi];
            const double* srow = &tmp[static_cast<std::size_t>(q) * Mi];
            for (int jp = 0; jp < Mi; ++jp) acc += trow[jp] * srow[jp];
            out.at(q, rr) = pref * acc;
        }
    return out;
}

inline bool boundary_mass_high(const WignerGrid& g, double rel = 1e-5) {
    const double cut = rel * std::max(g.max_abs(), 1e-30);
    const int b = 3;
    for (int ip = 0; ip < g.m; ++ip)
        for (int ix = 0; ix < g.m; ++ix) {
            if (ix >= b && ix < g.m - b && ip >= b && ip < g.m - b) continue;
            if (std::abs(g.at(ix, ip)) > cut) return true;
        }
    return false;
}

// Degenerate noise variance (eta = 1 with no noise): the kernel is a delta
// and the map is a pure rescaling W_out(a) = W_cav((a - mu)/eta) / eta^2.
inline WignerGrid rescale_only(const StateSpec& cavity, double eta, cplx mu,
                               const GridSpec& spec) {
    WignerGrid out;
    out.m = spec.points;
    out.half_extent = spec.half_extent;
    out.center = spec.center;
    out.values.assign(static_cast<std::size_t>(out.m) * out.m, 0.0);
    for (int ip = 0; ip < out.m; ++ip)
        for (int ix = 0; ix < out.m; ++ix)
            out.at(ix, ip) =
                wigner_value(cavity, (cplx(out.x(ix), out.p(ip)) - mu) / eta) / (eta * eta);
    return out;
}

// Correlation of a smoothed field with a channel state:
// out(a) = sum_z h_z^2 W_ch(z) field(a - chi z). The field carries all
// prefactors already; it is smooth on the noise scale, so bilinear sampling
// off its lattice is benign.
inline void correlate_channel(const WignerGrid& field, const ChannelCoupling& cc,
                              double h_target, WignerGrid& out) {
    const SampledField zf = sample_state(cc.state, 0.0, h_target);
    for (int ip = 0; ip < out.m; ++ip)
        for (int ix = 0; ix < out.m; ++ix) {
            const cplx a(out.x(ix), out.p(ip));
            double acc = 0.0;
            for (int i = 0; i < zf.m; ++i)
                for (int j = 0; j < zf.m; ++j) {
                    const double w = zf.v(i, j);
                    if (w == 0.0) continue;
                    acc += w * field.sample(a - cc.chi * cplx(zf.lo_x + i * zf.h,
                                                              zf.lo_p + j * zf.h));
                }
            out.at(ix, ip) = acc * zf.h * zf.h;
        }
}

}  // namespace detail

// Direct implementation of the all-thermal reduction: a single Gaussian
// smoothing with scale eta and variance parameter S = 1 - eta^2 + noise_sum,
// evaluated as a plain windowed double sum (kept independent of the
// Gaussian-reduction path of output_wigner).
inline WignerGrid thermal_output_wigner(const StateSpec& cavity, double eta, double noise_sum,
                                        const GridSpec& spec) {
    if (noise_sum < 0.0) throw ConfigError("thermal_output_wigner: noise_sum must be >= 0");
    if (eta < 0.0 || eta > 1.0) throw ConfigError("thermal_output_wigner: eta must be in [0, 1]");
    const double S = 1.0 - eta * eta + noise_sum;
    if (S < 1e-12) return detail::rescale_only(cavity, eta, 0.0, spec);
    const double sigma = 0.5 * std::sqrt(S);
    WignerGrid out;
    out.m = spec.points;
    out.half_extent = spec.half_extent;
    out.center = spec.center;
    out.values.assign(static_cast<std::size_t>(out.m) * out.m, 0.0);
    const double out_h = 2.0 * spec.half_extent / (spec.points - 1);
    const detail::SampledField in =
        detail::sample_state(cavity, 0.0, 0.5 * std::min(sigma, out_h));
    const double pref = 2.0 / (M_PI * S) * in.h * in.h;
    for (int ip = 0; ip < out.m; ++ip)
        for (int ix = 0; ix < out.m; ++ix) {
            const double ax = out.x(ix), ap = out.p(ip);
            double acc = 0.0;
            for (int i = 0; i < in.m; ++i) {
                const double dx = eta * (in.lo_x + i * in.h) - ax;
                if (std::abs(dx) > 7.0 * sigma) continue;
                const double ex = std::exp(-2.0 * dx * dx / S);
                for (int j = 0; j < in.m; ++j) {
                    const double dp = eta * (in.lo_p + j * in.h) - ap;
                    if (std::abs(dp) > 7.0 * sigma) continue;
                    acc += in.v(i, j) * ex * std::exp(-2.0 * dp * dp / S);
                }
            }
            out.at(ix, ip) = pref * acc;
        }
    return out;
}

struct OutputWignerOptions {
    bool force_general = false;  // route Gaussian channels through the nested path
};

// Full channel map between Wigner functions. All-Gaussian channel states
// reduce analytically to one smoothing with S = 1 - eta^2 + 2 sum nbar|chi|^2
// and displacement mu = sum chi_i beta_i; otherwise the remaining (at most
// two) general channels are folded in by nested quadrature. The nested path
// costs O(M^2 Mi^2) and is meant for modest grids.
inline WignerGrid output_wigner(const StateSpec& cavity, const ChannelConfig& ch,
                                const GridSpec& spec_in, OutputWignerOptions opts = {},
                                std::vector<std::string>* notes = nullptr) {
    ch.validate();
    const double eta = ch.eta;
    double S = 1.0 - eta * eta - ch.sum_chi_sq();  // bare vacuum-noise variance
    cplx mu = 0.0;
    std::vector<const ChannelCoupling*> general;
    for (const auto& cc : ch.couplings) {
        if (cc.state.gaussian() && !opts.force_general) {
            const double v =
                (cc.state.kind == StateKind::Thermal) ? 2.0 * cc.state.nbar + 1.0 : 1.0;
            S += std::norm(cc.chi) * v;
            if (cc.state.kind == StateKind::Coherent) mu += cc.chi * cc.state.beta;
        } else {
            general.push_back(&cc);
        }
    }
    if (general.size() > 2)
        throw ConfigError("output_wigner: at most 2 non-Gaussian channels supported");
    if (S <= 0.0) throw NumericError("output_wigner: degenerate noise variance S <= 0");

    GridSpec spec = spec_in;
    if (spec.auto_expand) {
        const double need = eta * (cavity.extent_hint() + std::abs(cavity.center_hint())) +
                            std::abs(mu) + 3.0 * std::sqrt(S) + 1.0;
        if (spec.half_extent < need) {
            spec.half_extent = need;
            if (notes)
                notes->push_back("grid half-extent auto-expanded to " + std::to_string(need));
        }
    }
    const double sigma = 0.5 * std::sqrt(S);
    const double out_h = 2.0 * spec.half_extent / (spec.points - 1);

    if (general.empty()) {
        const detail::SampledField in = detail::sample_state(cavity, 0.0, sigma, out_h);
        WignerGrid out = detail::smooth_scaled(in, eta, S, mu, spec);
        if (notes && detail::boundary_mass_high(out))
            notes->push_back("significant Wigner mass within 3 cells of the grid boundary");
        return out;
    }

    // Nested route: W_out(a) = 2/(pi S) sum_{a'} W_cav(a') T(eta a' - (a - mu)) h^2
    // with T the chain of channel integrals T(y) = int W_ch(z) e^{-2|y + chi z|^2 / S}.
    const double ext_u = eta * (cavity.extent_hint() + std::abs(cavity.center_hint())) +
                         spec.half_extent + std::abs(spec.center) + std::abs(mu) + 1.0;
    const double hu = std::max(std::min(sigma / 2.0, out_h), 2.0 * ext_u / 1000.0);
    const int mu_n = static_cast<int>(std::ceil(2.0 * ext_u / hu)) + 1;
    detail::SampledField T;
    T.h = hu;
    T.m = mu_n;
    T.lo_x = -ext_u;
    T.lo_p = -ext_u;
    T.vals.assign(static_cast<std::size_t>(mu_n) * mu_n, 0.0);
    {
        const ChannelCoupling& cc = *general[0];
        const double chi_ext = std::abs(cc.chi) * (cc.state.extent_hint() +
                                                   std::abs(cc.state.center_hint()));
        const detail::SampledField zf =
            detail::sample_state(cc.state, 0.0, sigma / std::max(std::abs(cc.chi), 1e-6), hu);
        for (int a = 0; a < mu_n; ++a)
            for (int b = 0; b < mu_n; ++b) {
                const double yx = T.lo_x + a * hu, yp = T.lo_p + b * hu;
                if (std::hypot(yx, yp) > chi_ext + 6.0 * sigma + 1.0) continue;
                double acc = 0.0;
                for (int i = 0; i < zf.m; ++i) {
                    const double zx = zf.lo_x + i * zf.h;
                    const double dx = yx + cc.chi.real() * zx;
                    for (int j = 0; j < zf.m; ++j) {
                        const double zp = zf.lo_p + j * zf.h;
                        const double ddx = dx - cc.chi.imag() * zp;
                        const double ddp = yp + cc.chi.real() * zp + cc.chi.imag() * zx;
                        const double r2 = ddx * ddx + ddp * ddp;
                        if (r2 > 36.0 * sigma * sigma) continue;
                        acc += zf.v(i, j) * std::exp(-2.0 * r2 / S);
                    }
                }
                T.vals[static_cast<std::size_t>(a) * mu_n + b] = acc * zf.h * zf.h;
            }
    }
    if (general.size() == 2) {
        const ChannelCoupling& cc = *general[1];
        const detail::SampledField zf =
            detail::sample_state(cc.state, 0.0, sigma / std::max(std::abs(cc.chi), 1e-6), hu);
        detail::SampledField T2 = T;
        std::fill(T2.vals.begin(), T2.vals.end(), 0.0);
        WignerGrid tgrid;  // adapter for bilinear sampling of T
        tgrid.m = T.m;
        tgrid.half_extent = ext_u;
        tgrid.center = 0.0;
        tgrid.values.assign(T.vals.size(), 0.0);
        for (int a = 0; a < T.m; ++a)
            for (int b = 0; b < T.m; ++b) tgrid.at(a, b) = T.v(a, b);
        for (int a = 0; a < mu_n; ++a)
            for (int b = 0; b < mu_n; ++b) {
                const double yx = T.lo_x + a * hu, yp = T.lo_p + b * hu;
                double acc = 0.0;
                for (int i = 0; i < zf.m; ++i) {
                    const double zx = zf.lo_x + i * zf.h;
                    for (int j = 0; j < zf.m; ++j) {
                        const double zp = zf.lo_p + j * zf.h;
                        const cplx y2 = cplx(yx, yp) + cc.chi * cplx(zx, zp);
                        acc += zf.v(i, j) * tgrid.sample(y2);
                    }
                }
                T2.vals[static_cast<std::size_t>(a) * mu_n + b] = acc * zf.h * zf.h;
            }
        T = std::move(T2);
    }

    WignerGrid tgrid;
    tgrid.m = T.m;
    tgrid.half_extent = ext_u;
    tgrid.center = 0.0;
    tgrid.values.assign(T.vals.size(), 0.0);
    for (int a = 0; a < T.m; ++a)
        for (int b = 0; b < T.m; ++b) tgrid.at(a, b) = T.v(a, b);

    const detail::SampledField in = detail::sample_state(cavity, 0.0, sigma, out_h);
    WignerGrid out;
    out.m = spec.points;
    out.half_extent = spec.half_extent;
    out.center = spec.center;
    out.values.assign(static_cast<std::size_t>(out.m) * out.m, 0.0);
    const double pref = 2.0 / (M_PI * S) * in.h * in.h;
    for (int ip = 0; ip < out.m; ++ip)
        for (int ix = 0; ix < out.m; ++ix) {
            const cplx a(out.x(ix) - mu.real(), out.p(ip) - mu.imag());
            double acc = 0.0;
            for (int i = 0; i < in.m; ++i)
                for (int j = 0; j < in.m; ++j) {
                    const double w = in.v(i, j);
                    if (w == 0.0) continue;
                    const cplx u = eta * cplx(in.lo_x + i * in.h, in.lo_p + j * in.h) - a;
                    acc += w * tgrid.sample(u);
                }
            out.at(ix, ip) = pref * acc;
        }
    if (notes && detail::boundary_mass_high(out))
        notes->push_back("significant Wigner mass within 3 cells of the grid boundary");
    return out;
}

// Schroedinger-cat generation map: Gaussian smoothing with
// S = 1 - eta^2 + noise and the cavity Wigner function taken at the
// displaced argument a' - (beta chi_in / eta)(1 - i).
inline WignerGrid cat_output_wigner(const StateSpec& cavity, double eta, cplx chi_in, cplx beta,
                                    double noise, const GridSpec& spec,
                                    std::vector<std::string>* notes = nullptr) {
    if (eta <= 0.0) throw ConfigError("cat_output_wigner: eta must be > 0");
    if (noise < 0.0) throw ConfigError("cat_output_wigner: noise must be >= 0");
    const double S = 1.0 - eta * eta + noise;
    if (S <= 0.0) throw NumericError("cat_output_wigner: degenerate S <= 0");
    const cplx displacement = beta * chi_in / eta * cplx(1.0, -1.0);
    const double sigma = 0.5 * std::sqrt(S);
    const double out_h = 2.0 * spec.half_extent / (spec.points - 1);
    const detail::SampledField in = detail::sample_state(cavity, displacement, sigma, out_h);
    WignerGrid out = detail::smooth_scaled(in, eta, S, 0.0, spec);
    if (notes && detail::boundary_mass_high(out))
        notes->push_back("significant Wigner mass within 3 cells of the grid boundary");
    return out;
}

// eta^2 / (1 - eta^2 + noise_sum); large values mean near-faithful
// extraction. +infinity when the denominator vanishes.
inline double fidelity_condition(double eta, double noise_sum) {
    const double den = 1.0 - eta * eta + noise_sum;
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return eta * eta / den;
}

}  // namespace cavio
