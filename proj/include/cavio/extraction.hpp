// Time-dependent state-extraction machinery for one resonant mode: the
// spectral filter f_k, the kernels coupling the outgoing wave packet to the
// input and noise channels, the dominant output mode and its efficiency
// eta(t), and the mode couplings chi over an orthonormal input basis.

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "cavio/quadrature.hpp"
#include "cavio/resonances.hpp"

namespace cavio {

enum class Channel { In = 0, Cav = 1, Plus = 2, Minus = 3 };
inline constexpr std::array<Channel, 4> kChannels{Channel::In, Channel::Cav, Channel::Plus,
                                                  Channel::Minus};
inline const char* channel_name(Channel c) {
    switch (c) {
        case Channel::In: return "in";
        case Channel::Cav: return "cav";
        case Channel::Plus: return "plus";
        default: return "minus";
    }
}

enum class BasisKind { Svd, Legendre, Grid };

struct ExtractionSettings {
    double t0 = 0.0;
    double t = 0.0;
    double delta_t = 0.0;     // coarse-graining time, >= 0
    int quad_order = 128;     // quadrature point count N over (Delta_k)
    int basis_size = 12;      // input basis functions per channel
    BasisKind basis = BasisKind::Svd;
    GridKind grid = GridKind::Adapted;

    double span() const { return t + delta_t - t0; }      // t + dt - t0
    double elapsed() const { return t - t0; }             // t - t0

    void validate() const {
        if (t < t0) throw ConfigError("extraction: t must be >= t0");
        if (delta_t < 0.0) throw ConfigError("extraction: delta_t must be >= 0");
        if (quad_order < 16) throw ConfigError("extraction: quad_order must be >= 16");
        if (basis_size < 1 || basis_size > quad_order)
            throw ConfigError("extraction: basis_size must be in [1, quad_order]");
    }
};

namespace detail {

// sin(z)/z with a series branch near the origin.
inline cplx csinc(cplx z) {
    if (std::abs(z) < 1e-2) {
        const cplx z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0 - z2 * z2 * z2 / 5040.0;
    }
    return std::sin(z) / z;
}

// d/dz [sin(z)/z] = (cos z - sinc z)/z
inline cplx csinc_prime(cplx z) {
    if (std::abs(z) < 1e-2) {
        const cplx z2 = z * z;
        return -z / 3.0 + z * z2 / 30.0 - z * z2 * z2 / 840.0;
    }
    return (std::cos(z) - csinc(z)) / z;
}

}  // namespace detail

// f_k(w, t) = [e^{-i(w - Omega_k^*)(t + dt - t0)} - 1] / (w - Omega_k^*)
//             * e^{i w (t - t0)}
// evaluated in the cancellation-free half-angle form. Finite for all real w
// since Gamma_k > 0 keeps the pole off the axis.
inline cplx filter_function(const ResonantMode& mode, const ExtractionSettings& s, double w) {
    const cplx u = w - std::conj(mode.Omega());
    const double span = s.span();
    const cplx z = 0.5 * u * span;
    return cplx(0, -span) * std::exp(cplx(0, -1) * z) * detail::csinc(z) *
           std::exp(cplx(0, w * s.elapsed()));
}

// d f_k / d w at fixed t.
inline cplx filter_function_derivative(const ResonantMode& mode, const ExtractionSettings& s,
                                       double w) {
    const cplx u = w - std::conj(mode.Omega());
    const double span = s.span();
    const cplx z = 0.5 * u * span;
    const cplx g = cplx(0, -span) * std::exp(cplx(0, -1) * z) * detail::csinc(z);
    const cplx gp = cplx(0, -span) * 0.5 * span * std::exp(cplx(0, -1) * z) *
                    (cplx(0, -1) * detail::csinc(z) + detail::csinc_prime(z));
    const cplx ph = std::exp(cplx(0, w * s.elapsed()));
    return gp * ph + cplx(0, s.elapsed()) * g * ph;
}

// The two-term oscillatory split f = A e^{i w (elapsed - span)} - B e^{i w elapsed}
// with smooth amplitudes A = e^{i Omega^* span}/u and B = 1/u; used by the
// Filon route for integrals of |f|^2.
struct FilterSplit {
    cplx A, B;
};
inline FilterSplit filter_function_split(const ResonantMode& mode, const ExtractionSettings& s,
                                         double w) {
    const cplx oc = std::conj(mode.Omega());
    const cplx u = w - oc;
    return {std::exp(cplx(0, 1) * oc * s.span()) / u, 1.0 / u};
}

inline cplx upsilon_prefactor(const ResonantMode& mode, const CavityGeometry& g) {
    const cplx n1c = std::conj(g.medium1.at(mode.omega));
    return 1.0 / (4.0 * M_PI * n1c * g.l);
}

// upsilon(w, w', t): the divided difference of f with the coarse-graining
// phase; the diagonal is the analytic limit, not a numerical 0/0.
inline cplx upsilon_kernel(const ResonantMode& mode, const CavityGeometry& g,
                           const ExtractionSettings& s, double w, double wp) {
    const cplx pref = upsilon_prefactor(mode, g);
    const double scale = std::max(std::abs(w), std::abs(wp));
    if (std::abs(w - wp) <= 1e-9 * scale) {
        const double m = 0.5 * (w + wp);
        return pref * (filter_function_derivative(mode, s, m) +
                       cplx(0, s.delta_t) * filter_function(mode, s, m));
    }
    const cplx fw = filter_function(mode, s, w);
    const cplx fwp = filter_function(mode, s, wp);
    const cplx ph = std::exp(cplx(0, (wp - w) * s.delta_t));
    return pref * (fw - fwp * ph) / (w - wp);
}

// F_k(w, t) = i/sqrt(2 pi) * (1/(2 n1^* l))^{1/2} * T_k^{(o)*} * f_k(w, t)
inline cplx capital_F_prefactor(const ResonantMode& mode, const CavityGeometry& g) {
    const cplx n1c = std::conj(g.medium1.at(mode.omega));
    return cplx(0, 1) / std::sqrt(2.0 * M_PI) * std::sqrt(1.0 / (2.0 * n1c * g.l)) *
           std::conj(mode.couplings.T_out);
}
inline cplx capital_F(const ResonantMode& mode, const CavityGeometry& g,
                      const ExtractionSettings& s, double w) {
    return capital_F_prefactor(mode, g) * filter_function(mode, s, w);
}

// Channel kernel coefficients: G_sigma = C_sigma * upsilon + R_sigma
// * e^{i w' (t - t0)} * delta(w - w'). The cav channel has no delta line.
struct KernelCoefficients {
    cplx smooth;  // C_sigma
    cplx delta;   // R_sigma
};
inline KernelCoefficients kernel_coefficients(const ResonantMode& mode, Channel ch) {
    const CouplingSet& c = mode.couplings;
    const cplx to = std::conj(c.T_out);
    switch (ch) {
        case Channel::In: return {to * std::conj(c.T), std::conj(c.R_out)};
        case Channel::Cav: return {to * std::conj(c.A_cav), cplx(0.0)};
        case Channel::Plus: return {to * std::conj(c.A_plus), std::conj(c.A_plus_out)};
        default: return {to * std::conj(c.A_minus), std::conj(c.A_minus_out)};
    }
}

// Pointwise kernel value: smooth part plus the weight carried by the
// delta line at w = w' (to be contracted analytically downstream).
struct KernelValue {
    cplx smooth;
    cplx delta_weight;
};
inline KernelValue kernel_G(const ResonantMode& mode, const CavityGeometry& g,
                            const ExtractionSettings& s, Channel ch, double w, double wp) {
    const KernelCoefficients kc = kernel_coefficients(mode, ch);
    return {kc.smooth * upsilon_kernel(mode, g, s, w, wp),
            kc.delta * std::exp(cplx(0, wp * s.elapsed()))};
}

// eta from Eq-style closed form: eta^2 = gamma_rad_out / (gamma_rad +
// gamma_abs) * [1 - e^{-(gamma_rad + gamma_abs)(t + dt - t0)}].
inline double eta_squared_closed_form(const ResonantMode& mode, const ExtractionSettings& s) {
    const double gsum = mode.rates.gamma_rad + mode.rates.gamma_abs;
    if (gsum <= 0.0) return 0.0;
    return mode.rates.gamma_rad_out / gsum * (1.0 - std::exp(-gsum * s.span()));
}
inline double eta_closed_form(const ResonantMode& mode, const ExtractionSettings& s) {
    return std::sqrt(eta_squared_closed_form(mode, s));
}

// Dominant output mode phi_out^(1) = F_k / eta on the quadrature grid.
//
// eta is the Filon-evaluated integral of |F|^2 over (Delta_k) (robust
// against the e^{i w t} oscillation of the filter at any t); eta_discrete
// is the plain-weight norm, and phi_out is normalized with it so that the
// discrete norm used for bases and couplings is exactly 1.
struct OutputMode {
    QuadratureGrid grid;
    std::vector<cplx> f;        // filter samples
    std::vector<cplx> phi_out;  // unit discrete norm
    double eta = 0.0;           // reported quadrature efficiency
    double eta_discrete = 0.0;
    bool has_output = false;    // false when t + dt = t0 (eta = 0)
    bool resolution_warning = false;  // plain grid with N < 16 dw/Gamma
};

inline OutputMode build_output_mode(const ResonantMode& mode, const CavityGeometry& g,
                                    const ExtractionSettings& s) {
    s.validate();
    OutputMode out{
        s.grid == GridKind::Adapted
            ? QuadratureGrid::adapted(mode.interval_lo, mode.interval_hi, mode.omega,
                                      0.5 * mode.gamma, s.quad_order)
            : QuadratureGrid::plain(mode.interval_lo, mode.interval_hi, s.quad_order),
        {}, {}, 0.0, 0.0, false, false};
    if (s.grid == GridKind::PlainGauss &&
        s.quad_order < 16.0 * mode.delta_omega() / mode.gamma)
        out.resolution_warning = true;

    const std::size_t n = out.grid.size();
    out.f.resize(n);
    std::vector<cplx> osc(n);
    double stat = 0.0;
    const double pref_f2 = std::norm(capital_F_prefactor(mode, g));
    for (std::size_t i = 0; i < n; ++i) {
        const double w = out.grid.nodes()[i];
        out.f[i] = filter_function(mode, s, w);
        const FilterSplit sp = filter_function_split(mode, s, w);
        stat += out.grid.weights()[i] * (std::norm(sp.A) + std::norm(sp.B));
        osc[i] = -2.0 * sp.A * std::conj(sp.B);
    }
    const double eta2_filon =
        pref_f2 * (stat + out.grid.integrate_oscillatory(osc, -s.span()).real());
    double eta2_disc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        eta2_disc += out.grid.weights()[i] * pref_f2 * std::norm(out.f[i]);

    if (s.span() == 0.0) return out;  // f vanishes identically: no-output marker
    // The integral can exceed 1 by the closure residual (a high-Q model
    // artifact visible for lossless mirrors at long times); the efficiency
    // contract is eta in [0, 1].
    out.eta = std::min(1.0, std::sqrt(std::max(0.0, eta2_filon)));
    out.eta_discrete = std::sqrt(eta2_disc);
    if (out.eta_discrete <= 0.0) return out;

    out.has_output = true;
    const cplx pref_F = capital_F_prefactor(mode, g);
    out.phi_out.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.phi_out[i] = pref_F * out.f[i] / out.eta_discrete;
    return out;
}

// Orthonormal input basis per channel under the discrete quadrature inner
// product <f, g> = sum_i w_i conj(f_i) g_i. Columns hold basis functions
// sampled on the nodes.
struct ModeBasis {
    BasisKind kind = BasisKind::Svd;
    int size = 0;
    bool channel_specific = false;
    Eigen::MatrixXcd shared;                      // legendre / grid
    std::array<Eigen::MatrixXcd, 4> per_channel;  // svd

    const Eigen::MatrixXcd& functions(Channel ch) const {
        return channel_specific ? per_channel[static_cast<int>(ch)] : shared;
    }
};

namespace detail {

inline void check_orthonormal(const QuadratureGrid& grid, const Eigen::MatrixXcd& funcs,
                              double tol = 1e-8) {
    const Eigen::Index k = funcs.cols();
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = a; b < k; ++b) {
            cplx s = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i)
                s += grid.weights()[i] * std::conj(funcs(i, a)) * funcs(i, b);
            const cplx expect = (a == b) ? cplx(1.0) : cplx(0.0);
            if (std::abs(s - expect) > tol)
                throw NumericError("mode_couplings: input basis not orthonormal "
                                   "under the quadrature inner product");
        }
}

// Weighted smooth+delta kernel matrix of one channel:
// K[m][j] = sqrt(w_m) C upsilon(w_m, w_j) sqrt(w_j) + delta_mj R e^{i w_j tau0}.
inline Eigen::MatrixXcd weighted_kernel(const ResonantMode& mode, const CavityGeometry& g,
                                        const ExtractionSettings& s, const QuadratureGrid& grid,
                                        const Eigen::MatrixXcd& ups, Channel ch) {
    const KernelCoefficients kc = kernel_coefficients(mode, ch);
    const Eigen::Index n = ups.rows();
    Eigen::MatrixXcd K(n, n);
    for (Eigen::Index m = 0; m < n; ++m) {
        const double sm = std::sqrt(grid.weights()[m]);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double sj = std::sqrt(grid.weights()[j]);
            cplx v = kc.smooth * sm * ups(m, j) * sj;
            if (m == j) v += kc.delta * std::exp(cplx(0, grid.nodes()[j] * s.elapsed()));
            K(m, j) = v;
        }
    }
    return K;
}

}  // namespace detail

inline Eigen::MatrixXcd upsilon_matrix(const ResonantMode& mode, const CavityGeometry& g,
                                       const ExtractionSettings& s, const QuadratureGrid& grid) {
    const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXcd ups(n, n);
    for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index j = 0; j < n; ++j)
            ups(m, j) = upsilon_kernel(mode, g, s, grid.nodes()[m], grid.nodes()[j]);
    return ups;
}

inline ModeBasis build_basis(const ResonantMode& mode, const CavityGeometry& g,
                             const ExtractionSettings& s, const QuadratureGrid& grid,
                             const Eigen::MatrixXcd& ups) {
    const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
    ModeBasis basis;
    basis.kind = s.basis;
    switch (s.basis) {
        case BasisKind::Grid: {
            basis.size = static_cast<int>(n);
            basis.shared = Eigen::MatrixXcd::Zero(n, n);
            for (Eigen::Index i = 0; i < n; ++i)
                basis.shared(i, i) = 1.0 / std::sqrt(grid.weights()[i]);
            break;
        }
        case BasisKind::Legendre: {
            basis.size = s.basis_size;
            const double lo = mode.interval_lo, hi = mode.interval_hi;
            Eigen::MatrixXcd raw(n, basis.size);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double x = 2.0 * (grid.nodes()[i] - lo) / (hi - lo) - 1.0;
                for (int j = 0; j < basis.size; ++j)
                    raw(i, j) = std::legendre(static_cast<unsigned>(j), x);
            }
            // modified Gram-Schmidt in the discrete inner product
            for (int a = 0; a < basis.size; ++a) {
                for (int b = 0; b < a; ++b) {
                    cplx ov = 0.0;
                    for (Eigen::Index i = 0; i < n; ++i)
                        ov += grid.weights()[i] * std::conj(raw(i, b)) * raw(i, a);
                    raw.col(a) -= ov * raw.col(b);
                }
                double nrm = 0.0;
                for (Eigen::Index i = 0; i < n; ++i)
                    nrm += grid.weights()[i] * std::norm(raw(i, a));
                raw.col(a) /= std::sqrt(nrm);
            }
            basis.shared = raw;
            break;
        }
        case BasisKind::Svd: {
            basis.size = s.basis_size;
            basis.channel_specific = true;
            for (Channel ch : kChannels) {
                const Eigen::MatrixXcd K = detail::weighted_kernel(mode, g, s, grid, ups, ch);
                Eigen::JacobiSVD<Eigen::MatrixXcd> svd(K, Eigen::ComputeThinV);
                Eigen::MatrixXcd funcs(n, basis.size);
                for (int j = 0; j < basis.size; ++j)
                    for (Eigen::Index i = 0; i < n; ++i)
                        funcs(i, j) = svd.matrixV()(i, j) / std::sqrt(grid.weights()[i]);
                basis.per_channel[static_cast<int>(ch)] = std::move(funcs);
            }
            break;
        }
    }
    return basis;
}

// chi and the accounting around it.
struct ExtractionResult {
    double eta = 0.0;           // Filon quadrature value of Eq-form integral
    double eta_discrete = 0.0;  // plain-weight norm (consistent with chi)
    double eta_closed = 0.0;    // closed-form cross-check value
    std::vector<double> omega;  // grid nodes
    std::vector<cplx> phi_out;  // unit discrete norm
    std::array<std::vector<cplx>, 4> chi;  // per channel, per basis index
    double sum_chi_sq = 0.0;
    double residual = 0.0;      // 1 - eta_discrete^2 - sum |chi|^2
    bool has_output = false;
    bool resolution_warning = false;

    double sum_rule_total() const { return eta_discrete * eta_discrete + sum_chi_sq; }
};

// chi_sigma^(i) = double quadrature of G_sigma(w, w') phi_out^*(w)
// phi_sigma^(i)(w'), with the delta line contracted to a single integral.
inline ExtractionResult mode_couplings(const ResonantMode& mode, const CavityGeometry& g,
                                       const ExtractionSettings& s,
                                       const ModeBasis* external_basis = nullptr) {
    const OutputMode out = build_output_mode(mode, g, s);
    ExtractionResult res;
    res.eta = out.eta;
    res.eta_discrete = out.eta_discrete;
    res.eta_closed = eta_closed_form(mode, s);
    res.omega = out.grid.nodes();
    res.has_output = out.has_output;
    res.resolution_warning = out.resolution_warning;
    if (!out.has_output) {
        res.residual = 1.0;
        return res;
    }
    res.phi_out = out.phi_out;

    const Eigen::MatrixXcd ups = upsilon_matrix(mode, g, s, out.grid);
    ModeBasis local;
    if (!external_basis) local = build_basis(mode, g, s, out.grid, ups);
    const ModeBasis& basis = external_basis ? *external_basis : local;
    if (basis.channel_specific)
        for (Channel ch : kChannels) detail::check_orthonormal(out.grid, basis.functions(ch));
    else
        detail::check_orthonormal(out.grid, basis.functions(Channel::In));

    const Eigen::Index n = ups.rows();
    // V_j = sum_m w_m phi_out^*(w_m) upsilon(w_m, w_j); shared by all channels.
    Eigen::VectorXcd V(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        cplx acc = 0.0;
        for (Eigen::Index m = 0; m < n; ++m)
            acc += out.grid.weights()[m] * std::conj(out.phi_out[m]) * ups(m, j);
        V(j) = acc;
    }
    for (Channel ch : kChannels) {
        const KernelCoefficients kc = kernel_coefficients(mode, ch);
        const Eigen::MatrixXcd& funcs = basis.functions(ch);
        auto& chiv = res.chi[static_cast<int>(ch)];
        chiv.resize(funcs.cols());
        for (Eigen::Index i = 0; i < funcs.cols(); ++i) {
            cplx acc = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double wj = out.grid.weights()[j];
                cplx amp = kc.smooth * V(j);
                amp += kc.delta * std::exp(cplx(0, out.grid.nodes()[j] * s.elapsed())) *
                       std::conj(out.phi_out[j]);
                acc += wj * amp * funcs(j, i);
            }
            chiv[i] = acc;
            res.sum_chi_sq += std::norm(acc);
        }
    }
    res.residual = 1.0 - res.eta_discrete * res.eta_discrete - res.sum_chi_sq;
    return res;
}

}  // namespace cavio
