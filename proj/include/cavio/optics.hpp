// Classical optics of the planar three-layer structure
//   perfect mirror (0) | cavity layer (1) | plate (2) | free space (3)
// at normal incidence. Natural units throughout: c = 1, so a propagation
// constant is beta_j = n_j(w) * w and rates carry units of c/l.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace cavio {

using cplx = std::complex<double>;

// Thrown on invalid or unphysical inputs (CLI maps this to exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on numeric failures such as root-finder non-convergence
// (CLI maps this to exit code 1).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Complex refractive index n(w) = n' + i n''. Either a constant or a
// tabulated dispersion curve with linear interpolation. Tables are defined
// for real frequencies only; when evaluated at complex w (resonance search)
// the index is held at the value for Re w.
class OpticalMedium {
public:
    OpticalMedium() : constant_(1.0, 0.0) {}

    explicit OpticalMedium(cplx n) : constant_(n) { check(n); }

    OpticalMedium(std::vector<double> omega, std::vector<cplx> n)
        : constant_(0.0), table_omega_(std::move(omega)), table_n_(std::move(n)) {
        if (table_omega_.size() < 2 || table_omega_.size() != table_n_.size())
            throw ConfigError("dispersion table needs >= 2 matching (omega, n) rows");
        for (std::size_t i = 1; i < table_omega_.size(); ++i)
            if (!(table_omega_[i] > table_omega_[i - 1]))
                throw ConfigError("dispersion table frequencies must be increasing");
        for (const cplx& v : table_n_) check(v);
    }

    static OpticalMedium vacuum() { return OpticalMedium(cplx(1.0, 0.0)); }

    bool tabulated() const { return !table_omega_.empty(); }

    // n at real frequency.
    cplx at(double omega) const {
        if (!tabulated()) return constant_;
        if (omega <= table_omega_.front()) return table_n_.front();
        if (omega >= table_omega_.back()) return table_n_.back();
        std::size_t hi = 1;
        while (table_omega_[hi] < omega) ++hi;
        const double t =
            (omega - table_omega_[hi - 1]) / (table_omega_[hi] - table_omega_[hi - 1]);
        return table_n_[hi - 1] + t * (table_n_[hi] - table_n_[hi - 1]);
    }

    // n at complex frequency: constant media are evaluated exactly (entire
    // in w); tables are frozen at Re w, documented as an approximation.
    cplx at(cplx omega) const {
        if (!tabulated()) return constant_;
        return at(omega.real());
    }

    bool lossless_at(double omega) const { return at(omega).imag() == 0.0; }

private:
    static void check(cplx n) {
        if (n.imag() < 0.0) throw ConfigError("passive medium requires n'' >= 0");
        if (n.real() <= 0.0) throw ConfigError("working band requires n' > 0");
    }

    cplx constant_;
    std::vector<double> table_omega_;
    std::vector<cplx> table_n_;
};

// Geometry of figure-one style stack: cavity length l (layer 1), plate
// thickness d (layer 2). Layer 3 is fixed to vacuum and the left mirror is
// perfectly reflecting (r_10 = -1).
struct CavityGeometry {
    double l = 1.0;
    double d = 0.05;
    OpticalMedium medium1;
    OpticalMedium medium2;

    void validate() const {
        if (!(l > 0.0)) throw ConfigError("geometry: l must be > 0");
        if (!(d > 0.0)) throw ConfigError("geometry: d must be > 0");
    }

    static constexpr cplx mirror_reflection() { return cplx(-1.0, 0.0); }
    static OpticalMedium medium3() { return OpticalMedium::vacuum(); }
};

struct ComplexWavenumber {
    cplx value;
};

// beta = n(w) * w / c with c = 1. Complex w is allowed (evaluation at the
// complex resonance frequencies); w with nonpositive real part is rejected.
inline ComplexWavenumber propagation_constant(const OpticalMedium& medium, cplx omega) {
    if (!(omega.real() > 0.0))
        throw ConfigError("propagation_constant: Re(omega) must be > 0");
    return ComplexWavenumber{medium.at(omega) * omega};
}

struct InterfaceCoefficients {
    cplx r;  // reflection, incident from A
    cplx t;  // transmission from A into B
};

// Single-interface Fresnel coefficients at normal incidence:
//   r_AB = (beta_A - beta_B) / (beta_A + beta_B),  t_AB = 2 beta_A / (beta_A + beta_B).
// Reciprocity t_AB * beta_B = t_BA * beta_A holds identically.
inline InterfaceCoefficients interface_coefficients(const OpticalMedium& a,
                                                    const OpticalMedium& b, cplx omega) {
    const cplx ba = propagation_constant(a, omega).value;
    const cplx bb = propagation_constant(b, omega).value;
    const cplx den = ba + bb;
    if (std::abs(den) < 1e-300)
        throw NumericError("interface_coefficients: degenerate beta_A + beta_B = 0");
    return {(ba - bb) / den, 2.0 * ba / den};
}

// Composite coefficients of the stack, built by single-layer Airy summation
// over the plate. Subscript order follows the propagation direction:
// r13 is seen from the cavity side, r31 from free space.
struct StackCoefficients {
    cplx beta1, beta2, beta3;
    cplx r12, t12, r21, t21, r23, t23, r32, t32;  // single-interface
    cplx r13, t13, r31, t31;                      // through-plate composites
    cplx D2_prime;                                // 1 - r21 r23 e^{2 i beta2 d}
    cplx phase2;                                  // e^{i beta2 d}
    cplx phase1_l;                                // e^{i beta1 l}
};

inline StackCoefficients stack_coefficients(const CavityGeometry& g, cplx omega) {
    g.validate();
    const OpticalMedium m3 = CavityGeometry::medium3();
    StackCoefficients s;
    s.beta1 = propagation_constant(g.medium1, omega).value;
    s.beta2 = propagation_constant(g.medium2, omega).value;
    s.beta3 = propagation_constant(m3, omega).value;

    const auto f12 = interface_coefficients(g.medium1, g.medium2, omega);
    const auto f21 = interface_coefficients(g.medium2, g.medium1, omega);
    const auto f23 = interface_coefficients(g.medium2, m3, omega);
    const auto f32 = interface_coefficients(m3, g.medium2, omega);
    s.r12 = f12.r; s.t12 = f12.t;
    s.r21 = f21.r; s.t21 = f21.t;
    s.r23 = f23.r; s.t23 = f23.t;
    s.r32 = f32.r; s.t32 = f32.t;

    s.phase2 = std::exp(cplx(0, 1) * s.beta2 * g.d);
    const cplx ph2 = s.phase2 * s.phase2;  // e^{2 i beta2 d}
    s.D2_prime = 1.0 - s.r21 * s.r23 * ph2;
    if (std::abs(s.D2_prime) < 1e-12)
        throw NumericError("stack_coefficients: singular Airy denominator D2'");

    s.r13 = s.r12 + s.t12 * s.t21 * s.r23 * ph2 / s.D2_prime;
    s.t13 = s.t12 * s.t23 * s.phase2 / s.D2_prime;
    s.r31 = s.r32 + s.t32 * s.t23 * s.r21 * ph2 / s.D2_prime;
    s.t31 = s.t32 * s.t21 * s.phase2 / s.D2_prime;
    s.phase1_l = std::exp(cplx(0, 1) * s.beta1 * g.l);
    return s;
}

struct SpectralDenominators {
    cplx D1;        // 1 + r13 e^{2 i beta1 l}   (r_10 = -1)
    cplx D2_prime;  // 1 - r21 r23 e^{2 i beta2 d}
};

// D1's zeros in the lower half plane are the cavity resonances.
inline SpectralDenominators spectral_denominators(const CavityGeometry& g, cplx omega) {
    const StackCoefficients s = stack_coefficients(g, omega);
    return {1.0 + s.r13 * s.phase1_l * s.phase1_l, s.D2_prime};
}

}  // namespace cavio
