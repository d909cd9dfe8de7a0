// Quadrature over the mode interval (Delta_k).
//
// Two grid kinds:
//   - plain: one Gauss-Legendre panel over the whole interval. Fine for
//     broad resonances; warns when N < 16 * delta_omega / Gamma.
//   - adapted: composite Gauss-Legendre cascade whose panels shrink
//     geometrically toward the resonance so the Lorentzian core is always
//     resolved. N/8 panels of 8 points each; the two central panels have
//     half-width 3 * (Gamma/2) and each side's ratio is solved so the
//     cascade lands exactly on the interval edge.
//
// Integrals of oscillatory integrands A(w) e^{i freq w} (the long-time
// filter phases, unresolvable by any static 128-point polynomial rule) are
// evaluated with Filon-type panel moments: project A onto Legendre
// polynomials per panel and use int_{-1}^{1} P_j(s) e^{i theta s} ds
// = 2 i^j j_j(theta).

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "cavio/optics.hpp"

namespace cavio {

enum class GridKind { Adapted, PlainGauss };

struct Panel {
    double mid;
    double half;
};

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_p.
inline void gauss_legendre(int p, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(p, 0.0);
    weights.assign(p, 0.0);
    for (int i = 0; i < (p + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (p + 0.5));
        double pd = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= p; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pd = p * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pd;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[p - 1 - i] = x;
        weights[i] = weights[p - 1 - i] = 2.0 / ((1.0 - x * x) * pd * pd);
    }
    if (p % 2 == 1) {
        // central node of odd rules sits at 0 exactly
        nodes[p / 2] = 0.0;
    }
}

class QuadratureGrid {
public:
    // One Gauss-Legendre panel of order n over [lo, hi].
    static QuadratureGrid plain(double lo, double hi, int n) {
        QuadratureGrid q;
        q.kind_ = GridKind::PlainGauss;
        q.order_ = n;
        gauss_legendre(n, q.ref_nodes_, q.ref_weights_);
        q.add_panel(lo, hi);
        q.finish();
        return q;
    }

    // Lorentzian-adapted cascade centered on (center, half-width a).
    static QuadratureGrid adapted(double lo, double hi, double center, double a, int n_total,
                                  int per_panel = 8) {
        if (!(lo < center && center < hi))
            throw ConfigError("quadrature: resonance must sit inside the interval");
        QuadratureGrid q;
        q.kind_ = GridKind::Adapted;
        q.order_ = per_panel;
        gauss_legendre(per_panel, q.ref_nodes_, q.ref_weights_);

        const int npan = std::max(6, n_total / per_panel);
        const double c = std::min(3.0 * a, 0.25 * std::min(center - lo, hi - center));
        int side = (npan - 2) / 2;
        const int extra = (npan - 2) - 2 * side;
        const int m_left = side;
        const int m_right = side + extra;
        const double rl = std::pow((center - lo) / c, 1.0 / m_left);
        const double rr = std::pow((hi - center) / c, 1.0 / m_right);

        std::vector<double> bounds;
        bounds.push_back(lo);
        for (int i = m_left - 1; i >= 1; --i) bounds.push_back(center - c * std::pow(rl, i));
        bounds.push_back(center - c);
        bounds.push_back(center);
        bounds.push_back(center + c);
        for (int i = 1; i <= m_right - 1; ++i) bounds.push_back(center + c * std::pow(rr, i));
        bounds.push_back(hi);
        for (std::size_t i = 1; i < bounds.size(); ++i) q.add_panel(bounds[i - 1], bounds[i]);
        q.finish();
        return q;
    }

    GridKind kind() const { return kind_; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<Panel>& panels() const { return panels_; }
    int panel_order() const { return order_; }

    double integrate(const std::vector<double>& samples) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * samples[i];
        return s;
    }

    cplx integrate(const std::vector<cplx>& samples) const {
        cplx s = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * samples[i];
        return s;
    }

    // Filon evaluation of  int A(w) e^{i freq w} dw  from samples of the
    // smooth amplitude A on the grid nodes.
    cplx integrate_oscillatory(const std::vector<cplx>& amplitude, double freq) const {
        const int p = order_;
        cplx total = 0.0;
        std::vector<cplx> coeff(p);
        for (std::size_t ip = 0; ip < panels_.size(); ++ip) {
            const Panel& pan = panels_[ip];
            for (int j = 0; j < p; ++j) {
                cplx c = 0.0;
                for (int q = 0; q < p; ++q) c += proj_[j * p + q] * amplitude[ip * p + q];
                coeff[j] = c;
            }
            const double theta = freq * pan.half;
            cplx sum = 0.0;
            for (int j = 0; j < p; ++j) sum += coeff[j] * legendre_moment(j, theta);
            total += pan.half * std::exp(cplx(0, freq * pan.mid)) * sum;
        }
        return total;
    }

    // Spherical Bessel j_n for the moment formula. The library routine is
    // used for small arguments; for large x (where libstdc++ refuses) the
    // upward recurrence from the elementary j_0, j_1 is stable since n << x.
    static double sph_bessel_j(int n, double x) {
        if (x < 20.0) return std::sph_bessel(static_cast<unsigned>(n), x);
        double jm = std::sin(x) / x;
        if (n == 0) return jm;
        double j = jm / x - std::cos(x) / x;
        for (int k = 1; k < n; ++k) {
            const double jn = (2.0 * k + 1.0) / x * j - jm;
            jm = j;
            j = jn;
        }
        return j;
    }

    // int_{-1}^{1} P_j(s) e^{i theta s} ds = 2 i^j j_j(theta)
    static cplx legendre_moment(int j, double theta) {
        double jj = sph_bessel_j(j, std::abs(theta));
        if (theta < 0.0 && (j % 2 == 1)) jj = -jj;
        static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        return 2.0 * ipow[j % 4] * jj;
    }

private:
    void add_panel(double a, double b) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        panels_.push_back({mid, half});
        for (int i = 0; i < order_; ++i) {
            nodes_.push_back(mid + half * ref_nodes_[i]);
            weights_.push_back(half * ref_weights_[i]);
        }
    }

    // Per-panel Legendre projection: c_j = (2j+1)/2 * sum_q w_q P_j(s_q) A_q.
    void finish() {
        const int p = order_;
        proj_.assign(static_cast<std::size_t>(p) * p, 0.0);
        for (int j = 0; j < p; ++j)
            for (int q = 0; q < p; ++q)
                proj_[j * p + q] = 0.5 * (2.0 * j + 1.0) * ref_weights_[q] *
                                   std::legendre(static_cast<unsigned>(j), ref_nodes_[q]);
    }

    GridKind kind_ = GridKind::Adapted;
    int order_ = 8;
    std::vector<double> nodes_, weights_;
    std::vector<Panel> panels_;
    std::vector<double> ref_nodes_, ref_weights_;
    std::vector<double> proj_;
};

}  // namespace cavio
