#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "cavio/optics.hpp"

using namespace cavio;

namespace {

// Independent oracle: characteristic-matrix (transfer-matrix) reflect and
// transmit through the plate, incident from n0 into nN.
void tmm_plate(cplx n0, cplx n2, cplx nN, double d, double w, cplx* r, cplx* t) {
    const cplx delta = n2 * w * d;
    const cplx m00 = std::cos(delta), m01 = cplx(0, -1) * std::sin(delta) / n2;
    const cplx m10 = cplx(0, -1) * n2 * std::sin(delta), m11 = std::cos(delta);
    const cplx A = m00 + m01 * nN;
    const cplx B = m10 + m11 * nN;
    *r = (n0 * A - B) / (n0 * A + B);
    *t = 2.0 * n0 / (n0 * A + B);
}

CavityGeometry make_geom(cplx n1, cplx n2, double l = 1.0, double d = 0.05) {
    CavityGeometry g;
    g.l = l;
    g.d = d;
    g.medium1 = OpticalMedium(n1);
    g.medium2 = OpticalMedium(n2);
    return g;
}

}  // namespace

TEST_SUITE_BEGIN("optics");

TEST_CASE("propagation constant") {
    CHECK(propagation_constant(OpticalMedium(cplx(1.5, 0)), cplx(2.0, 0)).value ==
          cplx(3.0, 0));
    CHECK(propagation_constant(OpticalMedium::vacuum(), cplx(0.7, 0)).value == cplx(0.7, 0));
    const cplx b = propagation_constant(OpticalMedium(cplx(1.5, 0.1)), cplx(1.0, 0)).value;
    CHECK(b.real() == doctest::Approx(1.5));
    CHECK(b.imag() == doctest::Approx(0.1));
    CHECK_THROWS_AS(propagation_constant(OpticalMedium::vacuum(), cplx(-1.0, 0)), ConfigError);
    CHECK_THROWS_AS(propagation_constant(OpticalMedium::vacuum(), cplx(0.0, 0)), ConfigError);
}

TEST_CASE("medium validation and dispersion tables") {
    CHECK_THROWS_AS(OpticalMedium(cplx(1.0, -0.1)), ConfigError);
    CHECK_THROWS_AS(OpticalMedium(cplx(-1.0, 0.0)), ConfigError);
    OpticalMedium tab({1.0, 2.0, 3.0}, {cplx(1.5, 0), cplx(1.6, 0.01), cplx(1.7, 0.02)});
    CHECK(tab.at(1.5).real() == doctest::Approx(1.55));
    CHECK(tab.at(2.5).imag() == doctest::Approx(0.015));
    CHECK(tab.at(0.5) == cplx(1.5, 0));  // clamped below the table
    CHECK(tab.at(9.0).real() == doctest::Approx(1.7));
    // complex omega freezes the table at Re(omega)
    CHECK(tab.at(cplx(2.0, -0.3)) == tab.at(2.0));
}

TEST_CASE("interface coefficients") {
    const OpticalMedium a(cplx(1.3, 0.0));
    CHECK(interface_coefficients(a, a, cplx(1.0, 0)).r == cplx(0.0));
    CHECK(interface_coefficients(a, a, cplx(1.0, 0)).t == cplx(1.0));

    const auto f = interface_coefficients(OpticalMedium::vacuum(), OpticalMedium(cplx(1.5, 0)),
                                          cplx(1.0, 0));
    CHECK(f.r.real() == doctest::Approx(-0.2));
    CHECK(f.t.real() == doctest::Approx(0.8));
    // power conservation |r|^2 + (n_B/n_A)|t|^2 = 1
    CHECK(std::norm(f.r) + 1.5 * std::norm(f.t) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("interface reciprocity t_AB beta_B = t_BA beta_A") {
    const std::vector<cplx> media{{1.0, 0.0}, {1.5, 0.02}, {2.5, 0.3}, {0.7, 0.0}};
    const cplx w(1.7, 0.0);
    for (const cplx& na : media)
        for (const cplx& nb : media) {
            const OpticalMedium ma(na), mb(nb);
            const cplx tab = interface_coefficients(ma, mb, w).t;
            const cplx tba = interface_coefficients(mb, ma, w).t;
            const cplx lhs = tab * propagation_constant(mb, w).value;
            const cplx rhs = tba * propagation_constant(ma, w).value;
            CHECK(std::abs(lhs - rhs) < 1e-14 * std::abs(lhs + rhs));
        }
}

TEST_CASE("stack coefficients: vanishing plate reduces to the bare interface") {
    const CavityGeometry g = make_geom(cplx(1.2, 0.0), cplx(2.0, 0.1), 1.0, 1e-13);
    const auto s = stack_coefficients(g, cplx(5.0, 0));
    const auto direct =
        interface_coefficients(g.medium1, CavityGeometry::medium3(), cplx(5.0, 0));
    CHECK(std::abs(s.r13 - direct.r) < 1e-10);
    CHECK(std::abs(s.t13 - direct.t) < 1e-10);
}

TEST_CASE("stack coefficients: index-matched plate has no 2|3 interface") {
    const CavityGeometry g = make_geom(cplx(1.5, 0.0), cplx(1.0, 0.0));
    const auto s = stack_coefficients(g, cplx(3.0, 0));
    CHECK(s.r23 == cplx(0.0));
    CHECK(s.t23 == cplx(1.0));
}

TEST_CASE("stack coefficients: lossless power conservation") {
    for (double w : {3.0, 17.0, 31.4}) {
        const CavityGeometry g = make_geom(cplx(1.4, 0.0), cplx(1.5, 0.0));
        const auto s = stack_coefficients(g, cplx(w, 0));
        const double balance = std::norm(s.r31) + 1.4 * std::norm(s.t31);
        CHECK(balance == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("stack coefficients match the transfer-matrix oracle") {
    for (const cplx n2 : {cplx(1.5, 1e-3), cplx(120.0, 1e-4), cplx(2.2, 0.4)}) {
        const CavityGeometry g = make_geom(cplx(1.0, 0.0), n2, 1.0, 0.05);
        for (double w : {1.0, 10.0, 31.0}) {
            const auto s = stack_coefficients(g, cplx(w, 0));
            cplx r31, t31, r13, t13;
            tmm_plate(cplx(1, 0), n2, g.medium1.at(w), g.d, w, &r31, &t31);
            tmm_plate(g.medium1.at(w), n2, cplx(1, 0), g.d, w, &r13, &t13);
            CHECK(std::abs(s.r31 - r31) < 1e-13);
            CHECK(std::abs(s.t31 - t31) < 1e-13);
            CHECK(std::abs(s.r13 - r13) < 1e-13);
            CHECK(std::abs(s.t13 - t13) < 1e-13);
        }
    }
}

TEST_CASE("composite reciprocity and |r| <= 1 on the real axis") {
    const CavityGeometry g = make_geom(cplx(1.2, 0.01), cplx(1.8, 0.05));
    for (double w = 0.5; w < 40.0; w += 1.37) {
        const auto s = stack_coefficients(g, cplx(w, 0));
        CHECK(std::abs(s.t13 * s.beta3 - s.t31 * s.beta1) <
              1e-13 * std::abs(s.t13 * s.beta3));
        CHECK(std::abs(s.r13) <= 1.0 + 1e-12);
        CHECK(std::abs(s.r31) <= 1.0 + 1e-12);
        CHECK(std::abs(s.r12) <= 1.0 + 1e-12);
    }
}

TEST_CASE("stack coefficients are smooth in omega and d") {
    const CavityGeometry g = make_geom(cplx(1.0, 0.0), cplx(1.5, 1e-3));
    const double w0 = 31.0, h = 1e-4;
    auto r13_at = [&](double w, double d) {
        CavityGeometry gg = g;
        gg.d = d;
        return stack_coefficients(gg, cplx(w, 0)).r13;
    };
    const cplx second_w =
        r13_at(w0 + h, 0.05) - 2.0 * r13_at(w0, 0.05) + r13_at(w0 - h, 0.05);
    CHECK(std::abs(second_w) < 1e-5);
    const cplx second_d =
        r13_at(w0, 0.05 + h) - 2.0 * r13_at(w0, 0.05) + r13_at(w0, 0.05 - h);
    CHECK(std::abs(second_d) < 1e-3);
}

TEST_CASE("spectral denominators") {
    // index-matched everywhere: r13 = 0 so D1 = 1 exactly
    const CavityGeometry match = make_geom(cplx(1.0, 0.0), cplx(1.0, 0.0));
    CHECK(spectral_denominators(match, cplx(7.0, 0)).D1 == cplx(1.0));

    // lossless: |D2'| >= 1 - |r21 r23|
    const CavityGeometry g = make_geom(cplx(1.0, 0.0), cplx(1.5, 0.0));
    for (double w = 1.0; w < 60.0; w += 3.1) {
        const auto s = stack_coefficients(g, cplx(w, 0));
        CHECK(std::abs(s.D2_prime) >= 1.0 - std::abs(s.r21 * s.r23) - 1e-12);
    }
}

TEST_SUITE_END();
