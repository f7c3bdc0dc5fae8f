#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fidkit/numerics.hpp"

#include <cmath>
#include <functional>
#include <vector>

using namespace fidkit::num;

namespace {

// Maclaurin series for erf, independent of the erfc-based implementation.
double erf_series(double x) {
    double term = x;
    double sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x * x / n;
        double add = term / (2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum * 2.0 / std::sqrt(M_PI);
}

double oracle_normal_cdf(double z) { return 0.5 + 0.5 * erf_series(z * M_SQRT1_2); }

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double oracle_k0(double w) {
    double zmax = std::acosh(1.0 + 45.0 / w);
    return simpson([w](double z) { return std::exp(-w * std::cosh(z)); }, 0.0, zmax, 20000);
}

double gamma_log_density(double x, double shape, double rate) {
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace

TEST_CASE("standard normal cdf") {
    CHECK(std_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(std_normal_cdf(1.6448536) - 0.95) < 1e-7);
    CHECK(std::abs(std_normal_cdf(1.6448536) - oracle_normal_cdf(1.6448536)) < 1e-13);
    CHECK(std::abs(std_normal_cdf(-3.0) - (1.0 - std_normal_cdf(3.0))) < 1e-12);
    for (double z : {-2.5, -1.0, -0.3, 0.4, 1.7, 2.9})
        CHECK(std::abs(std_normal_cdf(z) - oracle_normal_cdf(z)) < 1e-13);
    CHECK(std_normal_cdf(-40.0) == 0.0);
    CHECK(std_normal_cdf(40.0) == 1.0);
    CHECK_THROWS_AS(std_normal_cdf(std::nan("")), std::invalid_argument);
}

TEST_CASE("standard normal pdf") {
    CHECK(std::abs(std_normal_pdf(0.0) - 0.3989423) < 1e-7);
    CHECK(std_normal_pdf(1.3) == std_normal_pdf(-1.3));
    CHECK(std_normal_pdf(40.0) == 0.0);
    CHECK_THROWS_AS(std_normal_pdf(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("standard normal quantile inverts cdf") {
    CHECK(std::abs(std_normal_quantile(0.95) - 1.6448536) < 1e-7);
    for (double p = 1e-6; p < 1.0; p += 0.0317) {
        double z = std_normal_quantile(p);
        CHECK(std::abs(std_normal_cdf(z) - p) < 1e-8);
    }
    CHECK(std::abs(std_normal_cdf(std_normal_quantile(1e-6)) - 1e-6) < 1e-12);
    CHECK(std::abs(std_normal_cdf(std_normal_quantile(1.0 - 1e-6)) - (1.0 - 1e-6)) < 1e-12);
    CHECK_THROWS_AS(std_normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(std_normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("bessel k0 against quadrature oracle") {
    CHECK(std::abs(bessel_k0(1.0) - 0.42102444) < 1e-7);
    CHECK(std::abs(bessel_k0(1.0) - oracle_k0(1.0)) < 1e-10);
    CHECK(std::abs(bessel_k0(2.835) - oracle_k0(2.835)) / oracle_k0(2.835) < 1e-9);
    double asym = std::sqrt(M_PI / 100.0) * std::exp(-50.0);
    CHECK(std::abs(bessel_k0(50.0) - asym) / asym < 0.01);
    // Series regime cross-checked against quadrature.
    for (double w : {0.3, 0.7, 1.2, 1.9})
        CHECK(std::abs(bessel_k0(w) - oracle_k0(w)) / oracle_k0(w) < 1e-8);
    // Strictly decreasing.
    CHECK(bessel_k0(0.5) > bessel_k0(0.6));
    CHECK(bessel_k0(3.0) > bessel_k0(3.1));
    CHECK_THROWS_AS(bessel_k0(0.0), std::invalid_argument);
    CHECK_THROWS_AS(bessel_k0(-1.0), std::invalid_argument);
}

TEST_CASE("gamma cdf") {
    CHECK(gamma_cdf(0.0, 2.0, 1.0) == 0.0);
    CHECK(gamma_cdf(-0.5, 2.0, 1.0) == 0.0);
    CHECK(std::abs(gamma_cdf(1.0, 1.0, 1.0) - (1.0 - std::exp(-1.0))) < 1e-14);
    CHECK(std::abs(gamma_cdf(1.0, 15.0, 15.0) - 0.5343) < 1e-3);
    double oracle = simpson([](double x) { return std::exp(gamma_log_density(x, 15.0, 15.0)); },
                            1e-12, 1.0, 20000);
    CHECK(std::abs(gamma_cdf(1.0, 15.0, 15.0) - oracle) < 1e-9);
    CHECK(gamma_cdf(0.8, 15.0, 15.0) < gamma_cdf(0.9, 15.0, 15.0));
    CHECK_THROWS_AS(gamma_cdf(1.0, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(gamma_cdf(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("gamma quantile") {
    CHECK(std::abs(gamma_quantile(0.5, 1.0, 1.0) - std::log(2.0)) < 1e-10);

    // Oracle: plain bisection on gamma_cdf.
    double lo = 1e-10, hi = 100.0;
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (lo + hi);
        (gamma_cdf(mid, 15.0, 1.0) < 0.05 ? lo : hi) = mid;
    }
    CHECK(std::abs(gamma_quantile(0.05, 15.0, 1.0) - 0.5 * (lo + hi)) < 1e-8);

    for (double p : {0.001, 0.05, 0.3, 0.5, 0.9, 0.999}) {
        for (double shape : {0.7, 1.0, 4.0, 15.0}) {
            double q = gamma_quantile(p, shape, 2.5);
            CHECK(std::abs(gamma_cdf(q, shape, 2.5) - p) < 1e-10);
        }
    }
    // Round trip from the x side.
    for (double x : {0.11, 0.9, 2.7, 8.3}) {
        double p = gamma_cdf(x, 3.2, 1.7);
        CHECK(std::abs(gamma_quantile(p, 3.2, 1.7) - x) < 1e-8);
    }
    CHECK_THROWS_AS(gamma_quantile(0.0, 2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(gamma_quantile(1.0, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("incomplete beta") {
    CHECK(incomplete_beta_reg(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-13));
    CHECK(std::abs(incomplete_beta_reg(2.0, 2.0, 0.5) - 0.5) < 1e-13);
    CHECK(incomplete_beta_reg(2.0, 3.0, 0.0) == 0.0);
    CHECK(incomplete_beta_reg(2.0, 3.0, 1.0) == 1.0);
    double a = 2.5, b = 3.5, x = 0.4;
    double oracle = simpson(
        [&](double t) {
            return std::exp((a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t) - log_beta(a, b));
        },
        1e-12, x, 20000);
    CHECK(std::abs(incomplete_beta_reg(a, b, x) - oracle) < 1e-9);
    CHECK_THROWS_AS(incomplete_beta_reg(0.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("bracket validation") {
    CHECK(Bracket(0.0, 2.0).width() == 2.0);
    CHECK_THROWS_AS(Bracket(2.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(Bracket(3.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Bracket(0.0, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("find_root") {
    double r = find_root([](double x) { return x - 2.0; }, Bracket(0.0, 5.0));
    CHECK(std::abs(r - 2.0) < 1e-12);

    double z = find_root([](double x) { return std_normal_cdf(x) - 0.95; }, Bracket(0.0, 5.0));
    CHECK(std::abs(z - std_normal_quantile(0.95)) < 1e-8);
    CHECK(std::abs(z - 1.6448536) < 5e-8);

    double c = find_root([](double x) { return std::cos(x); }, Bracket(0.0, 3.0), 1e-14);
    CHECK(std::abs(c - M_PI / 2.0) < 1e-12);

    CHECK_THROWS_AS(find_root([](double x) { return x * x + 1.0; }, Bracket(-1.0, 1.0)),
                    BracketError);
}

TEST_CASE("integrate on finite ranges") {
    QuadratureResult unit = integrate([](double) { return 1.0; }, 0.0, 1.0);
    CHECK(std::abs(unit.value - 1.0) < 1e-14);
    CHECK(unit.evaluations >= 1);
    CHECK(unit.abs_error_estimate >= 0.0);

    QuadratureResult wavy = integrate([](double x) { return std::sin(3.0 * x) * std::exp(-x); },
                                      0.0, 4.0, 1e-12);
    double closed = (3.0 - std::exp(-4.0) * (3.0 * std::cos(12.0) + std::sin(12.0))) / 10.0;
    CHECK(std::abs(wavy.value - closed) < std::max(1e-12, wavy.abs_error_estimate));
}

TEST_CASE("integrate on infinite ranges") {
    QuadratureResult k0 = integrate([](double zv) { return std::exp(-std::cosh(zv)); }, 0.0,
                                    std::numeric_limits<double>::infinity(), 1e-12);
    CHECK(std::abs(k0.value - bessel_k0(1.0)) < 1e-8);

    QuadratureResult norm = integrate([](double zv) { return std_normal_pdf(zv); },
                                      -std::numeric_limits<double>::infinity(),
                                      std::numeric_limits<double>::infinity(), 1e-12);
    CHECK(std::abs(norm.value - 1.0) < 1e-10);
}

TEST_CASE("integrate additivity") {
    auto f = [](double x) { return std_normal_pdf(x) * (1.0 + std::sin(3.0 * x)); };
    QuadratureResult left = integrate(f, -1.0, 0.7, 1e-11);
    QuadratureResult right = integrate(f, 0.7, 2.5, 1e-11);
    QuadratureResult whole = integrate(f, -1.0, 2.5, 1e-11);
    double slack = left.abs_error_estimate + right.abs_error_estimate +
                   whole.abs_error_estimate + 1e-13;
    CHECK(std::abs(left.value + right.value - whole.value) <= slack);
}

TEST_CASE("integrate budget exhaustion carries partial result") {
    bool threw = false;
    try {
        integrate([](double x) { return std::sin(1.0 / x); }, 1e-12, 1.0, 1e-15);
    } catch (const QuadratureBudgetError& e) {
        threw = true;
        CHECK(e.partial.evaluations >= 1);
        CHECK(std::isfinite(e.partial.value));
    }
    CHECK(threw);
}

TEST_CASE("differentiate on polynomials to 1e-9") {
    auto p = [](double x) {
        return ((((x - 3.0) * x + 0.0) * x + 2.0) * x - 7.0) * x + 1.0;  // x^5-3x^4+2x^2-7x+1
    };
    auto d1 = [](double x) { return (((5.0 * x - 12.0) * x + 0.0) * x + 4.0) * x - 7.0; };
    auto d2 = [](double x) { return ((20.0 * x - 36.0) * x + 0.0) * x + 4.0; };
    for (double x : {-2.0, -1.0, -0.4, 0.0, 0.6, 1.3, 2.0}) {
        CHECK(std::abs(differentiate(p, x, 1) - d1(x)) < 1e-9);
        CHECK(std::abs(differentiate(p, x, 2) - d2(x)) < 1e-9);
    }
}

TEST_CASE("differentiate on analytic functions") {
    for (int order : {1, 2, 3})
        CHECK(std::abs(differentiate([](double x) { return std::exp(x); }, 0.0, order) - 1.0) <
              1e-5);

    // Per-unit exponential log-likelihood at the maximizer: third derivative 4.
    double muhat = 1.0;
    auto ell = [muhat](double mu) { return -muhat / mu - std::log(mu); };
    CHECK(std::abs(differentiate(ell, muhat, 3) - 4.0) < 1e-3);
    CHECK(std::abs(differentiate(ell, muhat, 2) - (-1.0)) < 1e-5);

    // Hyperbola-style even log-likelihood: third derivative vanishes at the mode.
    double s1 = 3.1, s2 = 0.65, n = 2.0;
    double etahat = 0.5 * std::log(s1 / s2);
    auto ell2 = [&](double eta) { return -(std::exp(-eta) * s1 + std::exp(eta) * s2) / n; };
    CHECK(std::abs(differentiate(ell2, etahat, 3)) < 1e-6);

    CHECK_THROWS_AS(differentiate([](double x) { return x; }, 0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(differentiate([](double x) { return x; }, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(differentiate([](double x) { return x; }, 1e60, 1), std::runtime_error);
}
