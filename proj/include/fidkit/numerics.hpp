#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace fidkit::num {

using Fn = std::function<double(double)>;

// Finite interval with lo < hi; construction validates both endpoints.
struct Bracket {
    double lo;
    double hi;
    Bracket(double lo_, double hi_);
    double width() const { return hi - lo; }
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    long evaluations = 0;
};

// Root finding was asked for an interval whose endpoints do not straddle zero.
class BracketError : public std::runtime_error {
public:
    explicit BracketError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iteration cap hit; `best` carries the most recent iterate.
class IterationLimitError : public std::runtime_error {
public:
    IterationLimitError(const std::string& msg, double best_) : std::runtime_error(msg), best(best_) {}
    double best;
};

// Subdivision budget exhausted; `partial` carries the accumulated estimate.
class QuadratureBudgetError : public std::runtime_error {
public:
    QuadratureBudgetError(const std::string& msg, QuadratureResult partial_)
        : std::runtime_error(msg), partial(partial_) {}
    QuadratureResult partial;
};

double std_normal_cdf(double z);
double std_normal_pdf(double z);
double std_normal_quantile(double p);

// Modified Bessel function of the second kind, order zero, w > 0.
double bessel_k0(double w);

// Gamma distribution in shape/rate parameterization.
double gamma_cdf(double x, double shape, double rate);
double gamma_quantile(double p, double shape, double rate);
double gamma_log_pdf(double x, double shape, double rate);

double log_beta(double a, double b);
double incomplete_beta_reg(double a, double b, double x);

// Brent's method; tol is an absolute tolerance on the abscissa.
double find_root(const Fn& f, Bracket bracket, double tol = 1e-13);

// Adaptive Gauss-Kronrod; lo/hi may be infinite. tol is absolute.
QuadratureResult integrate(const Fn& f, double lo, double hi, double tol = 1e-10);
QuadratureResult integrate(const Fn& f, Bracket bracket, double tol = 1e-10);

// Central-difference derivative of the given order (1-3) with one
// Richardson refinement. `scale` hints the natural length scale at x.
double differentiate(const Fn& f, double x, int order, double scale = 1.0);

}  // namespace fidkit::num
