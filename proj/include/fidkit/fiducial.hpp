#pragma once

#include "fidkit/numerics.hpp"
#include "fidkit/rng.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace fidkit::fid {

// Open parameter or sample interval; endpoints may be infinite.
struct Domain {
    double lo;
    double hi;
    bool contains(double x) const { return x > lo && x < hi; }
};

enum class Monotone { decreasing_in_theta, increasing_in_theta };

enum class FdSource { exact, expansion, pstar, asymptotic_normal, posterior };

std::string to_string(FdSource source);

// A real-parameter sampling model for a scalar statistic s.
struct ParamFamily {
    std::function<double(double theta, double s)> cdf;
    std::function<double(double theta, double s)> log_density;
    Domain theta_domain;
    Domain sample_domain;
    Monotone direction = Monotone::decreasing_in_theta;
    // Draws the statistic at a given parameter; required only by the
    // simulation-backed checks.
    std::function<double(double theta, rng::Stream&)> sampler;
    // Starting point for bracket expansion in theta; defaults to s.
    std::function<double(double s)> center_hint;
    std::string name;
};

// One-dimensional distribution over the parameter. Immutable after
// construction; the quantile cache is lock-protected.
class FidDistribution {
public:
    FidDistribution(std::function<double(double)> cdf, num::Bracket domain, FdSource source,
                    std::function<double(double)> density = nullptr);

    // Nondecreasing on the domain, clamped to [0,1]; constant outside it.
    double cdf(double theta) const;
    // Analytic when supplied, otherwise differentiated from the CDF.
    double density(double theta) const;
    double quantile(double p) const;
    const num::Bracket& domain() const;
    FdSource source() const;

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

struct IntervalReport {
    double level;
    double lower;
    double upper;
    double length;
};

struct KsReport {
    double statistic;
    double p_value;
};

// Expand from `center` until the cdf drops below 1e-7 on the left and rises
// above 1-1e-7 on the right, staying inside `domain`.
num::Bracket find_cdf_bracket(const std::function<double(double)>& cdf, double center,
                              Domain domain);

FidDistribution fd_from_family(const ParamFamily& family, double s);

double fd_density(const FidDistribution& fd, double theta);
double fd_quantile(const FidDistribution& fd, double p);
IntervalReport confidence_interval(const FidDistribution& fd, double level);
double confidence_curve(const FidDistribution& fd, double theta);

// Simulates the statistic at theta_true and KS-tests F_pivot(s) against
// uniform(0,1); pivot defaults to theta_true (the exact-matching identity).
KsReport pivotal_uniformity_check(const ParamFamily& family, double theta_true, int n_sims,
                                  std::uint64_t seed,
                                  std::optional<double> pivot_theta = std::nullopt);

// Normalizes an unnormalized log-density over theta into an FD. The support
// bracket is grown from `center` until the density falls 60 log-units below
// its running maximum; the CDF is a cached panel-prefix quadrature.
FidDistribution fd_from_log_density(const std::function<double(double)>& log_density,
                                    Domain domain, double center, FdSource source);

}  // namespace fidkit::fid
