#include "fidkit/fiducial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <vector>

namespace fidkit::fid {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

constexpr double kTailLo = 1e-7;
constexpr double kTailHi = 1.0 - 1e-7;
constexpr int kExpandCap = 300;

// One expansion step away from `center`; halves the gap to a finite
// boundary, doubles the step toward an infinite one.
double step_toward(double probe, double boundary, double& step, bool downward) {
    if (std::isinf(boundary)) {
        double next = downward ? probe - step : probe + step;
        step *= 2.0;
        return next;
    }
    return boundary + 0.5 * (probe - boundary);
}

}  // namespace

std::string to_string(FdSource source) {
    switch (source) {
        case FdSource::exact: return "exact";
        case FdSource::expansion: return "expansion";
        case FdSource::pstar: return "pstar";
        case FdSource::asymptotic_normal: return "asymptotic-normal";
        case FdSource::posterior: return "posterior";
    }
    return "unknown";
}

struct FidDistribution::Impl {
    std::function<double(double)> cdf_fn;
    num::Bracket domain;
    FdSource source;
    std::function<double(double)> density_fn;
    mutable std::map<double, double> quantile_cache;
    mutable std::mutex cache_mutex;

    Impl(std::function<double(double)> c, num::Bracket d, FdSource s,
         std::function<double(double)> dens)
        : cdf_fn(std::move(c)), domain(d), source(s), density_fn(std::move(dens)) {}
};

FidDistribution::FidDistribution(std::function<double(double)> cdf, num::Bracket domain,
                                 FdSource source, std::function<double(double)> density)
    : impl_(std::make_shared<Impl>(std::move(cdf), domain, source, std::move(density))) {
    if (!impl_->cdf_fn) throw std::invalid_argument("FidDistribution: cdf callable required");
}

double FidDistribution::cdf(double theta) const {
    double t = std::clamp(theta, impl_->domain.lo, impl_->domain.hi);
    return clamp01(impl_->cdf_fn(t));
}

double FidDistribution::density(double theta) const {
    const num::Bracket& d = impl_->domain;
    if (!(theta > d.lo && theta < d.hi)) {
        std::ostringstream msg;
        msg << "density: theta=" << theta << " is not interior to [" << d.lo << ", " << d.hi
            << "]";
        throw std::domain_error(msg.str());
    }
    if (impl_->density_fn) return impl_->density_fn(theta);
    double v = num::differentiate([this](double t) { return cdf(t); }, theta, 1, d.width() / 100.0);
    return std::max(v, 0.0);
}

double FidDistribution::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream msg;
        msg << "quantile: p must lie in (0,1), got " << p;
        throw std::invalid_argument(msg.str());
    }
    std::lock_guard<std::mutex> lock(impl_->cache_mutex);
    auto it = impl_->quantile_cache.find(p);
    if (it != impl_->quantile_cache.end()) return it->second;

    const num::Bracket& d = impl_->domain;
    double flo = cdf(d.lo) - p;
    double fhi = cdf(d.hi) - p;
    if (flo > 0.0 || fhi < 0.0) {
        std::ostringstream msg;
        msg << "quantile: p=" << p << " is outside the resolvable range [" << cdf(d.lo) << ", "
            << cdf(d.hi) << "]";
        throw std::domain_error(msg.str());
    }
    double r = num::find_root([this, p](double t) { return cdf(t) - p; }, d,
                              1e-12 * std::max(1.0, d.width()));
    impl_->quantile_cache.emplace(p, r);
    return r;
}

const num::Bracket& FidDistribution::domain() const { return impl_->domain; }

FdSource FidDistribution::source() const { return impl_->source; }

num::Bracket find_cdf_bracket(const std::function<double(double)>& cdf, double center,
                              Domain domain) {
    if (!domain.contains(center)) {
        std::ostringstream msg;
        msg << "find_cdf_bracket: center " << center << " outside (" << domain.lo << ", "
            << domain.hi << ")";
        throw std::invalid_argument(msg.str());
    }
    double lo = center;
    double step = std::max(1.0, std::abs(center)) * 0.5;
    int it = 0;
    while (clamp01(cdf(lo)) > kTailLo) {
        if (++it > kExpandCap)
            throw std::runtime_error(
                "find_cdf_bracket: cdf does not approach 0 toward the lower boundary");
        lo = step_toward(lo, domain.lo, step, true);
    }
    double hi = center;
    step = std::max(1.0, std::abs(center)) * 0.5;
    it = 0;
    while (clamp01(cdf(hi)) < kTailHi) {
        if (++it > kExpandCap)
            throw std::runtime_error(
                "find_cdf_bracket: cdf does not approach 1 toward the upper boundary");
        hi = step_toward(hi, domain.hi, step, false);
    }
    return num::Bracket(lo, hi);
}

FidDistribution fd_from_family(const ParamFamily& family, double s) {
    if (!family.cdf) throw std::invalid_argument("fd_from_family: family.cdf required");
    if (!family.sample_domain.contains(s)) {
        std::ostringstream msg;
        msg << "fd_from_family: statistic " << s << " outside the sample domain ("
            << family.sample_domain.lo << ", " << family.sample_domain.hi << ")";
        throw std::domain_error(msg.str());
    }
    const bool decreasing = family.direction == Monotone::decreasing_in_theta;
    auto H = [cdf = family.cdf, s, decreasing](double theta) {
        double F = cdf(theta, s);
        return clamp01(decreasing ? 1.0 - F : F);
    };
    double center = family.center_hint ? family.center_hint(s) : s;
    if (!family.theta_domain.contains(center)) {
        std::ostringstream msg;
        msg << "fd_from_family: center hint " << center << " outside the parameter domain";
        throw std::invalid_argument(msg.str());
    }
    num::Bracket dom = find_cdf_bracket(H, center, family.theta_domain);

    // 64-point probe of the declared monotone direction of F in theta.
    const int probes = 64;
    double prev_theta = dom.lo;
    double prev_f = family.cdf(prev_theta, s);
    for (int i = 1; i < probes; ++i) {
        double theta = dom.lo + dom.width() * i / (probes - 1);
        double f = family.cdf(theta, s);
        bool ok = decreasing ? (f <= prev_f + 1e-9) : (f >= prev_f - 1e-9);
        if (!ok) {
            std::ostringstream msg;
            msg << "fd_from_family: cdf is not " << (decreasing ? "decreasing" : "increasing")
                << " in theta between theta=" << prev_theta << " (F=" << prev_f
                << ") and theta=" << theta << " (F=" << f << ")";
            throw std::runtime_error(msg.str());
        }
        prev_theta = theta;
        prev_f = f;
    }
    if (H(dom.lo) > 1e-6 || H(dom.hi) < 1.0 - 1e-6)
        throw std::runtime_error("fd_from_family: boundary limits of the FD are not {0, 1}");
    return FidDistribution(H, dom, FdSource::exact);
}

double fd_density(const FidDistribution& fd, double theta) { return fd.density(theta); }

double fd_quantile(const FidDistribution& fd, double p) { return fd.quantile(p); }

IntervalReport confidence_interval(const FidDistribution& fd, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        std::ostringstream msg;
        msg << "confidence_interval: level must lie in (0,1), got " << level;
        throw std::invalid_argument(msg.str());
    }
    double alpha = 1.0 - level;
    double lower = fd.quantile(0.5 * alpha);
    double upper = fd.quantile(1.0 - 0.5 * alpha);
    return IntervalReport{level, lower, upper, upper - lower};
}

double confidence_curve(const FidDistribution& fd, double theta) {
    return std::abs(1.0 - 2.0 * fd.cdf(theta));
}

namespace {

// Asymptotic Kolmogorov tail probability with Stephens' small-sample factor.
double ks_p_value(double d, int n) {
    double t = d * (std::sqrt(static_cast<double>(n)) + 0.12 + 0.11 / std::sqrt(n));
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * t * t);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsReport pivotal_uniformity_check(const ParamFamily& family, double theta_true, int n_sims,
                                  std::uint64_t seed, std::optional<double> pivot_theta) {
    if (!family.sampler)
        throw std::runtime_error("pivotal_uniformity_check: family '" + family.name +
                                 "' does not provide a sampler");
    if (n_sims < 1) throw std::invalid_argument("pivotal_uniformity_check: n_sims must be >= 1");
    double pivot = pivot_theta.value_or(theta_true);
    std::vector<double> u(n_sims);
    for (int i = 0; i < n_sims; ++i) {
        rng::Stream stream = rng::derive_stream(seed, 0, static_cast<std::uint64_t>(i));
        double s = family.sampler(theta_true, stream);
        u[i] = clamp01(family.cdf(pivot, s));
    }
    std::sort(u.begin(), u.end());
    double d = 0.0;
    for (int i = 0; i < n_sims; ++i) {
        double ecdf_hi = static_cast<double>(i + 1) / n_sims;
        double ecdf_lo = static_cast<double>(i) / n_sims;
        d = std::max(d, std::max(ecdf_hi - u[i], u[i] - ecdf_lo));
    }
    return KsReport{d, ks_p_value(d, n_sims)};
}

FidDistribution fd_from_log_density(const std::function<double(double)>& log_density,
                                    Domain domain, double center, FdSource source) {
    if (!domain.contains(center))
        throw std::invalid_argument("fd_from_log_density: center outside the domain");
    double best = log_density(center);
    if (!std::isfinite(best))
        throw std::invalid_argument("fd_from_log_density: log-density non-finite at the center");
    const double drop = 60.0;

    auto expand = [&](bool downward) {
        double boundary = downward ? domain.lo : domain.hi;
        double probe = center;
        double step = std::max(1.0, std::abs(center)) * 0.5;
        for (int it = 0; it <= kExpandCap; ++it) {
            double next = step_toward(probe, boundary, step, downward);
            if (std::isfinite(boundary) &&
                std::abs(next - boundary) <= 1e-12 * std::max(1.0, std::abs(boundary))) {
                // Endpoint-avoiding quadrature nodes can still integrate an
                // integrable boundary singularity; accept the near-boundary cut.
                return next;
            }
            probe = next;
            double v = log_density(probe);
            if (std::isnan(v))
                throw std::runtime_error("fd_from_log_density: log-density NaN during expansion");
            if (v > best) best = v;
            if (v < best - drop) return probe;
        }
        throw std::runtime_error(
            "fd_from_log_density: density mass does not decay toward the boundary "
            "(divergent normalization?)");
    };
    double lo = expand(true);
    double hi = expand(false);
    num::Bracket support(lo, hi);

    // Panel-prefix quadrature of the rescaled density; prefixes make the CDF
    // exactly nondecreasing and cheap to evaluate.
    const int panels = 256;
    auto scaled = [log_density, best](double t) { return std::exp(log_density(t) - best); };
    auto grid = std::make_shared<std::vector<double>>(panels + 1);
    auto prefix = std::make_shared<std::vector<double>>(panels + 1, 0.0);
    for (int i = 0; i <= panels; ++i) (*grid)[i] = lo + support.width() * i / panels;
    const double panel_tol = support.width() * 1e-11;
    for (int i = 0; i < panels; ++i) {
        num::QuadratureResult r = num::integrate(scaled, (*grid)[i], (*grid)[i + 1], panel_tol);
        (*prefix)[i + 1] = (*prefix)[i] + std::max(r.value, 0.0);
    }
    double z = (*prefix)[panels];
    if (!(z > 0.0) || !std::isfinite(z))
        throw std::runtime_error("fd_from_log_density: normalization is not finite and positive");

    auto cdf = [grid, prefix, scaled, z, panel_tol](double t) {
        const auto& g = *grid;
        if (t <= g.front()) return 0.0;
        if (t >= g.back()) return 1.0;
        auto it = std::upper_bound(g.begin(), g.end(), t);
        std::size_t j = static_cast<std::size_t>(it - g.begin()) - 1;
        double partial = 0.0;
        if (t > g[j]) partial = std::max(num::integrate(scaled, g[j], t, panel_tol).value, 0.0);
        return clamp01(((*prefix)[j] + partial) / z);
    };
    auto density = [log_density, best, z](double t) {
        return std::exp(log_density(t) - best) / z;
    };
    return FidDistribution(cdf, support, source, density);
}

}  // namespace fidkit::fid
