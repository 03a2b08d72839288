#include "msens/stats.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "msens/errors.hpp"

namespace msens {

namespace {
const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);
}

double norm_pdf(double z) { return boost::math::pdf(kStdNormal, z); }

double norm_cdf(double z) { return boost::math::cdf(kStdNormal, z); }

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_quantile: p must lie in (0,1)");
    return boost::math::quantile(kStdNormal, p);
}

double gamma_quantile(double p, double shape, double rate) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("gamma_quantile: p must lie in (0,1)");
    if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma_quantile: shape and rate must be positive");
    boost::math::gamma_distribution<double> dist(shape, 1.0 / rate);
    return boost::math::quantile(dist, p);
}

double mean_of(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

}  // namespace msens
