#pragma once

#include <cmath>
#include <span>

namespace msens {

double norm_pdf(double z);
double norm_cdf(double z);
double norm_quantile(double p);

// quantile of Gamma(shape, rate) parameterized so mean = shape/rate
double gamma_quantile(double p, double shape, double rate);

double mean_of(std::span<const double> v);
double sample_sd(std::span<const double> v);  // n-1 denominator

inline double logistic(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

inline double clamp(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }

}  // namespace msens
