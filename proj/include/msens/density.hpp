#pragma once

#include <functional>
#include <vector>

namespace msens {

enum class TruncSide { Below, Above };

// A conditional outcome law materialized on a strictly increasing grid.
// The raw density is clipped at zero, floored, then normalized against the
// trapezoid rule, so mass() == 1 and the density is strictly positive on the
// grid. Cumulative arrays for p, y*p and y^2*p are precomputed; truncated
// moments at arbitrary cutoffs interpolate linearly inside a grid cell and
// extend by the full moment beyond it, which keeps them continuous and
// (for k = 0) strictly increasing -- exactly what the bisection solvers need.
class ConditionalDensity {
  public:
    static constexpr double kDensityFloor = 1e-12;

    ConditionalDensity(std::vector<double> grid, std::vector<double> raw_density);

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& pdf() const { return pdf_; }
    double grid_min() const { return grid_.front(); }
    double grid_max() const { return grid_.back(); }

    double mass() const { return c0_.back(); }
    double mean() const { return c1_.back(); }
    double second_moment() const { return c2_.back(); }

    double cdf(double y) const;

    // Smallest grid point whose quadrature CDF reaches alpha.
    double quantile(double alpha) const;

    // integral of y^k over {y <= cutoff} (Below) or {y >= cutoff} (Above)
    double truncated_moment(int k, double cutoff, TruncSide side) const;

    // E[(xi - Y) 1{Y <= xi}]; linear continuation xi - mean() above the grid
    double deficit(double xi) const;

    double expectation(const std::function<double(double)>& g) const;

  private:
    double partial(int k, double cutoff) const;  // below-side cumulative

    std::vector<double> grid_, pdf_;
    std::vector<double> c0_, c1_, c2_;
};

// Uniform grid helper: count points spanning [lo, hi].
std::vector<double> linspace(double lo, double hi, int count);

}  // namespace msens
