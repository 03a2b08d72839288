#include "msens/density.hpp"

#include <algorithm>
#include <cmath>

#include "msens/errors.hpp"

namespace msens {

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> g(static_cast<std::size_t>(count));
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = lo + step * i;
    g.back() = hi;
    return g;
}

ConditionalDensity::ConditionalDensity(std::vector<double> grid, std::vector<double> raw_density)
    : grid_(std::move(grid)), pdf_(std::move(raw_density)) {
    const std::size_t g = grid_.size();
    if (g < 2 || pdf_.size() != g) throw DomainError("density grid needs >= 2 matching points");
    for (std::size_t i = 0; i + 1 < g; ++i) {
        if (!(grid_[i + 1] > grid_[i])) throw DomainError("density grid must be strictly increasing");
    }
    for (double& p : pdf_) {
        if (!std::isfinite(p)) throw DomainError("non-finite density value");
        p = (p > 0.0 ? p : 0.0) + kDensityFloor;
    }
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < g; ++i) {
        mass += 0.5 * (grid_[i + 1] - grid_[i]) * (pdf_[i] + pdf_[i + 1]);
    }
    if (!(mass > 0.0)) throw DomainError("density has zero mass");
    for (double& p : pdf_) p /= mass;

    c0_.resize(g);
    c1_.resize(g);
    c2_.resize(g);
    c0_[0] = c1_[0] = c2_[0] = 0.0;
    for (std::size_t i = 0; i + 1 < g; ++i) {
        const double h = grid_[i + 1] - grid_[i];
        const double ya = grid_[i], yb = grid_[i + 1];
        const double pa = pdf_[i], pb = pdf_[i + 1];
        c0_[i + 1] = c0_[i] + 0.5 * h * (pa + pb);
        c1_[i + 1] = c1_[i] + 0.5 * h * (ya * pa + yb * pb);
        c2_[i + 1] = c2_[i] + 0.5 * h * (ya * ya * pa + yb * yb * pb);
    }
}

double ConditionalDensity::partial(int k, double cutoff) const {
    const std::vector<double>& c = (k == 0 ? c0_ : (k == 1 ? c1_ : c2_));
    if (cutoff <= grid_.front()) return 0.0;
    if (cutoff >= grid_.back()) return c.back();
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), cutoff);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
    const double ya = grid_[i], yb = grid_[i + 1];
    const double t = (cutoff - ya) / (yb - ya);
    const double pc = pdf_[i] + t * (pdf_[i + 1] - pdf_[i]);
    const double fa = (k == 0 ? pdf_[i] : (k == 1 ? ya * pdf_[i] : ya * ya * pdf_[i]));
    const double fc = (k == 0 ? pc : (k == 1 ? cutoff * pc : cutoff * cutoff * pc));
    return c[i] + 0.5 * (cutoff - ya) * (fa + fc);
}

double ConditionalDensity::cdf(double y) const {
    const double v = partial(0, y);
    return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

double ConditionalDensity::quantile(double alpha) const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("quantile level must lie in (0,1)");
    const auto it = std::lower_bound(c0_.begin(), c0_.end(), alpha);
    if (it == c0_.end()) return grid_.back();
    return grid_[static_cast<std::size_t>(it - c0_.begin())];
}

double ConditionalDensity::truncated_moment(int k, double cutoff, TruncSide side) const {
    if (k < 0 || k > 2) throw DomainError("truncated_moment supports k in {0,1,2}");
    if (!std::isfinite(cutoff)) {
        // infinite cutoffs resolve to the full moment or zero
        const bool whole = (side == TruncSide::Below) == (cutoff > 0.0);
        const double full = (k == 0 ? c0_.back() : (k == 1 ? c1_.back() : c2_.back()));
        return whole ? full : 0.0;
    }
    const double below = partial(k, cutoff);
    if (side == TruncSide::Below) return below;
    const double full = (k == 0 ? c0_.back() : (k == 1 ? c1_.back() : c2_.back()));
    return full - below;
}

double ConditionalDensity::deficit(double xi) const {
    if (xi >= grid_.back()) return xi - c1_.back();  // c0 saturates at 1
    return xi * partial(0, xi) - partial(1, xi);
}

double ConditionalDensity::expectation(const std::function<double(double)>& g) const {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
        const double h = grid_[i + 1] - grid_[i];
        acc += 0.5 * h * (g(grid_[i]) * pdf_[i] + g(grid_[i + 1]) * pdf_[i + 1]);
    }
    if (!std::isfinite(acc)) throw DomainError("expectation of non-finite integrand");
    return acc;
}

}  // namespace msens
