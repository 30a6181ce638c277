#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace isinglab {

struct MeanSe {
    double mean = 0, se = 0, sd = 0;
    std::size_t n = 0;
};

inline MeanSe mean_se(const std::vector<double>& x)
{
    MeanSe r;
    r.n = x.size();
    if (x.empty()) return r;
    r.mean = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
    if (x.size() > 1) {
        double ss = 0;
        for (double v : x) ss += (v - r.mean) * (v - r.mean);
        r.sd = std::sqrt(ss / double(x.size() - 1));
        r.se = r.sd / std::sqrt(double(x.size()));
    }
    return r;
}

inline double median(std::vector<double> x)
{
    if (x.empty()) throw std::invalid_argument("median of an empty sample");
    std::size_t m = x.size() / 2;
    std::nth_element(x.begin(), x.begin() + m, x.end());
    double hi = x[m];
    if (x.size() % 2) return hi;
    return 0.5 * (hi + *std::max_element(x.begin(), x.begin() + m));
}

struct ChiSquare {
    double stat = 0;
    int dof = 0;
    double p = 0;
};

// Pearson goodness of fit against equal cell probabilities
inline ChiSquare chi2_uniform(const std::vector<long>& counts)
{
    if (counts.size() < 2) throw std::invalid_argument("need at least two cells");
    double n = 0;
    for (long c : counts) n += double(c);
    double e = n / double(counts.size());
    ChiSquare r;
    for (long c : counts) r.stat += (double(c) - e) * (double(c) - e) / e;
    r.dof = int(counts.size()) - 1;
    r.p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.stat));
    return r;
}

struct LineFit {
    double slope = 0, intercept = 0, r2 = 0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need at least two points of equal-length data");
    double n = double(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) throw std::invalid_argument("degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

inline LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0 || y[i] <= 0) throw std::invalid_argument("log-log fit needs positive data");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return least_squares(lx, ly);
}

} // namespace isinglab
