#pragma once

// Plane partitions in a box with floor and ceiling, the non-intersecting lattice path
// picture, and the two single-step moves (local +-1 update, parity-class resampling).
//
// Columns are (x, y) with 1 <= x <= a1, 1 <= y <= a2 and heights in [h1 - 1, h2]; a column
// of height v holds the cubes at levels h1..v. Level j of a partition is the Young diagram
// {(x, y) : v(x, y) >= j}. Its boundary, read along the diagonal coordinate U = y - x, is
// f_j(U) = |U| + 2 n_j(U) with n_j(U) the number of level-j cells on diagonal U. Path j is
//     phi^(j)_X = j + D' - f_j(X - D'),   X = 0 .. 2D',
// so phi^(j)_0 = phi^(j)_{2D'} = j, steps are +-1, phi^(j) < phi^(j+1), and adding cubes
// lowers paths. Columns on diagonal U move only position X = D' + U; the column parity
// (x - y mod 2) therefore matches the parity of X - D'.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace isinglab {

struct BoxSpec {
    int a1 = 1, a2 = 1;
    int h1 = 1, h2 = 1;
    std::vector<int> floor;    // row-major over columns, (x-1)*a2 + (y-1)
    std::vector<int> ceiling;
    int half_length = 0;       // D'; 0 selects max(a1, a2)

    static BoxSpec uniform(int a1, int a2, int h)
    {
        BoxSpec b;
        b.a1 = a1;
        b.a2 = a2;
        b.h1 = 1;
        b.h2 = h;
        b.floor.assign(std::size_t(a1) * a2, 0);
        b.ceiling.assign(std::size_t(a1) * a2, h);
        return b;
    }

    std::size_t columns() const { return std::size_t(a1) * a2; }
    std::size_t col(int x, int y) const { return std::size_t(x - 1) * a2 + (y - 1); }
    int dprime() const { return half_length > 0 ? half_length : std::max(a1, a2); }
    int path_length() const { return 2 * dprime(); }
    int levels() const { return h2 - h1 + 1; }
    // largest columnwise gap between ceiling and floor
    int H() const
    {
        int h = 0;
        for (std::size_t c = 0; c < columns(); ++c) h = std::max(h, ceiling[c] - floor[c]);
        return h;
    }
    // largest distance between horizontal projections of two cubes
    double D() const { return std::hypot(double(a1 - 1), double(a2 - 1)); }
};

struct PlanePartition {
    int a1 = 0, a2 = 0;
    std::vector<int> v;

    int at(int x, int y) const { return v[std::size_t(x - 1) * a2 + (y - 1)]; }
    int& at(int x, int y) { return v[std::size_t(x - 1) * a2 + (y - 1)]; }
    bool operator==(const PlanePartition& o) const { return v == o.v; }
    bool operator<(const PlanePartition& o) const { return v < o.v; }
    // columnwise order
    bool leq(const PlanePartition& o) const
    {
        for (std::size_t c = 0; c < v.size(); ++c)
            if (v[c] > o.v[c]) return false;
        return true;
    }
    long cubes(int h1) const
    {
        long n = 0;
        for (int h : v) n += h - (h1 - 1);
        return n;
    }
};

inline PlanePartition make_partition(const BoxSpec& b, const std::vector<int>& heights)
{
    PlanePartition p;
    p.a1 = b.a1;
    p.a2 = b.a2;
    p.v = heights;
    return p;
}

inline bool is_monotone_grid(int a1, int a2, const std::vector<int>& v)
{
    for (int x = 1; x <= a1; ++x)
        for (int y = 1; y <= a2; ++y) {
            int h = v[std::size_t(x - 1) * a2 + (y - 1)];
            if (x < a1 && v[std::size_t(x) * a2 + (y - 1)] > h) return false;
            if (y < a2 && v[std::size_t(x - 1) * a2 + y] > h) return false;
        }
    return true;
}

inline void validate_box(const BoxSpec& b)
{
    if (b.a1 < 1 || b.a2 < 1 || b.h2 < b.h1) throw std::invalid_argument("box extents must be positive");
    if (b.floor.size() != b.columns() || b.ceiling.size() != b.columns())
        throw std::invalid_argument("floor/ceiling size does not match the box");
    for (std::size_t c = 0; c < b.columns(); ++c)
        if (b.floor[c] < b.h1 - 1 || b.ceiling[c] > b.h2 || b.floor[c] > b.ceiling[c])
            throw std::invalid_argument("floor/ceiling out of range");
    if (!is_monotone_grid(b.a1, b.a2, b.floor) || !is_monotone_grid(b.a1, b.a2, b.ceiling))
        throw std::invalid_argument("floor and ceiling must be plane partitions");
    if (b.dprime() < std::max(b.a1, b.a2)) throw std::invalid_argument("path half-length too small for the box");
}

inline bool is_valid(const PlanePartition& p, const BoxSpec& b)
{
    if (p.a1 != b.a1 || p.a2 != b.a2 || p.v.size() != b.columns()) return false;
    for (std::size_t c = 0; c < b.columns(); ++c)
        if (p.v[c] < b.floor[c] || p.v[c] > b.ceiling[c]) return false;
    return is_monotone_grid(b.a1, b.a2, p.v);
}

inline PlanePartition lowest(const BoxSpec& b) { return make_partition(b, b.floor); }
inline PlanePartition highest(const BoxSpec& b) { return make_partition(b, b.ceiling); }

// admissible heights of column (x, y) given all other columns
inline std::pair<int, int> admissible(const PlanePartition& p, const BoxSpec& b, int x, int y)
{
    std::size_t c = b.col(x, y);
    int lo = b.floor[c], hi = b.ceiling[c];
    if (x < b.a1) lo = std::max(lo, p.at(x + 1, y));
    if (y < b.a2) lo = std::max(lo, p.at(x, y + 1));
    if (x > 1) hi = std::min(hi, p.at(x - 1, y));
    if (y > 1) hi = std::min(hi, p.at(x, y - 1));
    return {lo, hi};
}

struct LatticePathBundle {
    int h1 = 1, h2 = 1;
    int length = 0;  // 2D'
    std::vector<int> phi;

    int paths() const { return h2 - h1 + 1; }
    int at(int j, int X) const { return phi[std::size_t(j - h1) * (length + 1) + X]; }
    int& at(int j, int X) { return phi[std::size_t(j - h1) * (length + 1) + X]; }
    bool operator==(const LatticePathBundle& o) const { return phi == o.phi; }
    // pointwise order over all paths
    bool leq(const LatticePathBundle& o) const
    {
        for (std::size_t k = 0; k < phi.size(); ++k)
            if (phi[k] > o.phi[k]) return false;
        return true;
    }
    long sum_at(int X) const
    {
        long s = 0;
        for (int j = h1; j <= h2; ++j) s += at(j, X);
        return s;
    }
};

// number of level-j cells on diagonal U = y - x
inline int diagonal_count(const PlanePartition& p, const BoxSpec& b, int j, int U)
{
    int n = 0;
    for (int x = std::max(1, 1 - U); x <= b.a1 && x + U <= b.a2; ++x)
        if (p.at(x, x + U) >= j) ++n;
    return n;
}

inline LatticePathBundle partition_to_paths(const PlanePartition& p, const BoxSpec& b)
{
    if (!is_valid(p, b)) throw std::invalid_argument("invalid plane partition");
    LatticePathBundle out;
    out.h1 = b.h1;
    out.h2 = b.h2;
    out.length = b.path_length();
    int Dp = b.dprime();
    out.phi.assign(std::size_t(out.paths()) * (out.length + 1), 0);
    for (int j = b.h1; j <= b.h2; ++j)
        for (int X = 0; X <= out.length; ++X) {
            int U = X - Dp;
            out.at(j, X) = j + Dp - std::abs(U) - 2 * diagonal_count(p, b, j, U);
        }
    return out;
}

inline bool is_valid_bundle(const LatticePathBundle& f, const BoxSpec& b)
{
    if (f.h1 != b.h1 || f.h2 != b.h2 || f.length != b.path_length()) return false;
    if (f.phi.size() != std::size_t(f.paths()) * (f.length + 1)) return false;
    for (int j = f.h1; j <= f.h2; ++j) {
        if (f.at(j, 0) != j || f.at(j, f.length) != j) return false;
        for (int X = 1; X <= f.length; ++X)
            if (std::abs(f.at(j, X) - f.at(j, X - 1)) != 1) return false;
        if (j > f.h1)
            for (int X = 0; X <= f.length; ++X)
                if (f.at(j - 1, X) >= f.at(j, X)) return false;
    }
    return true;
}

inline PlanePartition paths_to_partition(const LatticePathBundle& f, const BoxSpec& b)
{
    if (!is_valid_bundle(f, b)) throw std::invalid_argument("lattice paths violate endpoint, step or ordering constraints");
    int Dp = b.dprime();
    PlanePartition p = make_partition(b, std::vector<int>(b.columns(), b.h1 - 1));
    for (int j = b.h1; j <= b.h2; ++j)
        for (int X = 0; X <= f.length; ++X) {
            int U = X - Dp;
            int twice = j + Dp - std::abs(U) - f.at(j, X);
            int cells = std::max(0, std::min(b.a1, b.a2 - U) - std::max(1, 1 - U) + 1);
            if (twice < 0 || twice % 2 || twice / 2 > cells)
                throw std::invalid_argument("lattice paths do not describe cells inside the box");
            int n = twice / 2;
            // cells on a diagonal are ordered by distance from the corner (1,1)
            for (int k = 0, x = std::max(1, 1 - U); k < n; ++k, ++x) p.at(x, x + U) = std::max(p.at(x, x + U), j);
        }
    if (!is_valid(p, b) || !(partition_to_paths(p, b) == f))
        throw std::invalid_argument("lattice paths do not correspond to a plane partition within the bounds");
    return p;
}

// All partitions between floor and ceiling, in lexicographic order of the height vector.
inline std::vector<PlanePartition> enumerate_partitions(const BoxSpec& b, std::size_t limit = 100000)
{
    validate_box(b);
    std::vector<PlanePartition> out;
    PlanePartition p = lowest(b);
    std::function<void(std::size_t)> rec = [&](std::size_t c) {
        if (c == b.columns()) {
            if (out.size() >= limit) throw std::length_error("too many partitions for exhaustive enumeration");
            out.push_back(p);
            return;
        }
        int x = int(c / b.a2) + 1, y = int(c % b.a2) + 1;
        int hi = b.ceiling[c];
        if (x > 1) hi = std::min(hi, p.at(x - 1, y));
        if (y > 1) hi = std::min(hi, p.at(x, y - 1));
        for (int h = b.floor[c]; h <= hi; ++h) {
            p.v[c] = h;
            rec(c + 1);
        }
        p.v[c] = b.floor[c];
    };
    rec(0);
    return out;
}

// MacMahon's count of plane partitions in an a x b x c box
inline double macmahon(int a, int b, int c)
{
    double r = 1;
    for (int i = 1; i <= a; ++i)
        for (int j = 1; j <= b; ++j)
            for (int k = 1; k <= c; ++k) r *= double(i + j + k - 1) / double(i + j + k - 2);
    // the product is an integer; drop the accumulated rounding while it is exactly representable
    return r < 9007199254740992.0 ? std::round(r) : r;
}

// u < 1/2 proposes a step down, otherwise a step up; blocked proposals leave v unchanged.
inline void local_update(PlanePartition& p, const BoxSpec& b, int x, int y, double u)
{
    if (x < 1 || x > b.a1 || y < 1 || y > b.a2) throw std::out_of_range("column outside the box");
    auto [lo, hi] = admissible(p, b, x, y);
    int& h = p.at(x, y);
    if (u < 0.5) {
        if (h - 1 >= lo) --h;
    } else {
        if (h + 1 <= hi) ++h;
    }
}

inline int column_parity(int x, int y) { return ((x - y) % 2 + 2) % 2; }

// Resample every column with (x - y) % 2 == parity uniformly on its admissible interval.
// Column c uses the variate u[c] through the quantile map, which is monotone in the interval
// endpoints, so coupled copies fed the same variates stay ordered.
inline void column_resample(PlanePartition& p, const BoxSpec& b, int parity, const std::vector<double>& u)
{
    for (int x = 1; x <= b.a1; ++x)
        for (int y = 1; y <= b.a2; ++y) {
            if (column_parity(x, y) != parity) continue;
            auto [lo, hi] = admissible(p, b, x, y);
            int k = static_cast<int>(u[b.col(x, y)] * (hi - lo + 1));
            p.at(x, y) = lo + std::min(k, hi - lo);
        }
}

inline void column_resample(PlanePartition& p, const BoxSpec& b, int parity, Engine& g)
{
    std::vector<double> u(b.columns());
    for (double& w : u) w = uniform01(g);
    column_resample(p, b, parity, u);
}

// Right-hand side of the conditional-mean identity at position X:
// 1/2 sum_j (phi_{X-1} + phi_{X+1}) + sum_j (1{A+(j,X)} - 1{A-(j,X)}), where
// A-(j,X) = {phi_X = phi^-_X < phi_{X-1} = phi_{X+1}} and A+(j,X) = {phi_X = phi^+_X > phi_{X-1} = phi_{X+1}}.
inline double conditional_mean_rhs(const LatticePathBundle& f, const LatticePathBundle& upper_bound,
                                   const LatticePathBundle& lower_bound, int X)
{
    double s = 0;
    for (int j = f.h1; j <= f.h2; ++j) {
        int l = f.at(j, X - 1), r = f.at(j, X + 1), c = f.at(j, X);
        s += 0.5 * (l + r);
        if (l == r) {
            if (c == lower_bound.at(j, X) && c > l) s += 1;
            if (c == upper_bound.at(j, X) && c < l) s -= 1;
        }
    }
    return s;
}

} // namespace isinglab
