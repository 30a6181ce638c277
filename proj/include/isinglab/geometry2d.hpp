#pragma once

// Two-dimensional contour geometry of the minus region: majority transform,
// contour of the union of unit squares, the good set, flippable-site classes.
// Sites outside the domain and its boundary layer read as +.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "lattice.hpp"

namespace isinglab {

struct GeometryReport {
    long contour_length = 0;
    bool simple = false;
    std::array<double, 2> u_max{0, 0};
    std::array<double, 2> u_min{0, 0};
    long minus_count = 0;
    int mountains = 0;
    int valleys = 0;
    int vertices = 0;
    bool length_identity = false;
    bool core_inside = false;
    bool majority_fixed = false;
    bool good = false;
};

inline void require_2d(const SpinConfig& s)
{
    if (s.domain().dim() != 2) throw std::invalid_argument("planar geometry needs a two-dimensional domain");
}

inline int value_at(const SpinConfig& s, const Site& x)
{
    long i = s.domain().index_of(x);
    if (i >= 0) return s.spin(i);
    int b = s.domain().boundary_at(x);
    return b != 0 ? b : 1;
}

// Repeatedly flip "-" spins having at least three "+" neighbours.
inline SpinConfig majority_transform(SpinConfig s)
{
    require_2d(s);
    const Domain& dom = s.domain();
    std::vector<std::size_t> work;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.spin(i) < 0 && s.neighbor_sum(i) >= 2) work.push_back(i);
    while (!work.empty()) {
        std::size_t i = work.back();
        work.pop_back();
        if (s.spin(i) > 0 || s.neighbor_sum(i) < 2) continue;
        s.set(i, 1);
        for (int k = 0; k < 4; ++k) {
            int j = dom.neighbor(i, k);
            if (j >= 0 && s.spin(j) < 0 && s.neighbor_sum(j) >= 2) work.push_back(j);
        }
    }
    return s;
}

inline bool is_majority_fixed(const SpinConfig& s)
{
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.spin(i) < 0 && s.neighbor_sum(i) >= 2) return false;
    return true;
}

// radius of the core diamond D = {|x1|+|x2| <= r}
inline int core_radius(int L, double fraction) { return static_cast<int>(std::floor(fraction * L + 1e-12)); }

// true when every site of D (and, with ring = true, of its outer boundary) is "-"
inline bool core_minus(const SpinConfig& s, double fraction, bool ring)
{
    const Domain& dom = s.domain();
    int r = core_radius(dom.L(), fraction) + (ring ? 1 : 0);
    for (int x = -r; x <= r; ++x)
        for (int y = -(r - std::abs(x)); y <= r - std::abs(x); ++y)
            if (value_at(s, {x, y, 0}) > 0) return false;
    return true;
}

struct Contour {
    long length = 0;
    bool simple = false;
};

// Boundary of the union of unit squares centred at minus sites.
inline Contour contour(const SpinConfig& s)
{
    require_2d(s);
    const Domain& dom = s.domain();
    Site lo = dom.lo(), ext = dom.extent();
    // corner (x+1/2, y+1/2) -> (x - lo0, y - lo1)
    int nx = ext[0], ny = ext[1];
    std::vector<std::array<int, 2>> adj(std::size_t(nx) * ny, {-1, -1});
    std::vector<unsigned char> deg(std::size_t(nx) * ny, 0);
    auto corner = [&](int x, int y) { return (y - lo[1]) * nx + (x - lo[0]); };
    Contour c;
    bool bad = false;
    auto add_edge = [&](int a, int b) {
        ++c.length;
        for (int v : {a, b}) {
            if (deg[v] >= 2) {
                bad = true;
                ++deg[v];
                continue;
            }
            adj[v][deg[v]++] = (v == a ? b : a);
        }
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.spin(i) > 0) continue;
        const Site& p = dom.site(i);
        int x = p[0], y = p[1];
        if (value_at(s, {x + 1, y, 0}) > 0) add_edge(corner(x, y - 1), corner(x, y));
        if (value_at(s, {x - 1, y, 0}) > 0) add_edge(corner(x - 1, y - 1), corner(x - 1, y));
        if (value_at(s, {x, y + 1, 0}) > 0) add_edge(corner(x - 1, y), corner(x, y));
        if (value_at(s, {x, y - 1, 0}) > 0) add_edge(corner(x - 1, y - 1), corner(x, y - 1));
    }
    if (c.length == 0 || bad) return c;
    for (unsigned char d : deg)
        if (d != 0 && d != 2) return c;
    // walk the cycle through the first corner and compare with the edge count
    long prev = -1, cur = -1, steps = 0;
    for (std::size_t v = 0; v < deg.size(); ++v)
        if (deg[v] == 2) {
            cur = static_cast<long>(v);
            break;
        }
    long start = cur;
    do {
        long nxt = adj[cur][0] != prev ? adj[cur][0] : adj[cur][1];
        if (adj[cur][0] == adj[cur][1]) nxt = adj[cur][0];
        prev = cur;
        cur = nxt;
        ++steps;
    } while (cur != start && steps <= c.length);
    c.simple = (steps == c.length);
    return c;
}

// x is flippable when its two "+" neighbours sit at distance sqrt(2) and the other two are "-"
inline bool flippable_at(const SpinConfig& s, const Site& p)
{
    int e = value_at(s, {p[0] + 1, p[1], 0}), w = value_at(s, {p[0] - 1, p[1], 0});
    int n = value_at(s, {p[0], p[1] + 1, 0}), so = value_at(s, {p[0], p[1] - 1, 0});
    return e + w + n + so == 0 && e != w;
}

inline bool flippable(const SpinConfig& s, std::size_t i) { return flippable_at(s, s.domain().site(i)); }

// Valleys: flippable "+" sites adjacent to M. Sites of the outer boundary layer count too,
// since the contour identities are statements about the geometry of M.
inline int count_valleys(const SpinConfig& s)
{
    const Domain& dom = s.domain();
    std::vector<Site> cand;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.spin(i) > 0) continue;
        for (int k = 0; k < 4; ++k) {
            Site y = shifted(dom.site(i), k);
            if (value_at(s, y) > 0) cand.push_back(y);
        }
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    int v = 0;
    for (const Site& y : cand) v += flippable_at(s, y);
    return v;
}

struct GoodSetCheck {
    Contour c;
    std::array<int, 2> mmax{0, 0}, mmin{0, 0};
    long minus = 0;
    bool identity = false;
    bool core = false;
    bool fixed = false;
    bool good = false;
};

inline GoodSetCheck check_good(const SpinConfig& s, double fraction)
{
    GoodSetCheck g;
    g.c = contour(s);
    bool any = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.spin(i) > 0) continue;
        const Site& p = s.domain().site(i);
        ++g.minus;
        for (int a = 0; a < 2; ++a) {
            if (!any || p[a] > g.mmax[a]) g.mmax[a] = p[a];
            if (!any || p[a] < g.mmin[a]) g.mmin[a] = p[a];
        }
        any = true;
    }
    long width = any ? 2L * ((g.mmax[0] - g.mmin[0] + 1) + (g.mmax[1] - g.mmin[1] + 1)) : 0;
    g.identity = any && g.c.length == width;
    g.core = core_minus(s, fraction, false);
    g.fixed = is_majority_fixed(s);
    g.good = g.c.simple && g.identity && g.core && g.fixed;
    return g;
}

inline bool in_good_set(const SpinConfig& s, double fraction = 0.9) { return check_good(s, fraction).good; }

struct SiteClasses {
    int mountains = 0, valleys = 0, vertices = 0;
};

// Classification straight from the definitions (full re-check of every flipped state).
inline SiteClasses classify_sites_reference(const SpinConfig& s, double fraction)
{
    SiteClasses k;
    k.valleys = count_valleys(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.spin(i) > 0 || !flippable(s, i)) continue;
        SpinConfig t = s;
        t.flip(i);
        if (in_good_set(t, fraction))
            ++k.mountains;
        else if (!(majority_transform(t) == t))
            ++k.vertices;
    }
    return k;
}

// Local rule valid for s in the good set.  With a, b the "-" neighbours of a flippable
// x in M and d = a + b - x the diagonal between them: x is a vertex iff a or b gets three
// "+" neighbours after the flip; otherwise x is a mountain iff d is "-" and x is not in D.
inline SiteClasses classify_sites_local(const SpinConfig& s, double fraction)
{
    SiteClasses k;
    k.valleys = count_valleys(s);
    const Domain& dom = s.domain();
    int r = core_radius(dom.L(), fraction);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.spin(i) > 0 || !flippable(s, i)) continue;
        const Site& p = dom.site(i);
        Site m[2];
        int nm = 0;
        for (int q = 0; q < 4; ++q) {
            Site y = shifted(p, q);
            if (value_at(s, y) < 0) m[nm++] = y;
        }
        bool vertex = false;
        for (int q = 0; q < 2; ++q) {
            long j = dom.index_of(m[q]);
            if (j >= 0 && s.neighbor_sum(j) + 2 >= 2) vertex = true;
        }
        if (vertex) {
            ++k.vertices;
            continue;
        }
        Site d{m[0][0] + m[1][0] - p[0], m[0][1] + m[1][1] - p[1], 0};
        bool in_core = std::abs(p[0]) + std::abs(p[1]) <= r;
        if (value_at(s, d) < 0 && !in_core) ++k.mountains;
    }
    return k;
}

inline GeometryReport classify_geometry(const SpinConfig& s, double fraction = 0.9)
{
    require_2d(s);
    GoodSetCheck g = check_good(s, fraction);
    GeometryReport r;
    r.contour_length = g.c.length;
    r.simple = g.c.simple;
    r.minus_count = g.minus;
    if (g.minus > 0)
        for (int a = 0; a < 2; ++a) {
            r.u_max[a] = g.mmax[a] + 0.5;
            r.u_min[a] = g.mmin[a] - 0.5;
        }
    r.length_identity = g.identity;
    r.core_inside = g.core;
    r.majority_fixed = g.fixed;
    r.good = g.good;
    SiteClasses k = g.good ? classify_sites_local(s, fraction) : classify_sites_reference(s, fraction);
    r.mountains = k.mountains;
    r.valleys = k.valleys;
    r.vertices = k.vertices;
    return r;
}

} // namespace isinglab
