#pragma once

// Lower-bound side in d = 3: the discrete heat equation
//     du/dt = (u(x+1) + u(x-1) - 2u(x)) / 2,   x = 1..L-1,   u(t,0) = u(t,L) = 0,
// started from the tent u(0,x) = min(x, L-x), its exclusion-process dual, the random walk
// comparisons that bound 1 - u(t,L-1), and the column dynamics of a cube whose averaged
// height profile follows u.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "parallel.hpp"
#include "plane_partition.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace isinglab {

struct HeatState {
    int L = 0;
    double t = 0;
    std::vector<double> u;  // x = 0..L
};

inline double heat_initial(int L, int x) { return x <= L / 2 ? double(x) : double(L - x); }

inline void check_heat_size(int L)
{
    if (L < 2 || L % 2) throw std::invalid_argument("L must be even and at least 2");
}

// sine expansion: modes sin(k pi x / L) decay at rate 1 - cos(k pi / L)
inline HeatState heat_solve(int L, double t)
{
    check_heat_size(L);
    if (t < 0) throw std::invalid_argument("t must be non-negative");
    HeatState s{L, t, std::vector<double>(L + 1, 0.0)};
    if (t == 0) {
        for (int x = 0; x <= L; ++x) s.u[x] = heat_initial(L, x);
        return s;
    }
    const double pi = std::numbers::pi;
    for (int k = 1; k < L; ++k) {
        double decay = std::exp(-(1 - std::cos(k * pi / L)) * t);
        if (decay == 0) break;  // rates increase with k
        double b = 0;
        for (int x = 1; x < L; ++x) b += heat_initial(L, x) * std::sin(k * pi * x / L);
        b *= 2.0 / L * decay;
        for (int x = 1; x < L; ++x) s.u[x] += b * std::sin(k * pi * x / L);
    }
    return s;
}

// classical RK4 on the same system, used as an independent check of the expansion
inline HeatState heat_solve_rk4(int L, double t, double h = 0.1)
{
    check_heat_size(L);
    if (t < 0 || !(h > 0)) throw std::invalid_argument("need t >= 0 and h > 0");
    Eigen::VectorXd u(L + 1);
    for (int x = 0; x <= L; ++x) u[x] = heat_initial(L, x);
    auto rhs = [L](const Eigen::VectorXd& v) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(L + 1);
        for (int x = 1; x < L; ++x) d[x] = 0.5 * (v[x + 1] + v[x - 1] - 2 * v[x]);
        return d;
    };
    long n = long(std::ceil(t / h - 1e-12));
    double dt = n > 0 ? t / n : 0;
    for (long i = 0; i < n; ++i) {
        Eigen::VectorXd k1 = rhs(u), k2 = rhs(u + 0.5 * dt * k1), k3 = rhs(u + 0.5 * dt * k2), k4 = rhs(u + dt * k3);
        u += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return {L, t, std::vector<double>(u.data(), u.data() + L + 1)};
}

// c' in 1 - u(t, L-1) <= c' L exp(-L^2 / (32 t)). Calibrated on L in {32, 64, 128} and
// t / L^2 in [1/64, 1/4]: the largest ratio seen is 0.022, and 0.072 for the walk bound 2 P4
inline constexpr double kHeatTailConstant = 0.1;

struct HeatTail {
    double lhs = 0;    // 1 - u(t, L-1)
    double scale = 0;  // L exp(-L^2/(32 t))
    double bound = 0;  // c' * scale
    double ratio = 0;  // lhs / scale
    bool holds = false;
};

inline HeatTail heat_tail_check(int L, double t, double c = kHeatTailConstant)
{
    if (!(t > 0)) throw std::invalid_argument("t must be positive");
    HeatState s = heat_solve(L, t);
    HeatTail r;
    r.lhs = 1 - s.u[L - 1];
    r.scale = L * std::exp(-double(L) * L / (32 * t));
    r.bound = c * r.scale;
    r.ratio = r.scale > 0 ? r.lhs / r.scale : (r.lhs > 0 ? INFINITY : 0.0);
    r.holds = r.lhs <= r.bound;
    return r;
}

// (1 + u(t,x) - u(t,x-1)) / 2 for x = 1..L; index x-1
inline std::vector<double> ssep_density(const HeatState& s)
{
    std::vector<double> p(s.L);
    for (int x = 1; x <= s.L; ++x) p[x - 1] = 0.5 * (1 + s.u[x] - s.u[x - 1]);
    return p;
}

struct SSEPProfile {
    int L = 0;
    double t = 0;
    long replicas = 0;
    std::vector<double> empirical, expected, sigma;  // sites 1..L at index x-1
    std::vector<double> z;  // continuity-corrected binomial z-score per site
    double max_z = 0;
    long conservation_violations = 0;
    bool within(double nsigma = 4) const { return max_z <= nsigma && conservation_violations == 0; }
};

// Exclusion on {1..L}: every particle carries a rate-1 clock and tries a neighbour chosen with
// probability 1/2; the jump is suppressed if the target is occupied or outside. Initially sites
// x <= L/2 are occupied.
inline SSEPProfile ssep_simulate(int L, double t, long replicas, std::uint64_t seed)
{
    check_heat_size(L);
    if (t < 0 || replicas < 1) throw std::invalid_argument("need t >= 0 and at least one replica");
    std::vector<std::vector<unsigned char>> final(replicas);
    std::vector<long> bad(replicas, 0);
    parallel_for(std::size_t(replicas), [&](std::size_t r) {
        Engine g(derive_seed(seed, r));
        std::vector<unsigned char> occ(L + 2, 0);
        for (int x = 1; x <= L / 2; ++x) occ[x] = 1;
        // site clocks of total rate L; an empty site's ring does nothing
        double now = exponential(g, L);
        while (now <= t) {
            int x = 1 + int(uniform_index(g, L));
            int y = uniform01(g) < 0.5 ? x - 1 : x + 1;
            if (occ[x] && y >= 1 && y <= L && !occ[y]) {
                occ[x] = 0;
                occ[y] = 1;
            }
            now += exponential(g, L);
        }
        int n = 0;
        for (int x = 1; x <= L; ++x) n += occ[x];
        if (n != L / 2) ++bad[r];
        final[r].assign(occ.begin() + 1, occ.begin() + 1 + L);
    });
    SSEPProfile p;
    p.L = L;
    p.t = t;
    p.replicas = replicas;
    p.expected = ssep_density(heat_solve(L, t));
    for (long b : bad) p.conservation_violations += b;
    for (int i = 0; i < L; ++i) {
        long c = 0;
        for (long r = 0; r < replicas; ++r) c += final[r][i];
        double q = p.expected[i], n = double(replicas);
        double sd = std::sqrt(n * q * (1 - q));
        double dev = std::max(0.0, std::abs(c - n * q) - 0.5);
        double z = sd > 0 ? dev / sd : (std::abs(c - n * q) < 1e-9 ? 0.0 : INFINITY);
        p.empirical.push_back(c / n);
        p.sigma.push_back(sd / n);
        p.z.push_back(z);
        p.max_z = std::max(p.max_z, z);
    }
    return p;
}

namespace detail {

// continuous-time walk of rate 1 on n consecutive states: each ring picks a neighbour with
// probability 1/2. At an end the outward jump is suppressed (reflecting) or kills the walk
// (absorbing). Returns the law at time t from start index s.
inline Eigen::VectorXd walk_law(int n, int s, double t, bool absorbing)
{
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        Q(i, i) = -1;
        if (i > 0) Q(i, i - 1) = 0.5;
        if (i + 1 < n) Q(i, i + 1) = 0.5;
    }
    if (!absorbing) {
        Q(0, 0) += 0.5;
        Q(n - 1, n - 1) += 0.5;
    }
    // Q is symmetric in both cases
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    Eigen::VectorXd e = (es.eigenvalues() * t).array().exp();
    Eigen::VectorXd row = es.eigenvectors().row(s).transpose();
    return es.eigenvectors() * (e.asDiagonal() * row);
}

// P(sup_{s<=t} (X_0 - X_s) >= m) for the free walk: reflection plus Chernoff,
// 2 exp(-m asinh(m/t) + t (sqrt(1 + (m/t)^2) - 1))
inline double walk_excursion_bound(double m, double t)
{
    double r = m / t;
    return std::min(1.0, 2 * std::exp(-m * std::asinh(r) + t * (std::sqrt(1 + r * r) - 1)));
}

} // namespace detail

struct WalkChain {
    int L = 0;
    double t = 0;
    // P1 on {1..L} from L; P2 on (-inf, L] from L; P3 on (-inf, L] from 3L/4 (all of X_t <= L/2);
    // P4 = P(the free walk from 0 reaches distance L/4 before t)
    double p1 = 0, p2 = 0, p3 = 0, p4 = 0;
    double truncation = 0;  // bound on the error of p2, p3 from cutting the half line at 8L states
    double heat_dual = 0;   // (1 - u(t, L-1)) / 2, which equals p1
    bool monotone = false;
};

inline WalkChain rw_tail_chain(int L, double t)
{
    if (L < 4 || L % 4) throw std::invalid_argument("L must be a positive multiple of 4");
    if (!(t > 0)) throw std::invalid_argument("t must be positive");
    WalkChain c;
    c.L = L;
    c.t = t;
    auto below = [&](const Eigen::VectorXd& law, int first) {
        // states are first, first+1, ...; sum the mass at positions <= L/2
        double s = 0;
        for (int i = 0; i < law.size() && first + i <= L / 2; ++i) s += law[i];
        return std::clamp(s, 0.0, 1.0);
    };
    c.p1 = below(detail::walk_law(L, L - 1, t, false), 1);
    int n = 8 * L, first = L - n + 1;
    c.p2 = below(detail::walk_law(n, L - first, t, false), first);
    c.p3 = below(detail::walk_law(n, 3 * L / 4 - first, t, false), first);
    int q = L / 4;
    Eigen::VectorXd kept = detail::walk_law(2 * q - 1, q - 1, t, true);
    c.p4 = std::clamp(1 - kept.sum(), 0.0, 1.0);
    c.truncation = detail::walk_excursion_bound(double(3 * L / 4 - first), t);
    c.heat_dual = 0.5 * (1 - heat_solve(L, t).u[L - 1]);
    double slack = c.truncation + 1e-12;
    c.monotone = c.p1 <= c.p2 + slack && c.p2 <= c.p3 + slack && c.p3 <= c.p4 + slack;
    return c;
}

struct ColdynReport {
    int L = 0;
    double t = 0;  // heat time; the dynamics runs for t/2
    long replicas = 0;
    std::vector<double> mean, sigma, heat;  // x = 0..L
    double max_dev = 0, max_z = 0;
    // P(phi^(1)_{L-1} = 0) at time t/2, i.e. the spin next to the corner is +, and its upper bound
    double corner = 0, corner_sigma = 0, corner_bound = 0;
    bool within(double nsigma = 4) const { return max_z <= nsigma; }
};

inline BoxSpec coldyn_box(int L)
{
    check_heat_size(L);
    return BoxSpec::uniform(L / 2, L / 2, L / 2);
}

// h_x = (2/L) sum_j (phi^(j)_x - j)
inline std::vector<double> coldyn_height(const PlanePartition& p, const BoxSpec& b)
{
    LatticePathBundle f = partition_to_paths(p, b);
    int L = f.length;
    long js = 0;
    for (int j = b.h1; j <= b.h2; ++j) js += j;
    std::vector<double> h(L + 1);
    for (int x = 0; x <= L; ++x) h[x] = 2.0 / L * double(f.sum_at(x) - js);
    return h;
}

// Every column of cubes carries a rate-2 clock and is resampled uniformly on its admissible
// interval given its neighbours; the monotone set starts empty.
inline ColdynReport coldyn_profile(int L, double t, long replicas, std::uint64_t seed)
{
    if (t < 0 || replicas < 2) throw std::invalid_argument("need t >= 0 and at least two replicas");
    BoxSpec b = coldyn_box(L);
    double horizon = t / 2;
    std::vector<std::vector<double>> h(replicas);
    std::vector<double> corner(replicas);
    parallel_for(std::size_t(replicas), [&](std::size_t r) {
        Engine g(derive_seed(seed, r));
        PlanePartition p = lowest(b);
        double rate = 2.0 * double(b.columns());
        for (double now = exponential(g, rate); now <= horizon; now += exponential(g, rate)) {
            std::size_t c = uniform_index(g, b.columns());
            int x = int(c / b.a2) + 1, y = int(c % b.a2) + 1;
            auto [lo, hi] = admissible(p, b, x, y);
            p.at(x, y) = lo + int(std::min<std::size_t>(uniform_index(g, std::size_t(hi - lo + 1)), std::size_t(hi - lo)));
        }
        h[r] = coldyn_height(p, b);
        corner[r] = partition_to_paths(p, b).at(b.h1, L - 1) == 0 ? 1.0 : 0.0;
    });
    ColdynReport rep;
    rep.L = L;
    rep.t = t;
    rep.replicas = replicas;
    rep.heat = heat_solve(L, t).u;
    for (int x = 0; x <= L; ++x) {
        std::vector<double> col(replicas);
        for (long r = 0; r < replicas; ++r) col[r] = h[r][x];
        MeanSe ms = mean_se(col);
        rep.mean.push_back(ms.mean);
        rep.sigma.push_back(ms.se);
        double dev = std::abs(ms.mean - rep.heat[x]);
        rep.max_dev = std::max(rep.max_dev, dev);
        // endpoints and t = 0 are deterministic; allow rounding there
        double z = ms.se > 0 ? dev / ms.se : (dev < 1e-9 ? 0.0 : INFINITY);
        rep.max_z = std::max(rep.max_z, z);
    }
    MeanSe cs = mean_se(corner);
    rep.corner = cs.mean;
    rep.corner_sigma = cs.se;
    rep.corner_bound = L / 2.0 * (1 - rep.heat[L - 1]) / 2;
    return rep;
}

} // namespace isinglab
