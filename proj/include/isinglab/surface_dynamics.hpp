#pragma once

// Dynamics of monotone surfaces: grand coupling of the extremal partitions under the local
// (single column) and the odd/even column dynamics, the drift functional Phi, and the
// correspondence with the zero-temperature Ising dynamics in three dimensions.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "glauber.hpp"
#include "lattice.hpp"
#include "parallel.hpp"
#include "plane_partition.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace isinglab {

enum class SurfaceDynamics { local, column };

// One step of the chosen dynamics applied to every member with shared randomness.
// local: a uniform column gets a +-1 proposal (global rate a1*a2).
// column: one clock of rate 1; a fair coin picks the parity class, then all its columns resample.
class SurfaceStepper {
public:
    SurfaceStepper(const BoxSpec& b, SurfaceDynamics dyn, std::uint64_t seed)
        : box_(b), dyn_(dyn), g_(seed), u_(b.columns())
    {
        validate_box(b);
    }

    double rate() const { return dyn_ == SurfaceDynamics::local ? double(box_.columns()) : 1.0; }

    template <class Members>
    double step(Members& members)
    {
        t_ += exponential(g_, rate());
        if (dyn_ == SurfaceDynamics::local) {
            std::size_t c = uniform_index(g_, box_.columns());
            double u = uniform01(g_);
            int x = int(c / box_.a2) + 1, y = int(c % box_.a2) + 1;
            for (PlanePartition& p : members) local_update(p, box_, x, y, u);
        } else {
            int parity = uniform01(g_) < 0.5 ? 0 : 1;
            for (double& w : u_) w = uniform01(g_);
            for (PlanePartition& p : members) column_resample(p, box_, parity, u_);
        }
        return t_;
    }
    double time() const { return t_; }

private:
    BoxSpec box_;
    SurfaceDynamics dyn_;
    Engine g_;
    std::vector<double> u_;
    double t_ = 0;
};

struct SurfaceCoupling {
    double time = 0;
    bool coalesced = false;
    long steps = 0;
    long order_violations = 0;
    long invalid_states = 0;
};

// Coalescence time of the copies started from floor and ceiling.
inline SurfaceCoupling coupling_time(const BoxSpec& b, SurfaceDynamics dyn, std::uint64_t seed, double horizon = 1e9,
                                     bool check_each_step = false)
{
    SurfaceStepper st(b, dyn, seed);
    std::vector<PlanePartition> m{lowest(b), highest(b)};
    SurfaceCoupling r;
    if (m[0] == m[1]) {
        r.coalesced = true;
        return r;
    }
    while (true) {
        double t = st.step(m);
        ++r.steps;
        if (t > horizon) {
            r.time = horizon;
            return r;
        }
        if (!m[0].leq(m[1])) ++r.order_violations;
        if (check_each_step)
            for (const PlanePartition& p : m)
                if (!is_valid(p, b)) ++r.invalid_states;
        if (m[0] == m[1]) {
            r.time = t;
            r.coalesced = true;
            return r;
        }
    }
}

// g(X) = sin(pi X / 2D'), the principal Dirichlet eigenvector of the path Laplacian
inline std::vector<double> drift_weight(int dprime)
{
    std::vector<double> g(std::size_t(2 * dprime) + 1);
    for (int X = 0; X <= 2 * dprime; ++X) g[X] = std::sin(std::numbers::pi * X / (2.0 * dprime));
    return g;
}

inline double drift_kappa(int dprime) { return 1.0 - std::cos(std::numbers::pi / (2.0 * dprime)); }

// max_X |(Delta g)(X) + kappa g(X)| over interior X, Delta f(X) = (f(X-1)+f(X+1))/2 - f(X)
inline double drift_eigen_residual(int dprime)
{
    std::vector<double> g = drift_weight(dprime);
    double k = drift_kappa(dprime), worst = 0;
    for (int X = 1; X < 2 * dprime; ++X)
        worst = std::max(worst, std::abs(0.5 * (g[X - 1] + g[X + 1]) - g[X] + k * g[X]));
    return worst;
}

// Phi(phi) = sum_X g(X) sum_j phi^(j)_X
inline double phi_functional(const LatticePathBundle& f, const std::vector<double>& g)
{
    double s = 0;
    for (int X = 0; X <= f.length; ++X) s += g[X] * double(f.sum_at(X));
    return s;
}

// Phi(paths(lo)) - Phi(paths(hi)) for partitions lo <= hi without building the paths:
// sum_j phi^(j)_X differs by 2 sum over columns on diagonal X - D' of the height difference.
inline double phi_gap(const PlanePartition& lo, const PlanePartition& hi, const BoxSpec& b, const std::vector<double>& g)
{
    int Dp = b.dprime();
    double s = 0;
    for (int x = 1; x <= b.a1; ++x)
        for (int y = 1; y <= b.a2; ++y) s += g[Dp + y - x] * double(hi.at(x, y) - lo.at(x, y));
    return 2.0 * s;
}

struct DriftReport {
    double kappa = 0;
    double u0 = 0;
    double volume = 0;  // |V+ \ V-|
    std::vector<double> times, mean, sigma, bound;
    std::vector<bool> bound_ok;
    // per interval: u(t_{k+1}) - u(t_k) e^{-kappa dt/2} and its standard error
    std::vector<double> step_excess, step_sigma;
    long order_violations = 0;
    bool all_ok = true;
    bool drift_ok = true;
};

inline DriftReport wilson_drift(const BoxSpec& b, std::size_t replicas, const std::vector<double>& checkpoints, std::uint64_t seed,
                                double nsigma = 3.0)
{
    validate_box(b);
    if (checkpoints.empty() || replicas < 2) throw std::invalid_argument("need checkpoints and at least two replicas");
    int Dp = b.dprime();
    std::vector<double> g = drift_weight(Dp);
    DriftReport r;
    r.kappa = drift_kappa(Dp);
    r.u0 = phi_gap(lowest(b), highest(b), b, g);
    for (std::size_t c = 0; c < b.columns(); ++c) r.volume += b.ceiling[c] - b.floor[c];
    std::size_t K = checkpoints.size();
    std::vector<std::vector<double>> val(replicas, std::vector<double>(K));
    std::vector<long> viol(replicas, 0);
    parallel_for(replicas, [&](std::size_t rep) {
        SurfaceStepper st(b, SurfaceDynamics::column, derive_seed(seed, rep));
        std::vector<PlanePartition> m{lowest(b), highest(b)};
        std::size_t k = 0;
        while (k < K) {
            // the pair is constant until the next ring
            double now = phi_gap(m[0], m[1], b, g);
            double next = st.step(m);
            for (; k < K && checkpoints[k] < next; ++k) val[rep][k] = now;
            if (!m[0].leq(m[1])) ++viol[rep];
        }
    });
    for (long v : viol) r.order_violations += v;
    r.times = checkpoints;
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> col(replicas);
        for (std::size_t rep = 0; rep < replicas; ++rep) col[rep] = val[rep][k];
        MeanSe ms = mean_se(col);
        double bd = r.u0 * std::exp(-r.kappa * checkpoints[k] / 2.0);
        r.mean.push_back(ms.mean);
        r.sigma.push_back(ms.se);
        r.bound.push_back(bd);
        bool ok = ms.mean <= bd + nsigma * ms.se + 1e-9 * r.u0;
        r.bound_ok.push_back(ok);
        r.all_ok = r.all_ok && ok;
        if (k > 0) {
            double f = std::exp(-r.kappa * (checkpoints[k] - checkpoints[k - 1]) / 2.0);
            std::vector<double> d(replicas);
            for (std::size_t rep = 0; rep < replicas; ++rep) d[rep] = val[rep][k] - f * val[rep][k - 1];
            MeanSe md = mean_se(d);
            r.step_excess.push_back(md.mean);
            r.step_sigma.push_back(md.se);
            if (md.mean > nsigma * md.se + 1e-9 * r.u0) r.drift_ok = false;
        }
    }
    return r;
}

// Sites between floor and ceiling, as points of Z^3 (third coordinate = height level).
inline std::vector<Site> surface_sites(const BoxSpec& b)
{
    std::vector<Site> out;
    for (int x = 1; x <= b.a1; ++x)
        for (int y = 1; y <= b.a2; ++y)
            for (int z = b.floor[b.col(x, y)] + 1; z <= b.ceiling[b.col(x, y)]; ++z) out.push_back({x, y, z});
    return out;
}

// Ising domain Lambda = V+ \ V- with "-" on V- and on sites with a non-positive coordinate, "+" elsewhere
inline DomainPtr surface_domain(const BoxSpec& b)
{
    validate_box(b);
    if (b.h1 != 1) throw std::invalid_argument("the Ising embedding needs heights starting at level 1");
    DomainSpec spec;
    spec.shape = Shape::explicit_sites;
    spec.dim = 3;
    spec.sites = surface_sites(b);
    spec.boundary = [b](const Site& z) {
        if (z[0] <= 0 || z[1] <= 0 || z[2] <= 0) return -1;
        if (z[0] <= b.a1 && z[1] <= b.a2 && z[2] <= b.floor[b.col(z[0], z[1])]) return -1;
        return +1;
    };
    return build_domain(spec);
}

// Monotone-set dynamics on the cube set V (V- inside, V+ outside): a clock ring at z with
// variate u removes z when it is removable and u < 1/2, adds it when addable and u >= 1/2.
class MonotoneSet {
public:
    explicit MonotoneSet(const BoxSpec& b) : b_(b), p_(lowest(b)) {}

    bool contains(const Site& z) const
    {
        if (z[0] <= 0 || z[1] <= 0 || z[2] <= 0) return true;
        if (z[0] > b_.a1 || z[1] > b_.a2) return false;
        return z[2] <= p_.at(z[0], z[1]);
    }
    void update(const Site& z, double u)
    {
        bool in = contains(z);
        if (in && u < 0.5) {
            for (int a = 0; a < 3; ++a) {
                Site w = z;
                ++w[a];
                if (contains(w)) return;
            }
            --p_.at(z[0], z[1]);
        } else if (!in && u >= 0.5) {
            for (int a = 0; a < 3; ++a) {
                Site w = z;
                --w[a];
                if (!contains(w)) return;
            }
            ++p_.at(z[0], z[1]);
        }
    }
    const PlanePartition& partition() const { return p_; }

private:
    BoxSpec b_;
    PlanePartition p_;
};

struct EmbeddingReport {
    long events = 0;
    long mismatches = 0;
    long invalid_states = 0;
    std::size_t states = 0;
    std::vector<long> occupation;  // per enumerated partition, sampled every `thin` events
    ChiSquare uniformity;
};

// Runs the zero-temperature Ising dynamics on Lambda and the monotone-set dynamics with the
// same clock rings and variates, comparing M_t = {z : sigma_z = -} with the cube set after every event.
inline EmbeddingReport embedding_check(const BoxSpec& b, long events, std::uint64_t seed, long thin = 0)
{
    DomainPtr dom = surface_domain(b);
    std::vector<PlanePartition> all = enumerate_partitions(b);
    std::map<std::vector<int>, std::size_t> index;
    for (std::size_t k = 0; k < all.size(); ++k) index[all[k].v] = k;
    SpinConfig s(dom, +1);
    MonotoneSet m(b);
    EventStream ev(dom->size(), seed);
    EmbeddingReport r;
    r.states = all.size();
    r.occupation.assign(all.size(), 0);
    RateRule rule = RateRule::zero_temperature();
    for (long e = 0; e < events; ++e) {
        Event x = ev.next();
        heat_bath_update(s, x.site, x.u, rule);
        m.update(dom->site(x.site), x.u);
        ++r.events;
        bool same = true;
        for (std::size_t i = 0; i < s.size() && same; ++i) same = (s.spin(i) < 0) == m.contains(dom->site(i));
        if (!same) ++r.mismatches;
        if (!is_valid(m.partition(), b)) ++r.invalid_states;
        if (thin > 0 && (e + 1) % thin == 0) ++r.occupation[index.at(m.partition().v)];
    }
    if (thin > 0 && r.states > 1) r.uniformity = chi2_uniform(r.occupation);
    return r;
}

struct OccupationReport {
    std::size_t states = 0;
    long samples = 0;
    std::vector<long> counts;
    ChiSquare uniformity;
    long invalid_states = 0;
};

// Occupation of the enumerated partitions along one run of `updates` steps, recording every `thin` steps.
inline OccupationReport surface_occupation(const BoxSpec& b, SurfaceDynamics dyn, long updates, long thin, std::uint64_t seed)
{
    std::vector<PlanePartition> all = enumerate_partitions(b);
    std::map<std::vector<int>, std::size_t> index;
    for (std::size_t k = 0; k < all.size(); ++k) index[all[k].v] = k;
    SurfaceStepper st(b, dyn, seed);
    std::vector<PlanePartition> m{lowest(b)};
    OccupationReport r;
    r.states = all.size();
    r.counts.assign(all.size(), 0);
    for (long k = 1; k <= updates; ++k) {
        st.step(m);
        if (!is_valid(m[0], b)) ++r.invalid_states;
        if (k % thin == 0) {
            ++r.counts[index.at(m[0].v)];
            ++r.samples;
        }
    }
    if (r.states > 1) r.uniformity = chi2_uniform(r.counts);
    return r;
}

} // namespace isinglab
