#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lattice.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace isinglab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct RateRule {
    double beta = kInf;
    bool infinite() const { return std::isinf(beta); }
    static RateRule zero_temperature() { return {kInf}; }
};

// conditional probability of "+" given neighbour sum S
inline double prob_plus(int S, const RateRule& r)
{
    if (r.infinite()) return S > 0 ? 1.0 : (S < 0 ? 0.0 : 0.5);
    return 1.0 / (1.0 + std::exp(-2.0 * r.beta * S));
}

// new spin from a shared uniform u: "+" iff u < P(+)
inline int heat_bath_spin(int S, double u, const RateRule& r)
{
    if (r.infinite()) {
        if (S != 0) return S > 0 ? 1 : -1;
        return u < 0.5 ? 1 : -1;
    }
    return u < prob_plus(S, r) ? 1 : -1;
}

inline void heat_bath_update(SpinConfig& s, std::size_t i, double u, const RateRule& r)
{
    if (i >= s.size()) throw std::out_of_range("site index outside the domain");
    s.set(i, heat_bath_spin(s.neighbor_sum(i), u, r));
}

inline void heat_bath_update(SpinConfig& s, const Site& x, double u, const RateRule& r)
{
    long i = s.domain().index_of(x);
    if (i < 0) throw std::out_of_range("site is not in the domain");
    heat_bath_update(s, static_cast<std::size_t>(i), u, r);
}

struct Event {
    double t = 0;
    std::size_t site = 0;
    double u = 0;
};

// Merged stream of n independent Poisson clocks of the given rate: exponential(n*rate)
// waiting times, uniform site, uniform variate for the update.
class EventStream {
public:
    EventStream(std::size_t n, std::uint64_t seed, double rate = 1.0) : n_(n), total_(rate * double(n)), g_(seed) {}

    Event next()
    {
        t_ += exponential(g_, total_);
        Event e;
        e.t = t_;
        e.site = uniform_index(g_, n_);
        e.u = uniform01(g_);
        return e;
    }
    double time() const { return t_; }

private:
    std::size_t n_;
    double total_;
    double t_ = 0;
    Engine g_;
};

struct Sample {
    double t = 0;
    long long magnetization = 0;
    long long minus = 0;
    long long energy = 0;
};

struct HittingRecord {
    double tau_plus = kInf;  // kInf when not reached by the horizon
    bool reached = false;
    std::uint64_t events = 0;
    std::uint64_t final_hash = 0;
};

struct Trajectory {
    std::vector<Sample> samples;
    HittingRecord hit;
    std::uint64_t energy_increases = 0;  // events with H increasing (must be 0 at beta = infinity)
    SpinConfig final_state;
};

struct TrajectoryOptions {
    double horizon = 0;
    double grid = 0;           // sampling step of the observables; 0 disables sampling
    bool stop_at_plus = false;  // end the run at tau_plus
};

inline Sample observe(const SpinConfig& s, double t)
{
    return {t, s.magnetization(), static_cast<long long>(s.count_minus()), s.energy()};
}

inline Trajectory simulate(SpinConfig s, const RateRule& rule, const TrajectoryOptions& opt, std::uint64_t seed)
{
    if (opt.horizon < 0) throw std::invalid_argument("negative horizon");
    Trajectory tr;
    long long minus = static_cast<long long>(s.count_minus());
    if (minus == 0) {
        tr.hit.tau_plus = 0;
        tr.hit.reached = true;
    }
    double next_sample = 0;
    auto sample_until = [&](double t) {
        if (opt.grid <= 0) return;
        while (next_sample <= t && next_sample <= opt.horizon) {
            tr.samples.push_back(observe(s, next_sample));
            next_sample += opt.grid;
        }
    };
    EventStream ev(s.size(), seed);
    if (!(opt.stop_at_plus && tr.hit.reached)) {
        for (;;) {
            Event e = ev.next();
            if (e.t > opt.horizon) break;
            sample_until(std::nextafter(e.t, 0.0));
            int old = s.spin(e.site);
            int S = s.neighbor_sum(e.site);
            int nw = heat_bath_spin(S, e.u, rule);
            ++tr.hit.events;
            if (nw != old) {
                if (2LL * old * S > 0) ++tr.energy_increases;
                s.set(e.site, nw);
                minus += nw < 0 ? 1 : -1;
                if (minus == 0 && !tr.hit.reached) {
                    tr.hit.reached = true;
                    tr.hit.tau_plus = e.t;
                    if (opt.stop_at_plus) break;
                }
            }
        }
    }
    sample_until(opt.horizon);
    tr.hit.final_hash = s.hash();
    tr.final_state = std::move(s);
    return tr;
}

struct CouplingReport {
    std::uint64_t events = 0;
    std::uint64_t order_violations = 0;
    double coalescence_time = kInf;  // first time all members agree
    std::vector<SpinConfig> final_states;
};

// All members read the same (time, site, u) events. Members share the site set but may have
// different boundary fields. Sitewise order is checked after every event for each listed pair
// (i, j), meaning member i should stay below member j.
inline CouplingReport grand_coupling_simulate(std::vector<SpinConfig> members, const RateRule& rule, double horizon,
                                              std::uint64_t max_events, std::uint64_t seed,
                                              const std::vector<std::pair<int, int>>& ordered = {})
{
    if (members.empty()) throw std::invalid_argument("coupling needs at least one member");
    std::size_t n = members[0].size();
    for (auto& m : members)
        if (m.size() != n) throw std::invalid_argument("coupled members must share the site set");
    CouplingReport rep;
    auto all_equal = [&] {
        for (std::size_t k = 1; k < members.size(); ++k)
            if (!(members[k] == members[0])) return false;
        return true;
    };
    if (all_equal()) rep.coalescence_time = 0;
    EventStream ev(n, seed);
    while (rep.events < max_events) {
        Event e = ev.next();
        if (e.t > horizon) break;
        ++rep.events;
        bool changed = false;
        for (auto& m : members) {
            int before = m.spin(e.site);
            heat_bath_update(m, e.site, e.u, rule);
            changed |= before != m.spin(e.site);
        }
        for (auto [i, j] : ordered)
            if (!members[i].leq(members[j])) ++rep.order_violations;
        if (changed && std::isinf(rep.coalescence_time) && all_equal()) rep.coalescence_time = e.t;
    }
    rep.final_states = std::move(members);
    return rep;
}

// Rejection-free run of the beta = infinity dynamics. Only sites whose update can change
// the spin are kept: zero-field sites (flip with probability 1/2 per ring) and unstable
// sites (field opposite to the spin, flip at every ring). The jump chain and holding times
// have the same law as the plain event stream with the null events dropped.
class ZeroTempRun {
public:
    explicit ZeroTempRun(const SpinConfig& start) : dom_(&start.domain())
    {
        std::size_t n = start.size();
        spin_.resize(n);
        sum_.resize(n);
        pos_.assign(n, -1);
        cls_.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) spin_[i] = static_cast<std::int8_t>(start.spin(i));
        energy_ = start.energy();
        for (std::size_t i = 0; i < n; ++i) {
            sum_[i] = static_cast<std::int8_t>(start.neighbor_sum(i));
            if (spin_[i] < 0) ++minus_;
            reclass(i);
        }
    }

    struct Result {
        double tau = kInf;
        bool reached = false;
        std::uint64_t flips = 0;
        std::uint64_t energy_increases = 0;
        long long energy = 0;
        bool stuck = false;
    };

    Result run_to_plus(double horizon, Engine& g)
    {
        Result r;
        double t = 0;
        if (minus_ == 0) {
            r.tau = 0;
            r.reached = true;
        }
        while (!r.reached) {
            double rate = 0.5 * double(set_[0].size()) + double(set_[1].size());
            if (rate == 0) {
                r.stuck = true;
                break;
            }
            t += exponential(g, rate);
            if (t > horizon) break;
            double pick = uniform01(g) * rate;
            std::size_t i = pick < double(set_[1].size()) ? set_[1][uniform_index(g, set_[1].size())]
                                                            : set_[0][uniform_index(g, set_[0].size())];
            long long dh = 2LL * spin_[i] * sum_[i];
            if (dh > 0) ++r.energy_increases;
            energy_ += dh;
            flip(i);
            ++r.flips;
            if (minus_ == 0) {
                r.tau = t;
                r.reached = true;
            }
        }
        r.energy = energy_;
        return r;
    }

    long long energy() const { return energy_; }

private:
    void flip(std::size_t i)
    {
        spin_[i] = static_cast<std::int8_t>(-spin_[i]);
        minus_ += spin_[i] < 0 ? 1 : -1;
        reclass(i);
        for (int k = 0; k < dom_->degree(); ++k) {
            int j = dom_->neighbor(i, k);
            if (j < 0) continue;
            sum_[j] = static_cast<std::int8_t>(sum_[j] + 2 * spin_[i]);
            reclass(j);
        }
    }

    void reclass(std::size_t i)
    {
        int c = sum_[i] == 0 ? 1 : (sum_[i] * spin_[i] < 0 ? 2 : 0);
        if (c == cls_[i]) return;
        if (cls_[i]) {
            auto& v = set_[cls_[i] - 1];
            std::size_t last = v.back();
            v[pos_[i]] = last;
            pos_[last] = pos_[i];
            v.pop_back();
        }
        cls_[i] = static_cast<std::int8_t>(c);
        if (c) {
            pos_[i] = static_cast<long>(set_[c - 1].size());
            set_[c - 1].push_back(i);
        }
    }

    const Domain* dom_;
    std::vector<std::int8_t> spin_, sum_, cls_;
    std::vector<long> pos_;
    std::vector<std::size_t> set_[2];
    long long minus_ = 0;
    long long energy_ = 0;
};

struct TauSample {
    std::vector<double> values;    // kInf for censored replicas
    std::vector<char> censored;
    std::uint64_t energy_increases = 0;
    std::uint64_t energy_mismatches = 0;  // final tracked energy differs from a fresh evaluation
    std::uint64_t events = 0;
    bool all_censored() const
    {
        return !censored.empty() && std::all_of(censored.begin(), censored.end(), [](char c) { return c != 0; });
    }
};

// default horizon (time units) for tau_plus runs: 50 L^3
inline double default_tau_horizon(int L) { return 50.0 * double(L) * L * L; }

// tau_plus from all minus; beta = infinity uses the rejection-free engine unless
// plain = true, finite beta always uses the event stream.
inline TauSample tau_plus(const DomainPtr& dom, const RateRule& rule, std::size_t replicas, double horizon,
                          std::uint64_t seed, bool plain = false)
{
    TauSample out;
    out.values.assign(replicas, kInf);
    out.censored.assign(replicas, 1);
    std::vector<std::uint64_t> inc(replicas, 0), mism(replicas, 0), evs(replicas, 0);
    long long plus_energy = SpinConfig(dom, +1).energy();
    parallel_for(replicas, [&](std::size_t r) {
        std::uint64_t s = derive_seed(seed, r);
        SpinConfig start(dom, -1);
        if (rule.infinite() && !plain) {
            Engine g(s);
            ZeroTempRun run(start);
            auto res = run.run_to_plus(horizon, g);
            if (res.reached) {
                out.values[r] = res.tau;
                out.censored[r] = 0;
                if (res.energy != plus_energy) mism[r] = 1;
            }
            inc[r] = res.energy_increases;
            evs[r] = res.flips;
        } else {
            TrajectoryOptions o;
            o.horizon = horizon;
            o.stop_at_plus = true;
            auto tr = simulate(std::move(start), rule, o, s);
            if (tr.hit.reached) {
                out.values[r] = tr.hit.tau_plus;
                out.censored[r] = 0;
            }
            if (tr.final_state.energy() != energy(tr.final_state)) mism[r] = 1;
            inc[r] = tr.energy_increases;
            evs[r] = tr.hit.events;
        }
    });
    for (std::size_t r = 0; r < replicas; ++r) {
        out.energy_increases += inc[r];
        out.energy_mismatches += mism[r];
        out.events += evs[r];
    }
    return out;
}

// inf{t : P_hat(tau > t) <= eps}
inline double tmix_inf_quantile(const TauSample& s, double eps)
{
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
    std::vector<double> v = s.values;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n == 0) throw std::invalid_argument("empty sample");
    auto k = static_cast<std::size_t>(std::ceil(double(n) * (1.0 - eps) - 1e-9));
    if (k == 0) k = 1;
    double t = v[k - 1];
    if (std::isinf(t)) throw std::runtime_error("too many censored replicas for the requested quantile");
    return t;
}

inline double tmix_inf_quantile(const DomainPtr& dom, double eps, std::size_t replicas, std::uint64_t seed,
                                double horizon = -1)
{
    if (horizon < 0) horizon = default_tau_horizon(std::max(1, dom->L()));
    return tmix_inf_quantile(tau_plus(dom, RateRule::zero_temperature(), replicas, horizon, seed), eps);
}

struct BetaComparison {
    double first_disagreement = kInf;
    double final_disagreement_fraction = 0;
};

// beta and beta' chains driven by identical events; reports when they first differ.
inline BetaComparison beta_compare(const DomainPtr& dom, double beta, double horizon, std::uint64_t seed,
                                   double beta_other = kInf, int start = -1)
{
    SpinConfig a(dom, start), b(dom, start);
    RateRule ra{beta}, rb{beta_other};
    BetaComparison out;
    std::size_t differ = 0;
    EventStream ev(a.size(), seed);
    for (;;) {
        Event e = ev.next();
        if (e.t > horizon) break;
        bool was = a.spin(e.site) != b.spin(e.site);
        heat_bath_update(a, e.site, e.u, ra);
        heat_bath_update(b, e.site, e.u, rb);
        bool now = a.spin(e.site) != b.spin(e.site);
        if (now != was) differ += now ? 1 : std::size_t(-1);
        if (now && std::isinf(out.first_disagreement)) out.first_disagreement = e.t;
    }
    out.final_disagreement_fraction = double(differ) / double(a.size());
    return out;
}

} // namespace isinglab
