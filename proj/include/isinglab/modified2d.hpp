#pragma once

// Zero-temperature dynamics on the diamond domain followed, after every update, by the
// majority transform; frozen once the minus region stops covering the core diamond and
// its outer boundary.

#include <cstdint>
#include <functional>

#include "geometry2d.hpp"
#include "glauber.hpp"

namespace isinglab {

struct Modified2dReport {
    int L = 0;
    double tau_D = kInf;  // kInf if the horizon came first
    bool frozen = false;
    long minus_initial = 0;
    long minus_final = 0;
    std::uint64_t events = 0;
    std::uint64_t states_checked = 0;     // distinct visited states, the initial one included
    std::uint64_t good_violations = 0;    // visited states outside the good set
    std::uint64_t relation_violations = 0;  // m + w - v != 4 before freezing
    std::uint64_t vertex_violations = 0;    // w > 8 before freezing
    int max_vertices = 0;
    long drop() const { return minus_initial - minus_final; }
};

// observer(state, report_so_far) is called on every checked state
inline Modified2dReport modified_2d_simulate(int L, std::uint64_t seed, double fraction = 0.9, double horizon = kInf,
                                             const std::function<void(const SpinConfig&, const GeometryReport&)>&
                                                 observer = {})
{
    DomainPtr dom = make_diamond(L);
    SpinConfig s(dom, -1);
    Modified2dReport rep;
    rep.L = L;
    rep.minus_initial = static_cast<long>(s.count_minus());

    auto check = [&](bool before_freeze) {
        GeometryReport g = classify_geometry(s, fraction);
        ++rep.states_checked;
        if (!g.good) ++rep.good_violations;
        if (before_freeze) {
            if (g.mountains + g.vertices - g.valleys != 4) ++rep.relation_violations;
            if (g.vertices > 8) ++rep.vertex_violations;
            rep.max_vertices = std::max(rep.max_vertices, g.vertices);
        }
        if (observer) observer(s, g);
    };
    check(true);

    EventStream ev(s.size(), seed);
    RateRule zero = RateRule::zero_temperature();
    for (;;) {
        Event e = ev.next();
        if (e.t > horizon) break;
        ++rep.events;
        int before = s.spin(e.site);
        heat_bath_update(s, e.site, e.u, zero);
        if (s.spin(e.site) == before) continue;
        s = majority_transform(std::move(s));
        if (!core_minus(s, fraction, true)) {
            rep.frozen = true;
            rep.tau_D = e.t;
            check(false);
            break;
        }
        check(true);
    }
    rep.minus_final = static_cast<long>(s.count_minus());
    return rep;
}

} // namespace isinglab
