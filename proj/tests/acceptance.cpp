// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Every tolerance and seed is fixed here; `acceptance N...` runs a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "isinglab/diffusion.hpp"
#include "isinglab/dimer.hpp"
#include "isinglab/dirichlet.hpp"
#include "isinglab/glauber.hpp"
#include "isinglab/harness.hpp"
#include "isinglab/modified2d.hpp"
#include "isinglab/spectral.hpp"
#include "isinglab/stats.hpp"
#include "isinglab/surface_dynamics.hpp"

using namespace isinglab;

namespace {

// 1, 2: scaling of tau_plus
constexpr double kSlope2dTarget = 2.0, kSlope2dTol = 0.15, kRuntime2d = 300;
constexpr double kSlope3dLo = 1.9, kSlope3dHi = 2.4, kRuntime3d = 900;
constexpr std::size_t kReplicas2d = 200, kReplicas3d = 100;
// 3
constexpr std::uint64_t kCouplingEvents = 100000;
// 5
constexpr long kOccupationUpdates = 1000000;
constexpr double kChi2Level = 0.01;
// 7
constexpr int kDriftDprime = 16, kDriftHeight = 4;
constexpr std::size_t kDriftReplicas = 400;
constexpr double kDriftSigmas = 3, kEigenTol = 1e-12;
// 8-11
constexpr double kKasteleynTol = 1e-8, kFourierTol = 1e-3, kQuarterTol = 1e-6;
constexpr double kVarLogConstant = 0.5, kVarFormTol = 1e-9, kProfileTol = 1e-9;
constexpr int kTailTriples = 50;
// 12
constexpr double kSymTol = 1e-12, kSpecTol = 1e-10, kKilledSigmas = 4;
constexpr long kKilledReplicas = 100000;
// 13
constexpr double kDirichletConstant = 2.0, kBruteTol = 1e-12, kValleyConstant = 1.0;
// 14
constexpr double kPsi = 0.004;
constexpr std::uint64_t kSampledStates = 10000;
// 15
constexpr double kDualitySigmas = 4;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... a)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::uint64_t g_energy_increases = 0, g_energy_mismatches = 0, g_tau_runs = 0;

Outcome tau_scaling(int dim, std::vector<int> sizes, std::size_t replicas, std::uint64_t seed, double runtime_cap,
                    std::function<bool(double)> slope_ok, const char* band)
{
    auto t0 = std::chrono::steady_clock::now();
    ResultTable t;
    std::string meds;
    long censored = 0;
    for (int L : sizes) {
        TauSample s = tau_plus(make_box(dim, L), RateRule::zero_temperature(), replicas, default_tau_horizon(L), derive_seed(seed, L));
        for (char c : s.censored) censored += c;
        g_energy_increases += s.energy_increases;
        g_energy_mismatches += s.energy_mismatches;
        g_tau_runs += replicas;
        for (std::size_t r = 0; r < replicas; ++r) t.add("tau-plus", L, long(r), "tau_plus", s.values[r]);
        meds += fmt(" L=%d:%.0f", L, median(s.values));
    }
    double secs = seconds_since(t0);
    if (censored) return {false, fmt("%ld censored replicas, medians%s", censored, meds.c_str())};
    ScalingFit f = scaling_fit(t, "tau_plus");
    bool ok = slope_ok(f.slope) && secs <= runtime_cap;
    return {ok, fmt("slope %.3f (band %s, bootstrap 95%% CI [%.3f, %.3f]), medians%s, %.0f s (cap %.0f s)", f.slope, band, f.ci_lo, f.ci_hi,
                    meds.c_str(), secs, runtime_cap)};
}

Outcome c1()
{
    return tau_scaling(2, {8, 12, 16, 24, 32}, kReplicas2d, 101, kRuntime2d,
                       [](double s) { return std::abs(s - kSlope2dTarget) <= kSlope2dTol; }, "2.0 +- 0.15");
}

Outcome c2()
{
    return tau_scaling(3, {6, 8, 12, 16}, kReplicas3d, 202, kRuntime3d, [](double s) { return s >= kSlope3dLo && s <= kSlope3dHi; },
                       "[1.9, 2.4]");
}

Outcome c3()
{
    std::uint64_t events = 0, viol = 0;
    int runs = 0;
    for (int dim : {2, 3}) {
        int L = dim == 2 ? 6 : 3;
        DomainPtr d = make_box(dim, L);
        // ordered initial data, same boundary, at beta = infinity and at finite beta
        for (double beta : {kInf, 0.8}) {
            CouplingReport r = grand_coupling_simulate({SpinConfig(d, -1), SpinConfig(d, 1)}, RateRule{beta}, kInf, kCouplingEvents, 30 + dim, {{0, 1}});
            events += r.events;
            viol += r.order_violations;
            ++runs;
        }
        // ordered boundary fields with the same random initial state, plus an ordered third member
        DomainPtr lo = make_box(dim, L, all_minus());
        DomainPtr hi = with_boundary(*lo, [](const Site& x) { return x[0] >= 0 ? 1 : -1; });
        Engine g(40 + dim);
        SpinConfig a(lo, -1), b(hi, -1), c(hi, 1);
        for (std::size_t i = 0; i < a.size(); ++i) {
            int s = uniform01(g) < 0.5 ? 1 : -1;
            a.set(i, s);
            b.set(i, s);
        }
        for (double beta : {kInf, 0.5}) {
            CouplingReport r = grand_coupling_simulate({a, b, c}, RateRule{beta}, kInf, kCouplingEvents, 50 + dim, {{0, 1}, {1, 2}, {0, 2}});
            events += r.events;
            viol += r.order_violations;
            ++runs;
        }
    }
    bool ok = viol == 0 && events == kCouplingEvents * runs;
    return {ok, fmt("%d coupled runs in d=2,3, %llu events, %llu order violations", runs, (unsigned long long)events, (unsigned long long)viol)};
}

// runs after 1 and 2, which feed the counters
Outcome c4()
{
    std::string note;
    if (g_tau_runs == 0) {
        // criteria 1-2 were skipped: a smaller sweep of our own
        for (int dim : {2, 3}) {
            TauSample s = tau_plus(make_box(dim, dim == 2 ? 8 : 4), RateRule::zero_temperature(), 50, kInf, 404 + dim);
            g_energy_increases += s.energy_increases;
            g_energy_mismatches += s.energy_mismatches;
            g_tau_runs += 50;
        }
        note = " (own sweep, criteria 1-2 not run)";
    }
    bool ok = g_energy_increases == 0 && g_energy_mismatches == 0;
    return {ok, fmt("%llu tau+ runs, %llu energy increases, %llu tracked-energy mismatches%s", (unsigned long long)g_tau_runs,
                    (unsigned long long)g_energy_increases, (unsigned long long)g_energy_mismatches, note.c_str())};
}

Outcome c5()
{
    BoxSpec b = BoxSpec::uniform(2, 2, 2);
    std::size_t n = enumerate_partitions(b).size();
    OccupationReport loc = surface_occupation(b, SurfaceDynamics::local, kOccupationUpdates, 50, 501);
    OccupationReport col = surface_occupation(b, SurfaceDynamics::column, kOccupationUpdates, 10, 502);
    bool ok = n == 20 && loc.uniformity.p > kChi2Level && col.uniformity.p > kChi2Level && loc.invalid_states == 0 && col.invalid_states == 0;
    return {ok, fmt("%zu states (MacMahon %.0f); chi2 p local %.3f, column %.3f (need > %.2f)", n, macmahon(2, 2, 2), loc.uniformity.p, col.uniformity.p,
                    kChi2Level)};
}

Outcome c6()
{
    long boxes = 0, partitions = 0, pairs = 0, failures = 0;
    for (int a1 = 1; a1 <= 3; ++a1)
        for (int a2 = 1; a2 <= 3; ++a2)
            for (int h = 1; h <= 3; ++h) {
                BoxSpec b = BoxSpec::uniform(a1, a2, h);
                auto all = enumerate_partitions(b);
                if (double(all.size()) != macmahon(a1, a2, h)) ++failures;
                std::vector<LatticePathBundle> paths;
                std::set<std::vector<int>> distinct;
                for (const PlanePartition& p : all) {
                    LatticePathBundle f = partition_to_paths(p, b);
                    if (!is_valid_bundle(f, b) || !(paths_to_partition(f, b) == p)) ++failures;
                    distinct.insert(f.phi);
                    paths.push_back(std::move(f));
                }
                if (distinct.size() != all.size()) ++failures;
                for (std::size_t i = 0; i < all.size(); ++i)
                    for (std::size_t j = 0; j < all.size(); ++j) {
                        // more cubes means lower paths
                        if (all[i].leq(all[j]) != paths[j].leq(paths[i])) ++failures;
                        ++pairs;
                    }
                ++boxes;
                partitions += long(all.size());
            }
    return {failures == 0, fmt("%ld boxes, %ld partitions round-tripped, %ld ordered pairs checked, %ld failures", boxes, partitions, pairs, failures)};
}

Outcome c7()
{
    BoxSpec b = BoxSpec::uniform(kDriftDprime, kDriftDprime, kDriftHeight);
    std::vector<double> cps;
    for (int k = 0; k < 10; ++k) cps.push_back(100.0 * k);
    DriftReport r = wilson_drift(b, kDriftReplicas, cps, 707, kDriftSigmas);
    double res = drift_eigen_residual(kDriftDprime);
    double worst = -kInf;
    for (std::size_t k = 0; k < cps.size(); ++k)
        if (r.sigma[k] > 1e-9 * r.u0) worst = std::max(worst, (r.mean[k] - r.bound[k]) / r.sigma[k]);  // t = 0 is deterministic
    bool ok = r.all_ok && res <= kEigenTol && r.order_violations == 0;
    return {ok, fmt("D'=%d, H=%d, %zu replicas: u0=%.1f, u(900)=%.1f +- %.1f vs bound %.1f; worst (mean-bound)/se for t > 0: %.2f; per-interval drift %s; "
                    "eigen residual %.1e",
                    kDriftDprime, kDriftHeight, kDriftReplicas, r.u0, r.mean.back(), r.sigma.back(), r.bound.back(), worst,
                    r.drift_ok ? "ok" : "exceeds 3 se", res)};
}

std::vector<DimerSpec> dimer_specs() { return {DimerSpec(1.0 / 3, 1.0 / 3, 1.0 / 3), DimerSpec(0.2, 0.3, 0.5), DimerSpec(0.45, 0.1, 0.45)}; }

Outcome c8()
{
    double worst = 0, worst_signed = 0;
    for (const DimerSpec& s : dimer_specs())
        for (int n = -20; n <= 20; ++n) {
            double q = kinv_quadrature(n, -1, s), c = kinv_closed(n, s);
            worst = std::max(worst, std::abs(std::abs(q) - std::abs(c)));
            worst_signed = std::max(worst_signed, std::abs(q - c));
        }
    return {worst <= kKasteleynTol, fmt("max ||quad| - |closed|| = %.2e, signed %.2e (tol %.0e), |n| <= 20, 3 specs", worst, worst_signed, kKasteleynTol)};
}

Outcome c9()
{
    double worst = 0;
    for (const DimerSpec& s : dimer_specs()) worst = std::max(worst, fourier_identity_residual(s, 1000000));
    DimerSpec half(0.5, 0.25, 0.25);
    double sum = 0;
    for (int i = 1000000; i >= 1; --i) {
        double a = toeplitz_entry(i, half);
        sum += 2 * a * a;
    }
    bool ok = worst <= kFourierTol && std::abs(sum - 0.25) <= kQuarterTol;
    return {ok, fmt("max residual %.2e (tol %.0e); p_a = 1/2: 2 sum a_i^2 = %.9f vs 1/4", worst, kFourierTol, sum)};
}

Outcome c10()
{
    bool ok = true;
    std::string d;
    double form = 0, lo = kInf, hi = -kInf;
    for (const DimerSpec& s : dimer_specs()) {
        double mx = 0;
        for (int n : {100, 1000, 10000}) mx = std::max(mx, variance_Nn(n, s) / std::log(double(n)));
        ok = ok && mx <= kVarLogConstant;
        d += fmt(" %.3f", mx);
        for (int n = 1; n <= 200; ++n) {
            auto [A, p] = build_A(n, s);
            form = std::max(form, std::abs(variance_Nn(n, s) - variance_from_profile(p)));
            lo = std::min(lo, p.min_raw);
            hi = std::max(hi, p.max_raw);
        }
    }
    ok = ok && form <= kVarFormTol && lo >= -kProfileTol && hi <= 1 + kProfileTol;
    return {ok, fmt("max Var/log n per spec:%s (constant %.1f); trace vs eigen %.1e; q range [%.2e, 1%+.1e]", d.c_str(), kVarLogConstant, form, lo,
                    hi - 1)};
}

Outcome c11()
{
    std::mt19937_64 g(1111);
    std::uniform_real_distribution<double> U(0, 1);
    int viol = 0;
    double closest = kInf;
    for (int k = 0; k < kTailTriples; ++k) {
        double pa = 0.02 + 0.94 * U(g), pb = (1 - pa) * (0.05 + 0.9 * U(g));
        DimerSpec s(pa, pb, 1 - pa - pb);
        int n = 1 + int(U(g) * 100);
        double D = 0.5 + 29.5 * U(g);
        auto [A, p] = build_A(std::min(n, 100), s);
        TailBound t = poisson_binomial_tail(p.q, D);
        if (!(t.exact <= t.bound)) ++viol;
        closest = std::min(closest, t.bound - t.exact);
    }
    return {viol == 0, fmt("%d triples, %d violations, smallest margin %.3e", kTailTriples, viol, closest)};
}

Outcome c12()
{
    std::string d;
    bool ok = true;
    // 4 x 5 square: 2^20 states
    {
        DomainPtr dom = make_block(2, {0, 0, 0}, {3, 4, 0});
        SparseGenerator g = build_generator(dom, 1.0);
        GeneratorChecks gc = check_generator(g);
        SymmetrizedMatrix U = symmetrize(g);
        double sym = U.symmetry_defect();
        BlockDecomposition B = decompose_blocks(g.space);
        SymmetrizedMatrix Uinf = symmetrized_limit(g.space);
        double cross = cross_class_max(Uinf, B);
        Eigen::MatrixXd P = block_matrix(Uinf, B, B.plus_class);
        bool plus0 = P.rows() == 1 && P(0, 0) == 0.0;
        bool conn = blocks_connected(g.space, B);
        ok = ok && sym <= kSymTol && cross == 0.0 && plus0 && conn && gc.detailed_balance <= kSymTol;
        d += fmt("4x5 (%zu states): symmetry %.1e, balance %.1e, %zu classes, cross-class max %.1g, plus block {%.1g}; ", g.states(), sym,
                 gc.detailed_balance, B.classes(), cross, P(0, 0));
    }
    // spectra of the generator and of U on dense-sized boxes
    double spec = 0;
    for (auto [dom, beta] : std::vector<std::pair<DomainPtr, double>>{{make_block(2, {0, 0, 0}, {2, 2, 0}), 2.0},
                                                                      {make_block(2, {0, 0, 0}, {1, 3, 0}), 0.7},
                                                                      {make_block(3, {0, 0, 0}, {1, 1, 1}), 1.0}}) {
        SparseGenerator g = build_generator(dom, beta);
        SymmetrizedMatrix U = symmetrize(g);
        spec = std::max(spec, spectrum_mismatch(g, U));
        ok = ok && U.symmetry_defect() <= kSymTol;
    }
    ok = ok && spec <= kSpecTol;
    d += fmt("spectra L vs U max diff %.1e; killed:", spec);
    // killed semigroup against Monte Carlo
    struct Triple {
        int a, b;
        double t;
        int target;  // 0: eta itself, 1: another member of its class
    };
    for (Triple tr : {Triple{2, 2, 1.0, 0}, Triple{2, 2, 0.7, 1}, Triple{2, 3, 2.0, 1}}) {
        StateSpace sp = enumerate_states(make_block(2, {0, 0, 0}, {tr.a - 1, tr.b - 1, 0}));
        BlockDecomposition B = decompose_blocks(sp);
        SymmetrizedMatrix Uinf = symmetrized_limit(sp);
        std::size_t eta = sp.states - 1;
        const auto& m = B.members[B.class_of[eta]];
        std::size_t eta2 = tr.target == 0 ? eta : (m[0] != eta ? m[0] : m[1]);
        KilledCheck k = killed_semigroup_check(sp, Uinf, B, eta, eta2, tr.t, kKilledReplicas, 1200 + tr.a * 10 + tr.b);
        ok = ok && std::abs(k.z) <= kKilledSigmas;
        d += fmt(" %dx%d t=%.1f exact %.5f mc %.5f z %.2f;", tr.a, tr.b, tr.t, k.exact, k.mc, k.z);
    }
    return {ok, d};
}

Outcome c13()
{
    bool ok = true;
    double mx = 0, brute = 0, norm = 0;
    std::string d;
    for (int L : {8, 16, 32, 64, 128, 256}) {
        DirichletReport r = dirichlet_test_ratio(L);
        mx = std::max(mx, r.ratio * L);
        d += fmt(" %.3f", r.ratio * L);
        for (std::size_t k = 0; k < r.xs.size(); ++k)
            if (r.xs[k] < -1) norm = std::max({norm, r.peak_normalized[k], r.valley_normalized[k]});
    }
    for (int L = 4; L <= 12; L += 2) brute = std::max(brute, std::abs(dirichlet_test_ratio(L).ratio - dirichlet_ratio_bruteforce(L)));
    ok = mx <= kDirichletConstant && brute <= kBruteTol && norm <= kValleyConstant + 1e-12;
    return {ok, fmt("L*ratio over L=8..256:%s (constant %.1f); DP vs enumeration %.1e; max normalised peak/valley %.4f (constant %.1f)", d.c_str(),
                    kDirichletConstant, brute, norm, kValleyConstant)};
}

Outcome c14()
{
    std::uint64_t states = 0, good = 0, rel = 0, vert = 0;
    int maxw = 0, runs = 0, drop_fail = 0, unfrozen = 0;
    double min_drop = kInf;
    for (int L : {16, 32}) {
        // at least half of the sampled states from each size, and at least four runs
        std::uint64_t here = 0;
        for (int r = 0; here < kSampledStates / 2 || r < 4; ++r) {
            Modified2dReport m = modified_2d_simulate(L, derive_seed(1414, L * 1000 + r));
            ++runs;
            here += m.states_checked;
            good += m.good_violations;
            rel += m.relation_violations;
            vert += m.vertex_violations;
            maxw = std::max(maxw, m.max_vertices);
            if (!m.frozen) ++unfrozen;
            double ratio = m.drop() / (double(L) * L);
            min_drop = std::min(min_drop, ratio);
            if (ratio < kPsi) ++drop_fail;
        }
        states += here;
    }
    bool ok = states >= kSampledStates && good == 0 && rel == 0 && vert == 0 && maxw <= 8 && drop_fail == 0 && unfrozen == 0;
    return {ok, fmt("%d runs, %llu states: good-set misses %llu, m+w-v != 4 %llu, w > 8 %llu (max w %d); min drop/L^2 %.4f (psi %.3f)", runs,
                    (unsigned long long)states, (unsigned long long)good, (unsigned long long)rel, (unsigned long long)vert, maxw, min_drop, kPsi)};
}

Outcome c15()
{
    SSEPProfile p = ssep_simulate(32, 100, 10000, 1515);
    bool ok = p.within(kDualitySigmas);
    double worst_ratio = 0;
    for (int L : {32, 64, 128})
        for (double f : {1.0 / 64, 1.0 / 50, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4}) {
            HeatTail h = heat_tail_check(L, f * L * L);
            ok = ok && h.holds;
            worst_ratio = std::max(worst_ratio, h.ratio);
        }
    ColdynReport c = coldyn_profile(16, 16.0 * 16 / 8, 1000, 1516);
    ok = ok && c.within(kDualitySigmas) && c.corner <= c.corner_bound + kDualitySigmas * c.corner_sigma;
    return {ok, fmt("SSEP L=32 t=100: max z %.2f, conservation violations %ld; heat tail max ratio %.4f <= c' = %.2f; coldyn L=16: max z %.2f, "
                    "corner %.3f <= %.3f",
                    p.max_z, p.conservation_violations, worst_ratio, kHeatTailConstant, c.max_z, c.corner, c.corner_bound)};
}

} // namespace

int main(int argc, char** argv)
{
    std::vector<std::pair<const char*, Outcome (*)()>> all{
        {"2D tau+ scaling", c1},        {"3D tau+ scaling", c2},          {"monotone grand coupling", c3},
        {"zero-temperature energy monotone", c4}, {"monotone-set stationarity", c5}, {"partition/path bijection", c6},
        {"Wilson drift", c7},           {"Kasteleyn closed form", c8},   {"Fourier identity", c9},
        {"variance growth", c10},       {"Poisson-binomial concentration", c11}, {"spectral structure", c12},
        {"Dirichlet ratio", c13},       {"2D good-set dynamics", c14},   {"heat/SSEP duality", c15},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        int id = int(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s  %2d  %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, all[i].first, o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
