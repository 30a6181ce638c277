#include <gtest/gtest.h>

#include <isinglab/glauber.hpp>
#include <isinglab/modified2d.hpp>

#include <numeric>

using namespace isinglab;

TEST(HeatBath, Rules)
{
    RateRule inf = RateRule::zero_temperature();
    for (double u : {0.0, 0.3, 0.7, 0.999}) EXPECT_EQ(heat_bath_spin(3, u, inf), 1);
    EXPECT_EQ(heat_bath_spin(0, 0.7, inf), -1);
    EXPECT_EQ(heat_bath_spin(0, 0.3, inf), 1);
    EXPECT_EQ(heat_bath_spin(-2, 0.0, inf), -1);
    EXPECT_NEAR(prob_plus(2, RateRule{std::log(3.0) / 2}), 0.9, 1e-15);
}

TEST(HeatBath, MonotoneInNeighbourSum)
{
    for (double beta : {0.1, 0.7, 2.0, kInf})
        for (double u = 0.005; u < 1; u += 0.01)
            for (int S = -6; S < 6; S += 2) ASSERT_LE(heat_bath_spin(S, u, {beta}), heat_bath_spin(S + 2, u, {beta}));
}

TEST(Simulate, AllPlusIsAbsorbing)
{
    auto d = make_box(2, 3);
    TrajectoryOptions o;
    o.horizon = 20;
    o.grid = 1;
    auto tr = simulate(SpinConfig(d, 1), RateRule::zero_temperature(), o, 5);
    EXPECT_EQ(tr.hit.tau_plus, 0);
    EXPECT_EQ(tr.samples.size(), 21u);
    for (auto& s : tr.samples) EXPECT_EQ(s.minus, 0);
    EXPECT_TRUE(tr.final_state.all_plus());
}

TEST(Simulate, ZeroHorizonKeepsInitialState)
{
    auto d = make_box(2, 2);
    SpinConfig s(d, -1);
    TrajectoryOptions o;
    auto tr = simulate(s, RateRule{1.0}, o, 1);
    EXPECT_EQ(tr.final_state, s);
    EXPECT_EQ(tr.hit.events, 0u);
}

TEST(Simulate, Deterministic)
{
    auto d = make_box(2, 4);
    TrajectoryOptions o;
    o.horizon = 30;
    o.grid = 0.5;
    auto a = simulate(SpinConfig(d, -1), RateRule{0.8}, o, 99);
    auto b = simulate(SpinConfig(d, -1), RateRule{0.8}, o, 99);
    EXPECT_EQ(a.hit.final_hash, b.hit.final_hash);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) EXPECT_EQ(a.samples[k].energy, b.samples[k].energy);
}

TEST(Simulate, SingleSiteHittingTimeIsExponential)
{
    auto d = make_box(2, 0);
    double sum = 0;
    int n = 10000;
    for (int r = 0; r < n; ++r) {
        TrajectoryOptions o;
        o.horizon = 100;
        o.stop_at_plus = true;
        auto tr = simulate(SpinConfig(d, -1), RateRule::zero_temperature(), o, derive_seed(1, r));
        ASSERT_TRUE(tr.hit.reached);
        sum += tr.hit.tau_plus;
    }
    EXPECT_NEAR(sum / n, 1.0, 0.03);
}

TEST(Simulate, EnergyNeverIncreasesAtZeroTemperature)
{
    auto d = make_box(2, 5);
    TrajectoryOptions o;
    o.horizon = 200;
    o.grid = 0.25;
    auto tr = simulate(SpinConfig(d, -1), RateRule::zero_temperature(), o, 4);
    EXPECT_EQ(tr.energy_increases, 0u);
    for (std::size_t k = 1; k < tr.samples.size(); ++k) EXPECT_LE(tr.samples[k].energy, tr.samples[k - 1].energy);
    EXPECT_EQ(tr.final_state.energy(), energy(tr.final_state));
}

// Box L=8 (17x17), all minus: mean tau_plus / L^2 recorded as a regression band.
TEST(Simulate, MeanHittingTimeBandOnSideSeventeen)
{
    auto d = make_box(2, 8);
    auto s = tau_plus(d, RateRule::zero_temperature(), 400, default_tau_horizon(8), 2024);
    double mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / s.values.size();
    EXPECT_GT(mean / 64, 1.9);
    EXPECT_LT(mean / 64, 2.6);
}

TEST(Coupling, ExtremesStayOrderedAndCoalesce)
{
    for (int dim : {2, 3}) {
        auto d = make_box(dim, dim == 2 ? 4 : 2);
        auto rep = grand_coupling_simulate({SpinConfig(d, -1), SpinConfig(d, 1)}, RateRule::zero_temperature(), kInf,
                                           100000, 8, {{0, 1}});
        EXPECT_EQ(rep.events, 100000u);
        EXPECT_EQ(rep.order_violations, 0u);
        EXPECT_LT(rep.coalescence_time, kInf);
    }
}

TEST(Coupling, OrderedBoundaryFields)
{
    Engine g(17);
    auto lowb = make_box(2, 3, all_minus());
    auto highb = with_boundary(*lowb, [](const Site& x) { return x[0] > 0 ? 1 : -1; });
    SpinConfig xi(lowb, 1);
    for (std::size_t i = 0; i < xi.size(); ++i)
        if (uniform01(g) < 0.5) xi.set(i, -1);
    SpinConfig a = xi;
    SpinConfig b(highb, 1);
    for (std::size_t i = 0; i < b.size(); ++i) b.set(i, xi.spin(i));
    auto rep = grand_coupling_simulate({a, b}, RateRule{0.6}, kInf, 100000, 3, {{0, 1}});
    EXPECT_EQ(rep.order_violations, 0u);
}

TEST(Coupling, SingleMemberMatchesSimulate)
{
    auto d = make_box(2, 3);
    TrajectoryOptions o;
    o.horizon = 10;
    auto tr = simulate(SpinConfig(d, -1), RateRule{0.9}, o, 77);
    auto rep = grand_coupling_simulate({SpinConfig(d, -1)}, RateRule{0.9}, 10, ~0ull, 77);
    EXPECT_EQ(rep.final_states[0], tr.final_state);
    EXPECT_EQ(rep.events, tr.hit.events);
}

TEST(TauPlus, RejectionFreeMatchesEventStream)
{
    // same law: compare means on a 7x7 box
    auto d = make_box(2, 3);
    auto fast = tau_plus(d, RateRule::zero_temperature(), 3000, 1e6, 1);
    auto slow = tau_plus(d, RateRule::zero_temperature(), 3000, 1e6, 2, true);
    auto stats = [](const TauSample& s) {
        double m = 0, q = 0;
        for (double v : s.values) m += v;
        m /= s.values.size();
        for (double v : s.values) q += (v - m) * (v - m);
        return std::pair{m, std::sqrt(q / (s.values.size() - 1) / s.values.size())};
    };
    auto [mf, sf] = stats(fast);
    auto [ms, ss] = stats(slow);
    EXPECT_LT(std::abs(mf - ms), 4 * std::hypot(sf, ss));
    EXPECT_EQ(fast.energy_increases, 0u);
    EXPECT_EQ(slow.energy_increases, 0u);
    EXPECT_EQ(fast.energy_mismatches, 0u);
}

TEST(TauPlus, CensoringAndEmptyInterior)
{
    auto d = make_box(2, 4);
    auto s = tau_plus(d, RateRule::zero_temperature(), 5, 0.01, 3);
    EXPECT_TRUE(s.all_censored());
    EXPECT_THROW(tmix_inf_quantile(s, 0.5), std::runtime_error);
    // a single-site domain whose site starts "-" but sits in a "+" sea is the smallest case;
    // with no "-" sites at all the hitting time is 0
    auto one = make_box(2, 0);
    TauSample z;
    z.values = {0, 0, 0};
    z.censored = {0, 0, 0};
    EXPECT_EQ(tmix_inf_quantile(z, 0.3), 0);
    (void)one;
}

TEST(TauPlus, QuantileOfExponential)
{
    auto d = make_box(2, 0);
    double q = tmix_inf_quantile(d, 1.0 / (2 * std::exp(1.0)), 20000, 5);
    EXPECT_NEAR(q, 1 + std::log(2.0), 0.06);
    auto s = tau_plus(d, RateRule::zero_temperature(), 2000, 100, 6);
    double lo = *std::min_element(s.values.begin(), s.values.end());
    EXPECT_EQ(tmix_inf_quantile(s, 0.9999), lo);
    double prev = kInf;
    for (double eps : {0.05, 0.1, 0.3, 0.6, 0.9}) {
        double t = tmix_inf_quantile(s, eps);
        EXPECT_LE(t, prev);
        prev = t;
    }
}

TEST(BetaCompare, LowTemperatureAgreesWithZeroTemperature)
{
    int L = 8;
    auto d = make_box(2, L);
    int clean = 0, seeds = 1000;
    for (int s = 0; s < seeds; ++s) {
        auto r = beta_compare(d, 10 * std::log(double(L)), double(L) * L * L, derive_seed(5, s));
        clean += std::isinf(r.first_disagreement);
    }
    EXPECT_GE(clean, 990);
    auto hot = beta_compare(d, 0.1, 5, 1);
    EXPECT_LT(hot.first_disagreement, 5);
    auto same = beta_compare(d, 0.7, 50, 1, 0.7);
    EXPECT_TRUE(std::isinf(same.first_disagreement));
}

TEST(Modified2d, StaysInGoodSetUntilFrozen)
{
    for (int L : {8, 12}) {
        auto rep = modified_2d_simulate(L, 31 + L);
        EXPECT_TRUE(rep.frozen);
        EXPECT_EQ(rep.good_violations, 0u);
        EXPECT_EQ(rep.relation_violations, 0u);
        EXPECT_EQ(rep.vertex_violations, 0u);
        EXPECT_GE(rep.drop(), 0.004 * L * L);
    }
}
