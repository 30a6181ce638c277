#include <gtest/gtest.h>

#include <isinglab/geometry2d.hpp>

using namespace isinglab;

namespace {

SpinConfig from_rows(const DomainPtr& d, int x0, int y0, const std::vector<std::string>& rows)
{
    // rows listed top to bottom; '-' marks a minus site, anything else plus
    SpinConfig s(d, 1);
    int h = static_cast<int>(rows.size());
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < int(rows[r].size()); ++c)
            if (rows[r][c] == '-') s.set(d->index_of({x0 + c, y0 + h - 1 - r, 0}), -1);
    return s;
}

} // namespace

TEST(Majority, FixedPointsAndSingleSpin)
{
    auto d = make_box(2, 3);
    SpinConfig p(d, 1);
    EXPECT_EQ(majority_transform(p), p);
    SpinConfig s = p;
    s.set(d->index_of({1, 1, 0}), -1);
    EXPECT_EQ(majority_transform(s), p);
}

TEST(Majority, IdempotentAndMonotone)
{
    Engine g(3);
    auto d = make_box(2, 4);
    for (int rep = 0; rep < 300; ++rep) {
        SpinConfig a(d, 1);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (uniform01(g) < 0.6) a.set(i, -1);
        SpinConfig b = a;
        for (std::size_t i = 0; i < b.size(); ++i)
            if (uniform01(g) < 0.2) b.set(i, 1);
        SpinConfig pa = majority_transform(a), pb = majority_transform(b);
        ASSERT_EQ(majority_transform(pa), pa);
        ASSERT_TRUE(is_majority_fixed(pa));
        ASSERT_TRUE(a.leq(pa));
        ASSERT_TRUE(pa.leq(pb));
    }
}

TEST(Majority, VertexPairRemoved)
{
    // top row of M is the pair {x, y}; flipping x leaves y with three "+" neighbours
    auto d = make_diamond(6);
    SpinConfig s = from_rows(d, -3, -2, {
        "..--...",
        ".-----.",
        "-------",
        "-------",
        ".-----.",
    });
    Site x{-1, 2, 0}, y{0, 2, 0};
    ASSERT_TRUE(flippable(s, d->index_of(x)));
    SpinConfig t = s;
    t.flip(d->index_of(x));
    SpinConfig pt = majority_transform(t);
    EXPECT_EQ(pt.count_minus(), s.count_minus() - 2);
    EXPECT_EQ(pt.spin(d->index_of(y)), 1);
}

TEST(Contour, LengthAndSimplicity)
{
    auto d = make_box(2, 4);
    SpinConfig p(d, 1);
    Contour c0 = contour(p);
    EXPECT_EQ(c0.length, 0);
    EXPECT_FALSE(c0.simple);

    SpinConfig sq = from_rows(d, 0, 0, {"--", "--"});
    Contour c1 = contour(sq);
    EXPECT_EQ(c1.length, 8);
    EXPECT_TRUE(c1.simple);

    // squares touching at a corner: degree-four vertex
    SpinConfig diag = from_rows(d, 0, 0, {".-", "-."});
    EXPECT_EQ(contour(diag).length, 8);
    EXPECT_FALSE(contour(diag).simple);

    // two separate components
    SpinConfig two = from_rows(d, -3, 0, {"-..-"});
    EXPECT_FALSE(contour(two).simple);

    // ring with a hole
    SpinConfig ring = from_rows(d, -1, -1, {"---", "-.-", "---"});
    EXPECT_EQ(contour(ring).length, 16);
    EXPECT_FALSE(contour(ring).simple);
}

TEST(GoodSet, FullDiamondAndEmpty)
{
    for (int L : {4, 6, 10}) {
        auto d = make_diamond(L);
        SpinConfig m(d, -1);
        GeometryReport r = classify_geometry(m);
        EXPECT_TRUE(r.simple);
        EXPECT_TRUE(r.good);
        EXPECT_EQ(r.contour_length, 2 * ((r.u_max[0] - r.u_min[0]) + (r.u_max[1] - r.u_min[1])));
        EXPECT_EQ(r.mountains + r.vertices - r.valleys, 4);
        SiteClasses ref = classify_sites_reference(m, 0.9);
        EXPECT_EQ(ref.mountains, r.mountains);
        EXPECT_EQ(ref.valleys, r.valleys);
        EXPECT_EQ(ref.vertices, r.vertices);

        SpinConfig p(d, 1);
        GeometryReport e = classify_geometry(p);
        EXPECT_EQ(e.contour_length, 0);
        EXPECT_FALSE(e.simple);
        EXPECT_FALSE(e.core_inside);
        EXPECT_FALSE(e.good);
    }
}

// Random walk through the good set by flipping flippable sites: the local classification
// must agree with the definitional one, and the lemma relations must hold while M covers D
// and its outer boundary.
TEST(GoodSet, LocalClassificationMatchesDefinition)
{
    Engine g(11);
    const double frac = 0.5;
    for (int L : {5, 7, 9}) {
        auto d = make_diamond(L);
        SpinConfig s(d, -1);
        int checked = 0;
        for (int step = 0; step < 400; ++step) {
            ASSERT_TRUE(in_good_set(s, frac));
            SiteClasses loc = classify_sites_local(s, frac), ref = classify_sites_reference(s, frac);
            ASSERT_EQ(loc.mountains, ref.mountains);
            ASSERT_EQ(loc.valleys, ref.valleys);
            ASSERT_EQ(loc.vertices, ref.vertices);
            if (core_minus(s, frac, true)) {
                ASSERT_EQ(loc.mountains + loc.vertices - loc.valleys, 4);
                ASSERT_LE(loc.vertices, 8);
            }
            ++checked;
            std::vector<std::size_t> moves;
            for (std::size_t i = 0; i < s.size(); ++i)
                if (flippable(s, i)) moves.push_back(i);
            std::shuffle(moves.begin(), moves.end(), g);
            bool moved = false;
            for (std::size_t i : moves) {
                SpinConfig t = s;
                t.flip(i);
                t = majority_transform(t);
                if (in_good_set(t, frac)) {
                    s = t;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
        EXPECT_GT(checked, 50);
    }
}
