#pragma once

#include <array>
#include <bit>
#include <climits>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace isinglab {

// lattice point; unused trailing coordinates are 0 in d=2
using Site = std::array<int, 3>;

enum class Shape { box, ball, diamond, parallelepiped, explicit_sites };

using BoundaryField = std::function<int(const Site&)>;

inline BoundaryField all_plus()
{
    return [](const Site&) { return +1; };
}

inline BoundaryField all_minus()
{
    return [](const Site&) { return -1; };
}

struct DomainSpec {
    Shape shape = Shape::box;
    int dim = 2;
    int L = 1;            // box / diamond half-width
    double radius = 1.0;  // ball
    Site lo{0, 0, 0};     // parallelepiped corners, inclusive
    Site hi{0, 0, 0};
    std::vector<Site> sites;  // explicit_sites
    BoundaryField boundary = all_plus();
};

class Domain {
public:
    int dim() const { return dim_; }
    Shape shape() const { return shape_; }
    int L() const { return L_; }
    std::size_t size() const { return sites_.size(); }
    int degree() const { return 2 * dim_; }

    const Site& site(std::size_t i) const { return sites_[i]; }
    const std::vector<Site>& sites() const { return sites_; }

    // site index, or -1 when x is not in the domain
    long index_of(const Site& x) const
    {
        long c = cell(x);
        if (c < 0) return -1;
        int v = grid_[c];
        return v >= 0 ? v : -1;
    }
    bool contains(const Site& x) const { return index_of(x) >= 0; }

    std::size_t boundary_size() const { return bsites_.size(); }
    const Site& boundary_site(std::size_t b) const { return bsites_[b]; }
    int boundary_value(std::size_t b) const { return bvals_[b]; }
    // value of the boundary field at x, 0 if x is not a boundary site
    int boundary_at(const Site& x) const
    {
        long c = cell(x);
        if (c < 0) return 0;
        int v = grid_[c];
        return (v < 0 && v != kNone) ? bvals_[-1 - v] : 0;
    }

    // neighbour k of site i: >= 0 is a site index, < 0 encodes boundary site -1-code
    int neighbor(std::size_t i, int k) const { return nbr_[i * 6 + k]; }
    // sum of boundary values adjacent to site i
    int boundary_sum(std::size_t i) const { return bsum_[i]; }

    Site lo() const { return lo_; }
    Site extent() const { return ext_; }

    friend std::shared_ptr<const Domain> build_domain(const DomainSpec&);
    friend std::shared_ptr<const Domain> with_boundary(const Domain&, const BoundaryField&);

private:
    static constexpr int kNone = INT_MIN;

    long cell(const Site& x) const
    {
        long c = 0;
        for (int a = dim_ - 1; a >= 0; --a) {
            int r = x[a] - lo_[a];
            if (r < 0 || r >= ext_[a]) return -1;
            c = c * ext_[a] + r;
        }
        for (int a = dim_; a < 3; ++a)
            if (x[a] != 0) return -1;
        return c;
    }

    void fill_boundary(const BoundaryField& f)
    {
        bvals_.resize(bsites_.size());
        for (std::size_t b = 0; b < bsites_.size(); ++b) {
            int v = f(bsites_[b]);
            if (v != 1 && v != -1) throw std::invalid_argument("boundary field must take values in {-1,+1}");
            bvals_[b] = v;
        }
        bsum_.assign(sites_.size(), 0);
        for (std::size_t i = 0; i < sites_.size(); ++i)
            for (int k = 0; k < degree(); ++k)
                if (nbr_[i * 6 + k] < 0) bsum_[i] += bvals_[-1 - nbr_[i * 6 + k]];
    }

    int dim_ = 2;
    int L_ = 0;
    Shape shape_ = Shape::box;
    Site lo_{}, ext_{1, 1, 1};  // bounding box of sites grown by one layer
    std::vector<int> grid_;
    std::vector<Site> sites_;
    std::vector<Site> bsites_;
    std::vector<int> bvals_;
    std::vector<int> nbr_;
    std::vector<int> bsum_;
};

using DomainPtr = std::shared_ptr<const Domain>;

inline const std::array<Site, 6>& unit_steps()
{
    static const std::array<Site, 6> s{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
    return s;
}

inline Site shifted(const Site& x, int k)
{
    const Site& e = unit_steps()[k];
    return {x[0] + e[0], x[1] + e[1], x[2] + e[2]};
}

inline DomainPtr build_domain(const DomainSpec& spec)
{
    int d = spec.dim;
    if (d != 2 && d != 3) throw std::invalid_argument("dimension must be 2 or 3");

    std::vector<Site> pts;
    auto enumerate_box = [&](Site lo, Site hi, auto&& keep) {
        for (int z = (d == 3 ? lo[2] : 0); z <= (d == 3 ? hi[2] : 0); ++z)
            for (int y = lo[1]; y <= hi[1]; ++y)
                for (int x = lo[0]; x <= hi[0]; ++x) {
                    Site s{x, y, z};
                    if (keep(s)) pts.push_back(s);
                }
    };

    switch (spec.shape) {
    case Shape::box:
        if (spec.L < 0) throw std::invalid_argument("box half-width must be nonnegative");
        enumerate_box({-spec.L, -spec.L, -spec.L}, {spec.L, spec.L, spec.L}, [](const Site&) { return true; });
        break;
    case Shape::diamond:
        if (d != 2) throw std::invalid_argument("diamond domain is two-dimensional");
        if (spec.L < 1) throw std::invalid_argument("diamond half-width must be positive");
        enumerate_box({-spec.L, -spec.L, 0}, {spec.L, spec.L, 0},
                      [&](const Site& s) { return std::abs(s[0]) + std::abs(s[1]) <= spec.L + 1; });
        break;
    case Shape::ball: {
        if (spec.radius <= 0) throw std::invalid_argument("ball radius must be positive");
        int R = static_cast<int>(std::floor(spec.radius));
        double r2 = spec.radius * spec.radius;
        enumerate_box({-R, -R, -R}, {R, R, R}, [&](const Site& s) {
            double q = double(s[0]) * s[0] + double(s[1]) * s[1] + double(s[2]) * s[2];
            return q <= r2 + 1e-12;
        });
        break;
    }
    case Shape::parallelepiped:
        for (int a = 0; a < d; ++a)
            if (spec.hi[a] < spec.lo[a]) throw std::invalid_argument("parallelepiped corners out of order");
        enumerate_box(spec.lo, spec.hi, [](const Site&) { return true; });
        break;
    case Shape::explicit_sites:
        for (Site s : spec.sites) {
            if (d == 2) s[2] = 0;
            pts.push_back(s);
        }
        break;
    }
    if (pts.empty()) throw std::invalid_argument("domain has no sites");

    auto dom = std::make_shared<Domain>();
    dom->dim_ = d;
    dom->L_ = spec.L;
    dom->shape_ = spec.shape;

    Site mn = pts[0], mx = pts[0];
    for (const Site& s : pts)
        for (int a = 0; a < 3; ++a) {
            mn[a] = std::min(mn[a], s[a]);
            mx[a] = std::max(mx[a], s[a]);
        }
    for (int a = 0; a < 3; ++a) {
        dom->lo_[a] = a < d ? mn[a] - 1 : 0;
        dom->ext_[a] = a < d ? mx[a] - mn[a] + 3 : 1;
    }
    dom->grid_.assign(std::size_t(dom->ext_[0]) * dom->ext_[1] * dom->ext_[2], Domain::kNone);

    for (const Site& s : pts) {
        long c = dom->cell(s);
        if (dom->grid_[c] != Domain::kNone) throw std::invalid_argument("duplicate site in explicit list");
        dom->grid_[c] = static_cast<int>(dom->sites_.size());
        dom->sites_.push_back(s);
    }
    std::size_t n = dom->sites_.size();
    dom->nbr_.assign(n * 6, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < 2 * d; ++k) {
            Site y = shifted(dom->sites_[i], k);
            long c = dom->cell(y);
            int& g = dom->grid_[c];
            if (g == Domain::kNone) {
                dom->bsites_.push_back(y);
                g = -static_cast<int>(dom->bsites_.size());
            }
            dom->nbr_[i * 6 + k] = g;
        }
    dom->fill_boundary(spec.boundary);
    return dom;
}

// same site set, different boundary field
inline DomainPtr with_boundary(const Domain& base, const BoundaryField& f)
{
    auto dom = std::make_shared<Domain>(base);
    dom->fill_boundary(f);
    return dom;
}

inline DomainPtr make_box(int dim, int L, BoundaryField f = all_plus())
{
    DomainSpec s;
    s.shape = Shape::box;
    s.dim = dim;
    s.L = L;
    s.boundary = std::move(f);
    return build_domain(s);
}

inline DomainPtr make_block(int dim, Site lo, Site hi, BoundaryField f = all_plus())
{
    DomainSpec s;
    s.shape = Shape::parallelepiped;
    s.dim = dim;
    s.lo = lo;
    s.hi = hi;
    s.boundary = std::move(f);
    return build_domain(s);
}

inline DomainPtr make_diamond(int L, BoundaryField f = all_plus())
{
    DomainSpec s;
    s.shape = Shape::diamond;
    s.dim = 2;
    s.L = L;
    s.boundary = std::move(f);
    return build_domain(s);
}

// Spin configuration over a domain, bit-packed (bit set = +1), with the energy kept in sync.
class SpinConfig {
public:
    SpinConfig() = default;
    SpinConfig(DomainPtr dom, int fill) : dom_(std::move(dom))
    {
        std::size_t n = dom_->size();
        words_.assign((n + 63) / 64, fill > 0 ? ~std::uint64_t(0) : 0);
        if (n % 64 && fill > 0) words_.back() = (std::uint64_t(1) << (n % 64)) - 1;
        energy_ = recompute_energy();
    }

    const Domain& domain() const { return *dom_; }
    const DomainPtr& domain_ptr() const { return dom_; }
    std::size_t size() const { return dom_->size(); }

    int spin(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1 ? 1 : -1; }

    // sum of the neighbouring spins of site i, boundary included
    int neighbor_sum(std::size_t i) const
    {
        int s = dom_->boundary_sum(i);
        for (int k = 0; k < dom_->degree(); ++k) {
            int j = dom_->neighbor(i, k);
            if (j >= 0) s += spin(j);
        }
        return s;
    }

    void set(std::size_t i, int s)
    {
        if (spin(i) == s) return;
        energy_ += 2LL * spin(i) * neighbor_sum(i);
        words_[i >> 6] ^= std::uint64_t(1) << (i & 63);
    }
    void flip(std::size_t i) { set(i, -spin(i)); }

    long long energy() const { return energy_; }

    std::size_t count_minus() const
    {
        std::size_t plus = 0;
        for (auto w : words_) plus += std::popcount(w);
        return size() - plus;
    }
    long long magnetization() const { return static_cast<long long>(size()) - 2LL * count_minus(); }
    bool all_plus() const { return count_minus() == 0; }

    // sitewise order: this <= other
    bool leq(const SpinConfig& o) const
    {
        for (std::size_t k = 0; k < words_.size(); ++k)
            if (words_[k] & ~o.words_[k]) return false;
        return true;
    }
    bool operator==(const SpinConfig& o) const { return words_ == o.words_; }

    std::uint64_t hash() const { return fnv1a(words_.data(), words_.size() * sizeof(std::uint64_t)); }
    const std::vector<std::uint64_t>& words() const { return words_; }

    long long recompute_energy() const
    {
        long long h = 0;
        for (std::size_t i = 0; i < size(); ++i) {
            int s = spin(i);
            h -= static_cast<long long>(s) * dom_->boundary_sum(i);
            for (int k = 0; k < dom_->degree(); ++k) {
                int j = dom_->neighbor(i, k);
                if (j > static_cast<int>(i)) h -= static_cast<long long>(s) * spin(j);
            }
        }
        return h;
    }

private:
    DomainPtr dom_;
    std::vector<std::uint64_t> words_;
    long long energy_ = 0;
};

// H = -sum_{x~y in Lambda} s_x s_y - sum_{x in Lambda, y in boundary} s_x eta_y
inline long long energy(const SpinConfig& s) { return s.recompute_energy(); }

inline long long energy_delta(const SpinConfig& s, std::size_t i) { return 2LL * s.spin(i) * s.neighbor_sum(i); }

inline long long energy_delta(const SpinConfig& s, const Site& x)
{
    long i = s.domain().index_of(x);
    if (i < 0) throw std::out_of_range("site is not in the domain");
    return energy_delta(s, static_cast<std::size_t>(i));
}

} // namespace isinglab
