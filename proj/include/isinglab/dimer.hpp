#pragma once

// Translation-invariant dimer measure on the honeycomb lattice.
//
// Labels: white w_{x,y}, black b_{x,y}. The three neighbours of w_{x,y} are
//     b_{x,y}   (edge of type c, weight k_c)
//     b_{x,y-1} (type a, weight k_a)
//     b_{x+1,y} (type b, weight k_b)
// so that sum_b K^{-1}(w, b) K(b, w') = 1{w = w'} with
//     K^{-1}(w_{0,0}, b_{x,y}) = (2 pi i)^{-2} oint oint z^{-y} w^x / (k_c + k_a z + k_b w) dz/z dw/w.
//
// The denominator vanishes on the torus (k_a, k_b, k_c are the sides of a triangle), so the
// double integral is evaluated as an iterated one: for fixed z = e^{i t} the w-integral is a
// residue sum, with A = k_c + k_a z,
//     |A| > k_b:  (1/A) (-k_b/A)^{-x}  for x <= 0, else 0
//     |A| < k_b:  (1/k_b) (-A/k_b)^{x-1} for x >= 1, else 0
// and the t-integral is smooth away from |A| = k_b, i.e. t = +-(pi - theta_b).

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

namespace isinglab {

struct DimerSpec {
    double pa = 1.0 / 3, pb = 1.0 / 3, pc = 1.0 / 3;
    double ka = 0, kb = 0, kc = 0;
    double theta_a = 0, theta_b = 0, theta_c = 0;

    DimerSpec() : DimerSpec(1.0 / 3, 1.0 / 3, 1.0 / 3) {}
    DimerSpec(double a, double b, double c) : pa(a), pb(b), pc(c)
    {
        if (!(a > 0 && b > 0 && c > 0)) throw std::invalid_argument("dimer probabilities must be positive");
        if (std::abs(a + b + c - 1) > 1e-12) throw std::invalid_argument("dimer probabilities must sum to 1");
        theta_a = std::numbers::pi * a;
        theta_b = std::numbers::pi * b;
        theta_c = std::numbers::pi * c;
        // law of sines for the triangle of perimeter 1 with angles theta
        double s = std::sin(theta_a) + std::sin(theta_b) + std::sin(theta_c);
        ka = std::sin(theta_a) / s;
        kb = std::sin(theta_b) / s;
        kc = std::sin(theta_c) / s;
    }
};

namespace detail {

inline std::complex<double> residue_w(double t, int x, const DimerSpec& s)
{
    std::complex<double> A = s.kc + s.ka * std::polar(1.0, t);
    if (std::abs(A) > s.kb) {
        if (x > 0) return 0.0;
        return std::pow(-s.kb / A, -x) / A;
    }
    if (x < 1) return 0.0;
    return std::pow(-A / s.kb, x - 1) / s.kb;
}

// composite 20-point Gauss-Legendre with m equal panels on [a, b]
template <class F>
double gauss_panels(F&& f, double a, double b, int m)
{
    double h = (b - a) / m, sum = 0;
    for (int k = 0; k < m; ++k) {
        double lo = a + k * h;
        sum += boost::math::quadrature::gauss<double, 20>::integrate(f, lo, lo + h);
    }
    return sum;
}

} // namespace detail

struct KinvResult {
    double value = 0;
    double error = 0;  // difference of the last two refinements
    int panels = 0;
};

// K^{-1}(w_{0,0}, b_{x,y}); panel doubling until successive values differ by less than tol
inline KinvResult kinv_quadrature_detail(int x, int y, const DimerSpec& s, double tol = 1e-12, int max_panels = 1 << 14)
{
    if (std::abs(x) > 1000 || std::abs(y) > 1000) throw std::invalid_argument("|x|, |y| must be at most 1000");
    auto f = [&](double t) { return std::real(std::polar(1.0, -y * t) * detail::residue_w(t, x, s)) / (2 * std::numbers::pi); };
    const double pi = std::numbers::pi, j = pi - s.theta_b;
    auto eval = [&](int m) {
        // the outer arcs carry x >= 1, the inner arc x <= 0
        if (x <= 0) return detail::gauss_panels(f, -j, j, m);
        return detail::gauss_panels(f, j, pi, m) + detail::gauss_panels(f, -pi, -j, m);
    };
    int m = 2 + (std::abs(x) + std::abs(y)) / 8;
    double prev = eval(m);
    while (m < max_panels) {
        m *= 2;
        double cur = eval(m);
        if (std::abs(cur - prev) < tol) return {cur, std::abs(cur - prev), m};
        prev = cur;
    }
    throw std::runtime_error("K^{-1} quadrature did not converge within the panel budget");
}

inline double kinv_quadrature(int x, int y, const DimerSpec& s) { return kinv_quadrature_detail(x, y, s).value; }

// closed form of K^{-1}(w_{0,0}, b_{n,-1}) as printed; the global sign is conventional
inline double kinv_closed(int n, const DimerSpec& s)
{
    if (n == 0) return s.pa / s.ka;
    double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return sign * std::sin(n * std::numbers::pi * s.pa) / (std::numbers::pi * n * s.ka);
}

// a_m = k_a K^{-1}(w_{0,0}, b_{-m,-1}) = (-1)^m sin(m pi p_a) / (pi m), a_0 = p_a
inline double toeplitz_entry(int m, const DimerSpec& s)
{
    if (m == 0) return s.pa;
    double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return sign * std::sin(m * std::numbers::pi * s.pa) / (std::numbers::pi * m);
}

struct ToeplitzA {
    int n = 0;
    std::vector<double> a;  // a_0 .. a_{n-1}
    Eigen::MatrixXd matrix() const
    {
        Eigen::MatrixXd M(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M(i, j) = a[std::abs(i - j)];
        return M;
    }
};

struct BernoulliProfile {
    std::vector<double> q;
    double min_raw = 0, max_raw = 0;  // eigenvalue range before clipping
};

inline ToeplitzA toeplitz_A(int n, const DimerSpec& s)
{
    if (n < 1) throw std::invalid_argument("n must be positive");
    ToeplitzA A;
    A.n = n;
    for (int m = 0; m < n; ++m) A.a.push_back(toeplitz_entry(m, s));
    return A;
}

inline BernoulliProfile bernoulli_profile(const ToeplitzA& A, double tol = 1e-9)
{
    Eigen::MatrixXd M = A.matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues();
    if (es.info() != Eigen::Success) {
        // the implicit QR occasionally stalls on these matrices (n = 102 at p = (0.2, 0.3, 0.5));
        // the shifted matrix takes a different iteration path
        es.compute(M - 0.5 * Eigen::MatrixXd::Identity(A.n, A.n), Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition of A failed");
        ev = es.eigenvalues().array() + 0.5;
    }
    BernoulliProfile p;
    p.min_raw = ev.minCoeff();
    p.max_raw = ev.maxCoeff();
    if (p.min_raw < -tol || p.max_raw > 1 + tol) throw std::runtime_error("eigenvalue of A outside [0,1]");
    for (int i = 0; i < ev.size(); ++i) p.q.push_back(std::clamp(ev[i], 0.0, 1.0));
    return p;
}

inline std::pair<ToeplitzA, BernoulliProfile> build_A(int n, const DimerSpec& s)
{
    ToeplitzA A = toeplitz_A(n, s);
    return {A, bernoulli_profile(A)};
}

// Tr(A) - Tr(A^2) = n a_0 (1 - a_0) - sum_{i=1}^{n-1} 2 (n - i) a_i^2
inline double variance_Nn(int n, const DimerSpec& s)
{
    if (n < 1) throw std::invalid_argument("n must be positive");
    double a0 = s.pa, v = n * a0 * (1 - a0);
    for (int i = 1; i < n; ++i) {
        double ai = toeplitz_entry(i, s);
        v -= 2.0 * (n - i) * ai * ai;
    }
    return v;
}

inline double variance_from_profile(const BernoulliProfile& p)
{
    double v = 0;
    for (double q : p.q) v += q * (1 - q);
    return v;
}

// |a_0 (1 - a_0) - 2 sum_{i=1}^N a_i^2|
inline double fourier_identity_residual(const DimerSpec& s, long N)
{
    if (N < 1) throw std::invalid_argument("cutoff must be positive");
    double sum = 0, comp = 0;
    // add the small tail terms first
    for (long i = N; i >= 1; --i) {
        double si = std::sin(double(i) * std::numbers::pi * s.pa) / (std::numbers::pi * double(i));
        double y = 2 * si * si - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return std::abs(s.pa * (1 - s.pa) - sum);
}

struct TailBound {
    double exact = 0;      // P(N - EN >= Delta/4)
    double chernoff = 0;   // e^{-Delta/4} prod (q e^{1-q} + (1-q) e^{-q})
    double bound = 0;      // e^{-Delta/4 + Var}
    double mean = 0, variance = 0;
};

// distribution of a sum of independent Bernoulli(q_i)
inline std::vector<double> poisson_binomial_pmf(const std::vector<double>& q)
{
    std::vector<double> pmf{1.0};
    for (double qi : q) {
        std::vector<double> next(pmf.size() + 1, 0.0);
        for (std::size_t k = 0; k < pmf.size(); ++k) {
            next[k] += pmf[k] * (1 - qi);
            next[k + 1] += pmf[k] * qi;
        }
        pmf.swap(next);
    }
    return pmf;
}

inline TailBound poisson_binomial_tail(const std::vector<double>& q, double Delta)
{
    if (!(Delta > 0)) throw std::invalid_argument("Delta must be positive");
    TailBound r;
    double logprod = 0;
    for (double qi : q) {
        r.mean += qi;
        r.variance += qi * (1 - qi);
        logprod += std::log(qi * std::exp(1 - qi) + (1 - qi) * std::exp(-qi));
    }
    std::vector<double> pmf = poisson_binomial_pmf(q);
    double threshold = r.mean + Delta / 4;
    double sum = 0, comp = 0;
    for (std::size_t k = pmf.size(); k-- > 0;) {
        if (double(k) < threshold - 1e-12) break;
        double y = pmf[k] - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    r.exact = sum;
    r.chernoff = std::exp(-Delta / 4 + logprod);
    r.bound = std::exp(-Delta / 4 + r.variance);
    return r;
}

enum class EdgeType { a, b, c };

struct DimerEdge {
    int wx = 0, wy = 0;  // white endpoint w_{wx,wy}
    int bx = 0, by = 0;  // black endpoint b_{bx,by}
};

inline EdgeType edge_type(const DimerEdge& e)
{
    int dx = e.bx - e.wx, dy = e.by - e.wy;
    if (dx == 0 && dy == 0) return EdgeType::c;
    if (dx == 0 && dy == -1) return EdgeType::a;
    if (dx == 1 && dy == 0) return EdgeType::b;
    throw std::invalid_argument("edge endpoints are not nearest neighbours");
}

inline double edge_weight(EdgeType t, const DimerSpec& s)
{
    return t == EdgeType::a ? s.ka : (t == EdgeType::b ? s.kb : s.kc);
}

// P(all edges are dimers) = prod K(b_i, w_i) det(K^{-1}(w_i, b_j))
inline double edge_probability(const std::vector<DimerEdge>& edges, const DimerSpec& s)
{
    if (edges.size() > 12) throw std::invalid_argument("at most 12 edges");
    int k = int(edges.size());
    if (k == 0) return 1.0;
    double prod = 1;
    for (const DimerEdge& e : edges) prod *= edge_weight(edge_type(e), s);
    Eigen::MatrixXd M(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) M(i, j) = kinv_quadrature(edges[j].bx - edges[i].wx, edges[j].by - edges[i].wy, s);
    return prod * M.determinant();
}

} // namespace isinglab
