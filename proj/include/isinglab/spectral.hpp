#pragma once

// Exact generators of the heat-bath dynamics on tiny domains, the symmetrized matrix
// U = sqrt(pi) L sqrt(pi)^{-1}, the zero-temperature block structure of U and the killed
// semigroups of its blocks.
//
// States are indexed by bit masks: bit i set means spin i is "-", so the all-plus state is 0.
// Every off-diagonal entry connects k and k ^ (1 << i); generators are stored in that flip
// structure as one rate per (state, site).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "glauber.hpp"
#include "lattice.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace isinglab {

inline constexpr std::size_t kMaxEnumeratedStates = std::size_t(1) << 20;

struct StateSpace {
    DomainPtr dom;
    int n = 0;
    std::size_t states = 0;
    std::vector<std::int32_t> energy;  // H per state

    int spin(std::size_t k, int i) const { return (k >> i) & 1 ? -1 : 1; }
    // H(k ^ bit i) - H(k)
    int delta(std::size_t k, int i) const
    {
        int S = dom->boundary_sum(i);
        for (int q = 0; q < dom->degree(); ++q) {
            int j = dom->neighbor(i, q);
            if (j >= 0) S += spin(k, j);
        }
        return 2 * spin(k, i) * S;
    }
    SpinConfig config(std::size_t k) const
    {
        SpinConfig s(dom, +1);
        for (int i = 0; i < n; ++i)
            if ((k >> i) & 1) s.set(i, -1);
        return s;
    }
    std::size_t index(const SpinConfig& s) const
    {
        std::size_t k = 0;
        for (int i = 0; i < n; ++i)
            if (s.spin(i) < 0) k |= std::size_t(1) << i;
        return k;
    }
};

inline StateSpace enumerate_states(DomainPtr dom, std::size_t budget = kMaxEnumeratedStates)
{
    StateSpace sp;
    sp.n = int(dom->size());
    if (sp.n >= 63 || (std::size_t(1) << sp.n) > budget) throw std::length_error("state space exceeds the enumeration budget");
    sp.dom = std::move(dom);
    sp.states = std::size_t(1) << sp.n;
    sp.energy.resize(sp.states);
    parallel_for(sp.states, [&](std::size_t k) {
        long h = 0;
        for (int i = 0; i < sp.n; ++i) {
            int s = sp.spin(k, i);
            h -= long(s) * sp.dom->boundary_sum(i);
            for (int q = 0; q < sp.dom->degree(); ++q) {
                int j = sp.dom->neighbor(i, q);
                if (j > i) h -= long(s) * sp.spin(k, j);
            }
        }
        sp.energy[k] = std::int32_t(h);
    }, 1);
    return sp;
}

// rate of sigma -> sigma^x given dH = H(sigma^x) - H(sigma): 1 / (1 + e^{beta dH}); at beta = inf 0, 1/2 or 1
inline double flip_rate(int dH, double beta)
{
    if (std::isinf(beta)) return dH > 0 ? 0.0 : (dH < 0 ? 1.0 : 0.5);
    return 1.0 / (1.0 + std::exp(beta * dH));
}

struct SparseGenerator {
    StateSpace space;
    double beta = 1;
    std::vector<double> rate;   // states * n, rate of flipping site i from state k
    std::vector<double> diag;
    std::vector<double> logpi;  // log of the normalized Gibbs weights (finite beta)

    std::size_t states() const { return space.states; }
    int sites() const { return space.n; }
    double off(std::size_t k, int i) const { return rate[k * space.n + i]; }

    Eigen::SparseMatrix<double, Eigen::RowMajor> sparse() const
    {
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(states() * (sites() + 1));
        for (std::size_t k = 0; k < states(); ++k) {
            t.emplace_back(int(k), int(k), diag[k]);
            for (int i = 0; i < sites(); ++i)
                if (off(k, i) != 0) t.emplace_back(int(k), int(k ^ (std::size_t(1) << i)), off(k, i));
        }
        int N = static_cast<int>(states());
        Eigen::SparseMatrix<double, Eigen::RowMajor> M(N, N);
        M.setFromTriplets(t.begin(), t.end());
        return M;
    }
    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(sparse()); }
    double pi(std::size_t k) const { return std::exp(logpi[k]); }
};

inline SparseGenerator build_generator(DomainPtr dom, double beta, std::size_t budget = kMaxEnumeratedStates)
{
    if (!(beta >= 0)) throw std::invalid_argument("beta must be non-negative");
    SparseGenerator g;
    g.space = enumerate_states(std::move(dom), budget);
    g.beta = beta;
    std::size_t N = g.states();
    int n = g.sites();
    g.rate.resize(N * n);
    g.diag.assign(N, 0.0);
    for (std::size_t k = 0; k < N; ++k) {
        double d = 0;
        for (int i = 0; i < n; ++i) {
            double r = flip_rate(g.space.delta(k, i), beta);
            g.rate[k * n + i] = r;
            d -= r;
        }
        g.diag[k] = d;
    }
    if (!std::isinf(beta)) {
        g.logpi.resize(N);
        double hmin = *std::min_element(g.space.energy.begin(), g.space.energy.end());
        double z = 0;
        for (std::size_t k = 0; k < N; ++k) z += std::exp(-beta * (g.space.energy[k] - hmin));
        double logz = std::log(z) - beta * hmin;
        for (std::size_t k = 0; k < N; ++k) g.logpi[k] = -beta * g.space.energy[k] - logz;
    }
    return g;
}

struct GeneratorChecks {
    double row_sum = 0;          // max |sum_j L(k, j)|
    double min_offdiag = 0;
    double detailed_balance = 0; // max |pi(k) L(k,k') - pi(k') L(k',k)|
    double stationarity = 0;     // max |(pi L)(k)|
};

inline GeneratorChecks check_generator(const SparseGenerator& g)
{
    GeneratorChecks c;
    c.min_offdiag = 1;
    std::vector<double> piL(g.states(), 0.0);
    bool finite = !g.logpi.empty();
    for (std::size_t k = 0; k < g.states(); ++k) {
        double s = g.diag[k];
        for (int i = 0; i < g.sites(); ++i) {
            std::size_t k2 = k ^ (std::size_t(1) << i);
            s += g.off(k, i);
            c.min_offdiag = std::min(c.min_offdiag, g.off(k, i));
            if (finite) {
                c.detailed_balance = std::max(c.detailed_balance, std::abs(g.pi(k) * g.off(k, i) - g.pi(k2) * g.off(k2, i)));
                piL[k2] += g.pi(k) * g.off(k, i);
            }
        }
        c.row_sum = std::max(c.row_sum, std::abs(s));
        if (finite) piL[k] += g.pi(k) * g.diag[k];
    }
    if (finite)
        for (double v : piL) c.stationarity = std::max(c.stationarity, std::abs(v));
    return c;
}

// U(k, k') = sqrt(pi(k)) L(k, k') / sqrt(pi(k')), same flip structure
struct SymmetrizedMatrix {
    std::size_t states = 0;
    int n = 0;
    std::vector<double> value;
    std::vector<double> diag;

    double off(std::size_t k, int i) const { return value[k * n + i]; }
    double symmetry_defect() const
    {
        double d = 0;
        for (std::size_t k = 0; k < states; ++k)
            for (int i = 0; i < n; ++i) d = std::max(d, std::abs(off(k, i) - off(k ^ (std::size_t(1) << i), i)));
        return d;
    }
    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const
    {
        y.resize(x.size());
        for (std::size_t k = 0; k < states; ++k) {
            double s = diag[k] * x[k];
            for (int i = 0; i < n; ++i) s += off(k, i) * x[k ^ (std::size_t(1) << i)];
            y[k] = s;
        }
    }
    Eigen::MatrixXd dense() const
    {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(int(states), int(states));
        for (std::size_t k = 0; k < states; ++k) {
            M(k, k) = diag[k];
            for (int i = 0; i < n; ++i) M(k, k ^ (std::size_t(1) << i)) = off(k, i);
        }
        return M;
    }
};

inline SymmetrizedMatrix symmetrize(const SparseGenerator& g)
{
    if (g.logpi.empty()) throw std::invalid_argument("symmetrization needs strictly positive weights (finite beta)");
    SymmetrizedMatrix U;
    U.states = g.states();
    U.n = g.sites();
    U.value.resize(g.rate.size());
    U.diag = g.diag;
    for (std::size_t k = 0; k < U.states; ++k)
        for (int i = 0; i < U.n; ++i) {
            std::size_t k2 = k ^ (std::size_t(1) << i);
            U.value[k * U.n + i] = std::exp(0.5 * (g.logpi[k] - g.logpi[k2])) * g.off(k, i);
        }
    return U;
}

// U at beta = infinity: 1/2 on equal-energy flips, diagonal -(#equal)/2 - #(decreasing)
inline SymmetrizedMatrix symmetrized_limit(const StateSpace& sp)
{
    SymmetrizedMatrix U;
    U.states = sp.states;
    U.n = sp.n;
    U.value.assign(sp.states * sp.n, 0.0);
    U.diag.assign(sp.states, 0.0);
    for (std::size_t k = 0; k < sp.states; ++k)
        for (int i = 0; i < sp.n; ++i) {
            int d = sp.delta(k, i);
            if (d == 0) {
                U.value[k * sp.n + i] = 0.5;
                U.diag[k] -= 0.5;
            } else if (d < 0) {
                U.diag[k] -= 1.0;
            }
        }
    return U;
}

// max row sum of |U - U_inf|
inline double remainder_norm(const SymmetrizedMatrix& U, const SymmetrizedMatrix& Uinf)
{
    double worst = 0;
    for (std::size_t k = 0; k < U.states; ++k) {
        double s = std::abs(U.diag[k] - Uinf.diag[k]);
        for (int i = 0; i < U.n; ++i) s += std::abs(U.off(k, i) - Uinf.off(k, i));
        worst = std::max(worst, s);
    }
    return worst;
}

struct BlockDecomposition {
    std::vector<std::uint32_t> class_of;
    std::vector<std::vector<std::uint32_t>> members;
    std::size_t plus_class = 0;
    std::size_t classes() const { return members.size(); }
};

// classes of the graph of equal-energy single flips (union-find)
inline BlockDecomposition decompose_blocks(const StateSpace& sp)
{
    std::vector<std::uint32_t> parent(sp.states);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    for (std::size_t k = 0; k < sp.states; ++k)
        for (int i = 0; i < sp.n; ++i) {
            std::size_t k2 = k ^ (std::size_t(1) << i);
            if (k2 < k || sp.delta(k, i) != 0) continue;
            std::uint32_t a = find(std::uint32_t(k)), b = find(std::uint32_t(k2));
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    BlockDecomposition B;
    B.class_of.resize(sp.states);
    std::vector<std::uint32_t> label(sp.states, UINT32_MAX);
    for (std::size_t k = 0; k < sp.states; ++k) {
        std::uint32_t r = find(std::uint32_t(k));
        if (label[r] == UINT32_MAX) {
            label[r] = std::uint32_t(B.members.size());
            B.members.emplace_back();
        }
        B.class_of[k] = label[r];
        B.members[label[r]].push_back(std::uint32_t(k));
    }
    B.plus_class = B.class_of[0];
    return B;
}

// BFS over equal-energy flips inside each class; true if every class is connected
inline bool blocks_connected(const StateSpace& sp, const BlockDecomposition& B)
{
    std::vector<char> seen(sp.states, 0);
    for (const auto& m : B.members) {
        std::vector<std::uint32_t> stack{m.front()};
        seen[m.front()] = 1;
        std::size_t reached = 0;
        while (!stack.empty()) {
            std::uint32_t k = stack.back();
            stack.pop_back();
            ++reached;
            for (int i = 0; i < sp.n; ++i) {
                std::uint32_t k2 = k ^ (1u << i);
                if (sp.delta(k, i) == 0 && !seen[k2] && B.class_of[k2] == B.class_of[k]) {
                    seen[k2] = 1;
                    stack.push_back(k2);
                }
            }
        }
        if (reached != m.size()) return false;
    }
    return true;
}

// largest |U_inf(k, k')| over pairs in different classes
inline double cross_class_max(const SymmetrizedMatrix& Uinf, const BlockDecomposition& B)
{
    double worst = 0;
    for (std::size_t k = 0; k < Uinf.states; ++k)
        for (int i = 0; i < Uinf.n; ++i)
            if (B.class_of[k] != B.class_of[k ^ (std::size_t(1) << i)]) worst = std::max(worst, std::abs(Uinf.off(k, i)));
    return worst;
}

inline Eigen::MatrixXd block_matrix(const SymmetrizedMatrix& Uinf, const BlockDecomposition& B, std::size_t c)
{
    const auto& m = B.members[c];
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(int(m.size()), int(m.size()));
    for (std::size_t a = 0; a < m.size(); ++a) {
        M(a, a) = Uinf.diag[m[a]];
        for (int i = 0; i < Uinf.n; ++i) {
            std::uint32_t k2 = m[a] ^ (1u << i);
            if (B.class_of[k2] != c || Uinf.off(m[a], i) == 0) continue;
            auto it = std::lower_bound(m.begin(), m.end(), k2);
            M(a, it - m.begin()) = Uinf.off(m[a], i);
        }
    }
    return M;
}

struct LanczosResult {
    std::vector<double> values;                 // largest algebraic, descending
    std::vector<Eigen::VectorXd> vectors;
    int iterations = 0;
    double residual = 0;
    bool converged = false;
};

// Lanczos with full reorthogonalization for the `want` largest eigenvalues of a symmetric
// operator, optionally in the orthogonal complement of `deflate`.
template <class Apply>
LanczosResult lanczos_top(Apply&& apply, std::size_t N, int want, const std::vector<Eigen::VectorXd>& deflate, std::uint64_t seed,
                          int max_iter = 400, double tol = 1e-11)
{
    Engine g(seed);
    std::normal_distribution<double> nd;
    auto project = [&](Eigen::VectorXd& v) {
        for (const auto& d : deflate) v -= d.dot(v) * d;
    };
    Eigen::VectorXd v(N);
    for (std::size_t k = 0; k < N; ++k) v[k] = nd(g);
    project(v);
    v.normalize();
    std::vector<Eigen::VectorXd> Q{v};
    std::vector<double> alpha, betas;
    Eigen::VectorXd w;
    LanczosResult r;
    max_iter = int(std::min<std::size_t>(max_iter, N - deflate.size()));
    for (int it = 0; it < max_iter; ++it) {
        apply(Q.back(), w);
        project(w);
        double a = Q.back().dot(w);
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : Q) w -= q.dot(w) * q;
        project(w);
        double b = w.norm();
        int m = int(alpha.size());
        if (m >= want && (m % 5 == 0 || b < 1e-13 || m == max_iter)) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = betas[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            double res = 0;
            for (int q = 0; q < want; ++q) res = std::max(res, std::abs(b * es.eigenvectors()(m - 1, m - 1 - q)));
            double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
            if (res < tol * scale || b < 1e-13 || m == max_iter) {
                r.iterations = m;
                r.residual = res;
                r.converged = res < tol * scale || b < 1e-13;
                for (int q = 0; q < want; ++q) {
                    r.values.push_back(es.eigenvalues()[m - 1 - q]);
                    Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
                    for (int i = 0; i < m; ++i) x += es.eigenvectors()(i, m - 1 - q) * Q[i];
                    r.vectors.push_back(x.normalized());
                }
                return r;
            }
        }
        betas.push_back(b);
        Q.push_back(w / b);
    }
    return r;
}

struct PrincipalEigen {
    double lambda = 0;       // smallest eigenvalue of -U_inf^(i)
    double next = 0;         // second smallest (infinity for a singleton)
    Eigen::VectorXd vector;  // positive, unit norm
    bool positive = false;
    bool nondegenerate = false;
};

inline PrincipalEigen principal_eigen(const Eigen::MatrixXd& block, std::size_t dense_limit = 3000)
{
    PrincipalEigen p;
    int N = int(block.rows());
    if (N == 0) throw std::invalid_argument("empty block");
    if (N == 1) {
        p.lambda = -block(0, 0);
        p.next = kInf;
        p.vector = Eigen::VectorXd::Ones(1);
        p.positive = p.nondegenerate = true;
        return p;
    }
    if (std::size_t(N) <= dense_limit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
        if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
        p.lambda = -es.eigenvalues()[N - 1];
        p.next = -es.eigenvalues()[N - 2];
        p.vector = es.eigenvectors().col(N - 1);
    } else {
        auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = block * x; };
        LanczosResult r = lanczos_top(apply, N, 2, {}, 1);
        if (!r.converged) throw std::runtime_error("Lanczos did not converge");
        p.lambda = -r.values[0];
        p.next = -r.values[1];
        p.vector = r.vectors[0];
    }
    if (p.vector.sum() < 0) p.vector = -p.vector;
    p.positive = p.vector.minCoeff() > 0;
    p.nondegenerate = p.next - p.lambda > 1e-10;
    return p;
}

struct GapResult {
    double gap = 0;
    bool lanczos = false;
    int iterations = 0;
};

// second smallest eigenvalue of -L, through U; the zero mode sqrt(pi) is deflated
inline GapResult spectral_gap(const SymmetrizedMatrix& U, const SparseGenerator& g, std::size_t dense_limit = 3000)
{
    GapResult r;
    if (U.states <= dense_limit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(U.dense(), Eigen::EigenvaluesOnly);
        r.gap = -es.eigenvalues()[int(U.states) - 2];
        return r;
    }
    Eigen::VectorXd root(U.states);
    for (std::size_t k = 0; k < U.states; ++k) root[k] = std::exp(0.5 * g.logpi[k]);
    root.normalize();
    auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { U.apply(x, y); };
    LanczosResult lr = lanczos_top(apply, U.states, 1, {root}, 7, 600, 1e-10);
    if (!lr.converged) throw std::runtime_error("Lanczos did not converge");
    r.gap = -lr.values[0];
    r.lanczos = true;
    r.iterations = lr.iterations;
    return r;
}

inline double spectral_gap(DomainPtr dom, double beta)
{
    SparseGenerator g = build_generator(std::move(dom), beta);
    return spectral_gap(symmetrize(g), g).gap;
}

// sorted spectra of the (non-symmetric) generator and of U; max difference
inline double spectrum_mismatch(const SparseGenerator& g, const SymmetrizedMatrix& U)
{
    if (g.states() > 4096) throw std::length_error("dense spectrum comparison limited to 4096 states");
    Eigen::EigenSolver<Eigen::MatrixXd> eg(g.dense(), false);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eu(U.dense(), Eigen::EigenvaluesOnly);
    std::vector<double> a, b;
    double imag = 0;
    for (int k = 0; k < eg.eigenvalues().size(); ++k) {
        a.push_back(eg.eigenvalues()[k].real());
        imag = std::max(imag, std::abs(eg.eigenvalues()[k].imag()));
        b.push_back(eu.eigenvalues()[k]);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = imag;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

struct KilledCheck {
    double exact = 0;
    double mc = 0;
    double se = 0;
    double z = 0;
    double survival = 0;  // row sum of the exponential
};

// e^{t U_inf^(c)}(eta, eta') against P(sigma(t) = eta', tau > t) for the beta = inf dynamics,
// tau the first time the energy drops below H(eta)
inline KilledCheck killed_semigroup_check(const StateSpace& sp, const SymmetrizedMatrix& Uinf, const BlockDecomposition& B,
                                          std::size_t eta, std::size_t eta2, double t, std::size_t replicas, std::uint64_t seed)
{
    if (B.class_of[eta] != B.class_of[eta2]) throw std::invalid_argument("eta and eta' must lie in the same class");
    std::size_t c = B.class_of[eta];
    const auto& m = B.members[c];
    if (m.size() > 2000) throw std::length_error("block too large for the dense matrix exponential");
    Eigen::MatrixXd E = (t * block_matrix(Uinf, B, c)).exp();
    int a = int(std::lower_bound(m.begin(), m.end(), std::uint32_t(eta)) - m.begin());
    int b = int(std::lower_bound(m.begin(), m.end(), std::uint32_t(eta2)) - m.begin());
    KilledCheck r;
    r.exact = E(a, b);
    r.survival = E.row(a).sum();
    if (replicas == 0) return r;
    RateRule rule = RateRule::zero_temperature();
    long long h0 = sp.energy[eta];
    std::vector<char> hit(replicas, 0);
    parallel_for(replicas, [&](std::size_t rep) {
        SpinConfig s = sp.config(eta);
        EventStream ev(s.size(), derive_seed(seed, rep));
        while (true) {
            Event e = ev.next();
            if (e.t > t) break;
            heat_bath_update(s, e.site, e.u, rule);
            if (s.energy() < h0) return;
        }
        hit[rep] = sp.index(s) == eta2;
    });
    std::vector<double> x(hit.begin(), hit.end());
    MeanSe ms = mean_se(x);
    r.mc = ms.mean;
    // binomial standard error with the exact p, robust when the sample has no hits
    r.se = std::sqrt(std::max(r.exact * (1 - r.exact), 1e-300) / double(replicas));
    r.z = (r.mc - r.exact) / r.se;
    return r;
}

} // namespace isinglab
