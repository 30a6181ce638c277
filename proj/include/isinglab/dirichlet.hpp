#pragma once

// Bridge paths phi on {-L/2, .., L/2} with phi_{+-L/2} = 0 and steps nabla_x = phi_{x+1} - phi_x = +-1,
// the product test function
//     g(phi) = prod_{x<0} cos(pi x/L)^{(1 - nabla_x)/2} prod_{x>=0} cos(pi (x+1)/L)^{(1 + nabla_x)/2}
// (0^0 = 1) and the heat-bath generator of the uniform measure rho, which resamples phi_x at
// every interior local extremum. Expectations under rho(. g^2) come from a forward/backward
// recursion over (step, height) with per-step rescaling.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace isinglab {

struct PathEnsemble {
    int L = 0;
    // step i covers x = -L/2 + i; v[i][s] is the factor of g for nabla = +1 (s = 1) or -1 (s = 0)
    std::vector<std::array<double, 2>> v;

    explicit PathEnsemble(int L_) : L(L_)
    {
        if (L < 2 || L % 2) throw std::invalid_argument("L must be even and at least 2");
        for (int i = 0; i < L; ++i) {
            int x = -L / 2 + i;
            std::array<double, 2> f{1.0, 1.0};
            if (x < 0)
                f[0] = std::cos(std::numbers::pi * x / L);
            else
                f[1] = std::cos(std::numbers::pi * (x + 1) / L);
            // cos(pi/2) in floating point is 6e-17; the weight is exactly zero
            for (double& w : f)
                if (std::abs(w) < 1e-15) w = 0.0;
            v.push_back(f);
        }
    }
    int step_index(int x) const { return x + L / 2; }
    double factor(int x, int nabla) const { return v[step_index(x)][nabla > 0 ? 1 : 0]; }
};

struct DirichletReport {
    int L = 0;
    double ratio = 0;        // rho(g(-L^)g) / rho(g^2), all interior x
    double ratio_negative = 0;  // the sum restricted to x < 0 and doubled by symmetry
    double centre_term = 0;  // contribution of x = 0
    // per x = -L/2+1 .. -1: rho(g^2 1{peak at x}) / rho(g^2) / cos^2(pi x/L) and the valley analogue
    // normalised by cos^2(pi (x-1)/L)
    std::vector<int> xs;
    std::vector<double> peak_normalized, valley_normalized;
};

inline DirichletReport dirichlet_test_ratio(int L)
{
    if (L < 4 || L > 4096) throw std::invalid_argument("L must lie in [4, 4096]");
    PathEnsemble E(L);
    int H = L / 2, W = 2 * H + 1;  // heights -H..H
    // F[i][h]: weight of the first i steps ending at height h; B[i][h]: steps i..L-1 from h to 0
    std::vector<std::vector<double>> F(L + 1, std::vector<double>(W, 0.0)), B(L + 1, std::vector<double>(W, 0.0));
    std::vector<double> sF(L + 1, 0.0), sB(L + 1, 0.0);  // log scale factors
    F[0][H] = 1;
    for (int i = 0; i < L; ++i) {
        double w_up = E.v[i][1] * E.v[i][1], w_dn = E.v[i][0] * E.v[i][0], mx = 0;
        for (int h = 0; h < W; ++h) {
            double val = 0;
            if (h > 0) val += F[i][h - 1] * w_up;
            if (h + 1 < W) val += F[i][h + 1] * w_dn;
            F[i + 1][h] = val;
            mx = std::max(mx, val);
        }
        if (mx <= 0) throw std::runtime_error("all bridge paths carry zero weight");
        for (double& x : F[i + 1]) x /= mx;
        sF[i + 1] = sF[i] + std::log(mx);
    }
    B[L][H] = 1;
    for (int i = L - 1; i >= 0; --i) {
        double w_up = E.v[i][1] * E.v[i][1], w_dn = E.v[i][0] * E.v[i][0], mx = 0;
        for (int h = 0; h < W; ++h) {
            double val = 0;
            if (h + 1 < W) val += w_up * B[i + 1][h + 1];
            if (h > 0) val += w_dn * B[i + 1][h - 1];
            B[i][h] = val;
            mx = std::max(mx, val);
        }
        for (double& x : B[i]) x /= mx;
        sB[i] = sB[i + 1] + std::log(mx);
    }
    double logZ = std::log(F[L][H]) + sF[L];
    // weight of paths with phi_{x-1} = phi_{x+1}, the two steps x-1, x removed
    auto pair_weight = [&](int i) {
        double s = 0;
        for (int h = 0; h < W; ++h) s += F[i - 1][h] * B[i + 1][h];
        return s * std::exp(sF[i - 1] + sB[i + 1] - logZ);
    };
    DirichletReport r;
    r.L = L;
    double total = 0, negative = 0;
    for (int x = -H + 1; x <= H - 1; ++x) {
        int i = E.step_index(x);
        double peak = E.v[i - 1][1] * E.v[i][0], valley = E.v[i - 1][0] * E.v[i][1];
        double rest = pair_weight(i);
        // each peak/valley pair contributes rho-weight * (g_peak - g_valley)^2 / 2 per configuration,
        // summed over both members: 1/4 sum_x rho(1{extremum at x} (g - g^x)^2)
        double term = 0.5 * (peak - valley) * (peak - valley) * rest;
        total += term;
        if (x < 0) negative += term;
        if (x == 0) r.centre_term = term;
        if (x < 0) {
            r.xs.push_back(x);
            double c = std::cos(std::numbers::pi * x / L), cm = std::cos(std::numbers::pi * (x - 1) / L);
            r.peak_normalized.push_back(peak * peak * rest / (c * c));
            r.valley_normalized.push_back(cm * cm > 1e-300 ? valley * valley * rest / (cm * cm) : 0.0);
        }
    }
    // the count of bridges cancels in the ratio: rho(.) = (sum over paths) / #paths
    r.ratio = total;
    r.ratio_negative = 2 * negative;
    return r;
}

// The same quantity straight from the definitions, by enumerating all bridges (L <= 16):
// rho(g(-L^)g) = sum_phi g(phi) sum_x [g(phi) - mean of g over the admissible values of phi_x].
inline double dirichlet_ratio_bruteforce(int L)
{
    if (L < 2 || L % 2 || L > 16) throw std::invalid_argument("brute force needs even L <= 16");
    int H = L / 2;
    auto gval = [&](const std::vector<int>& nab) {
        double g = 1;
        for (int i = 0; i < L; ++i) {
            int x = -H + i;
            double c = x < 0 ? std::cos(std::numbers::pi * x / L) : std::cos(std::numbers::pi * (x + 1) / L);
            int e = x < 0 ? (1 - nab[i]) / 2 : (1 + nab[i]) / 2;
            if (e == 1) g *= (std::abs(c) < 1e-15 ? 0.0 : c);
        }
        return g;
    };
    double num = 0, den = 0;
    for (unsigned m = 0; m < (1u << L); ++m) {
        if (std::popcount(m) != H) continue;
        std::vector<int> nab(L);
        for (int i = 0; i < L; ++i) nab[i] = (m >> i) & 1 ? 1 : -1;
        double g = gval(nab);
        den += g * g;
        double gen = 0;
        for (int i = 1; i < L; ++i) {  // interior point x = -H + i sits between steps i-1 and i
            if (nab[i - 1] == nab[i]) continue;
            std::vector<int> o = nab;
            std::swap(o[i - 1], o[i]);
            gen += g - 0.5 * (g + gval(o));
        }
        num += g * gen;
    }
    return num / den;
}

} // namespace isinglab
