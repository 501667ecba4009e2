#pragma once

// Globally adaptive Gauss-Kronrod (G7/K15) quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

namespace sharplad::quad {

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

// Kronrod nodes (positive half) and weights; odd-indexed nodes are Gauss nodes.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
Estimate gk15(const F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrod[7];
    double gauss = fc * kGauss[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kNodes[j];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kKronrod[j] * pair;
        if (j % 2 == 1) gauss += kGauss[j / 2] * pair;
    }
    return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

struct Panel {
    double a;
    double b;
    Estimate est;
    bool operator<(const Panel& other) const { return est.error < other.est.error; }
};

}  // namespace detail

/// Integrates f over [a, b]. The panel with the largest Kronrod-Gauss
/// discrepancy is split until the summed discrepancy drops below abs_tol,
/// reaches the rounding floor, or max_panels panels exist.
template <class F>
Estimate integrate(const F& f, double a, double b, double abs_tol = 1e-12, int max_panels = 2000) {
    if (a == b) return {};
    if (b < a) {
        const Estimate e = integrate(f, b, a, abs_tol, max_panels);
        return {-e.value, e.error};
    }
    constexpr double kRounding = 50.0 * std::numeric_limits<double>::epsilon();
    std::priority_queue<detail::Panel> heap;
    Estimate total = detail::gk15(f, a, b);
    heap.push({a, b, total});
    while (static_cast<int>(heap.size()) < max_panels) {
        if (total.error <= abs_tol || total.error <= kRounding * std::abs(total.value)) break;
        const detail::Panel worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;
        heap.pop();
        const Estimate left = detail::gk15(f, worst.a, mid);
        const Estimate right = detail::gk15(f, mid, worst.b);
        total.value += left.value + right.value - worst.est.value;
        total.error += left.error + right.error - worst.est.error;
        heap.push({worst.a, mid, left});
        heap.push({mid, worst.b, right});
    }
    // Re-sum to shed the drift of the running updates.
    Estimate sum;
    while (!heap.empty()) {
        sum.value += heap.top().est.value;
        sum.error += heap.top().est.error;
        heap.pop();
    }
    return sum;
}

/// Finds t in [lo, hi] with g(t) = target for nondecreasing g by bracketing
/// bisection. g(lo) <= target <= g(hi) is assumed.
template <class G>
double bisect_monotone(const G& g, double target, double lo, double hi, double x_tol = 1e-13,
                       int max_iter = 200) {
    for (int it = 0; it < max_iter && hi - lo > x_tol * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace sharplad::quad
