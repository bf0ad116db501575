#pragma once

#include <uavwpt/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

namespace uavwpt::numerics {

struct ToleranceConfig {
    double w_tol = 1e-12;
    double root_tol = 1e-10;
    double quad_rel_tol = 1e-9;
    int max_iter = 200;
};

inline constexpr double e_const = 2.718281828459045235360287;
// 1/e split into a double and the rounding remainder.
inline constexpr double inv_e_hi = 0.36787944117144233402;
inline constexpr double inv_e_lo = -1.2428753672788363168e-17;

namespace detail {

inline constexpr double eps = std::numeric_limits<double>::epsilon();

// (t-1)e^t + 1, accurate for small t.
inline double shifted_residual_base(double t)
{
    if (std::fabs(t) < 0.5) {
        double term = t;  // t^k / k!
        double sum = 0.0;
        for (int k = 2; k < 40; ++k) {
            term *= t / k;
            double add = (k - 1) * term;
            sum += add;
            if (std::fabs(add) <= eps * 0.25 * std::fabs(sum))
                break;
        }
        return sum;
    }
    return t * std::exp(t) - std::expm1(t);
}

}  // namespace detail

inline double lambert_w0(double x, const ToleranceConfig& tol = {});

// Returns W0(d - 1/e) + 1 for d >= 0 where d is the exact offset above the branch point.
// Avoids the cancellation of forming d - 1/e explicitly.
inline double lambert_w0_shifted(double d, const ToleranceConfig& tol = {})
{
    if (std::isnan(d))
        throw DomainError("lambert_w0_shifted: NaN offset");
    if (d < 0.0) {
        if (d > -1e-15)
            return 0.0;
        throw DomainError("lambert_w0_shifted: argument below -1/e");
    }
    if (d == 0.0)
        return 0.0;
    if (d > 0.15)
        return lambert_w0((d - inv_e_hi) - inv_e_lo, tol) + 1.0;

    // solve (t-1)e^t + 1 = e*d
    const double target = e_const * d;
    const double p = std::sqrt(2.0 * target);
    double t = p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    for (int it = 0; it < tol.max_iter; ++it) {
        double et = std::exp(t);
        double r = detail::shifted_residual_base(t) - target;
        double r1 = t * et;
        double r2 = (t + 1.0) * et;
        double dt = r / (r1 - 0.5 * r * r2 / r1);
        t -= dt;
        if (std::fabs(dt) <= 4.0 * detail::eps * t)
            return t;
    }
    throw AccuracyError("lambert_w0_shifted: no convergence");
}

// Principal branch W0 on [-1/e, inf).
inline double lambert_w0(double x, const ToleranceConfig& tol)
{
    if (std::isnan(x))
        throw DomainError("lambert_w0: NaN argument");
    if (x == std::numeric_limits<double>::infinity())
        return x;
    if (x == 0.0)
        return 0.0;
    if (x < -0.25) {
        double d = (x + inv_e_hi) + inv_e_lo;
        if (d < -1e-15)
            throw DomainError("lambert_w0: argument below -1/e");
        return lambert_w0_shifted(std::max(d, 0.0), tol) - 1.0;
    }
    if (std::fabs(x) < 1e-300)
        return x;

    double w;
    if (x < 3.0) {
        w = std::log1p(x);
    } else {
        double l1 = std::log(x);
        double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }

    const bool log_form = x > 1e3;
    const double lx = log_form ? std::log(x) : 0.0;
    for (int it = 0; it < tol.max_iter; ++it) {
        double dw;
        if (log_form) {
            double g = w + std::log(w) - lx;
            double g1 = 1.0 + 1.0 / w;
            double g2 = -1.0 / (w * w);
            dw = g / (g1 - 0.5 * g * g2 / g1);
        } else {
            double ew = std::exp(w);
            double f = w * ew - x;
            double wp1 = w + 1.0;
            dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        }
        w -= dw;
        if (std::fabs(dw) <= 4.0 * detail::eps * std::fabs(w) || dw == 0.0)
            return w;
    }
    throw AccuracyError("lambert_w0: no convergence");
}

struct Bracket {
    double lo;
    double hi;
};

// Shrinks [lo, hi] around a sign change of f. If f(lo) and f(hi) have the same sign,
// the bracket width is doubled (hi moves right) until hi reaches hi_cap.
// tol applies to both |f| and the bracket width; tol = 0 runs to floating-point resolution.
template <class F>
Bracket bisect_bracket(F&& f, double lo, double hi, double tol, int max_iter = 200,
                       double hi_cap = std::numeric_limits<double>::infinity())
{
    if (!(lo <= hi))
        throw DomainError("bisect: lo > hi");
    double flo = f(lo);
    double fhi = f(hi);
    while ((flo > 0.0) == (fhi > 0.0) && flo != 0.0 && fhi != 0.0) {
        if (hi >= hi_cap)
            throw BracketError("bisect: no sign change up to cap");
        double width = hi - lo;
        if (width <= 0.0)
            width = std::max(1.0, std::fabs(lo));
        hi = std::min(hi_cap, lo + 2.0 * width);
        fhi = f(hi);
    }
    if (flo == 0.0)
        return {lo, lo};
    if (fhi == 0.0)
        return {hi, hi};

    const bool rising = fhi > 0.0;
    for (int it = 0; it < max_iter; ++it) {
        if (hi - lo <= tol)
            return {lo, hi};
        double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi)
            return {lo, hi};
        double fm = f(mid);
        if (fm == 0.0 || std::fabs(fm) <= tol)
            return {mid, mid};
        if ((fm > 0.0) == rising)
            hi = mid;
        else
            lo = mid;
    }
    throw AccuracyError("bisect: iteration cap reached");
}

template <class F>
double bisect_root(F&& f, double lo, double hi, double tol, int max_iter = 200,
                   double hi_cap = std::numeric_limits<double>::infinity())
{
    Bracket b = bisect_bracket(f, lo, hi, tol, max_iter, hi_cap);
    return b.lo + 0.5 * (b.hi - b.lo);
}

namespace detail {

inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod(F& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fc = f(c);
    double k = fc * wgk[7];
    double g = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        double dx = h * xgk[j];
        double s = f(c - dx) + f(c + dx);
        k += wgk[j] * s;
        if (j % 2 == 1)
            g += wg[j / 2] * s;
    }
    return {a, b, k * h, std::fabs((k - g) * h)};
}

}  // namespace detail

// Adaptive 7/15-point Gauss-Kronrod; max_intervals caps the subdivision count.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-9,
                          int max_intervals = 200)
{
    if (!(a <= b))
        throw DomainError("integrate_adaptive: a > b");
    if (a == b)
        return 0.0;

    std::priority_queue<detail::Segment> heap;
    detail::Segment first = detail::gauss_kronrod(f, a, b);
    double value = first.value;
    double error = first.error;
    heap.push(first);
    int count = 1;
    while (error > rel_tol * std::fabs(value)) {
        if (count >= max_intervals)
            throw AccuracyError("integrate_adaptive: subdivision cap reached");
        detail::Segment s = heap.top();
        heap.pop();
        double m = 0.5 * (s.a + s.b);
        if (m <= s.a || m >= s.b)
            throw AccuracyError("integrate_adaptive: interval too small");
        detail::Segment l = detail::gauss_kronrod(f, s.a, m);
        detail::Segment r = detail::gauss_kronrod(f, m, s.b);
        value += l.value + r.value - s.value;
        error += l.error + r.error - s.error;
        heap.push(l);
        heap.push(r);
        ++count;
        if (error < 0.0) {
            // drift from incremental updates; recompute
            error = 0.0;
            auto copy = heap;
            while (!copy.empty()) {
                error += copy.top().error;
                copy.pop();
            }
        }
    }
    return value;
}

}  // namespace uavwpt::numerics
