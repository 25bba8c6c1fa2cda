#include "robbins/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace robbins::quadrature {

namespace {

// Kronrod 15-point abscissae; odd indices are the embedded Gauss 7-point nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
};

double checked(const Integrand& f, double x) {
    double v = f(x);
    if (!std::isfinite(v)) {
        throw IntegrandError("integrand returned a non-finite value at x = " + std::to_string(x));
    }
    return v;
}

// One Gauss-Kronrod 7/15 panel with the QUADPACK error heuristic.
Segment gk15(const Integrand& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = checked(f, center);

    double result_k = fc * kWgk[7];
    double result_g = fc * kWg[3];
    double result_abs = std::abs(result_k);
    std::array<double, 7> f1{};
    std::array<double, 7> f2{};

    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = checked(f, center - dx);
        f2[j] = checked(f, center + dx);
        const double sum = f1[j] + f2[j];
        result_k += kWgk[j] * sum;
        result_abs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) {
            result_g += kWg[j / 2] * sum;
        }
    }

    const double mean = 0.5 * result_k;
    double result_asc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) {
        result_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    }

    const double scale = std::abs(half);
    result_asc *= scale;
    result_abs *= scale;
    double err = std::abs((result_k - result_g) * half);
    if (result_asc != 0.0 && err != 0.0) {
        err = result_asc * std::min(1.0, std::pow(200.0 * err / result_asc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (result_abs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(err, 50.0 * eps * result_abs);
    }
    return {a, b, result_k * half, err};
}

}  // namespace

void QuadConfig::validate() const {
    if (!(abs_tol > 0.0)) throw std::invalid_argument("QuadConfig: abs_tol must be > 0");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadConfig: rel_tol must be > 0");
    if (max_subdivisions < 1) throw std::invalid_argument("QuadConfig: max_subdivisions must be >= 1");
}

QuadResult integrate(const Integrand& f, double a, double b, const QuadConfig& cfg) {
    cfg.validate();
    if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
    if (a == b) return {0.0, 0.0, 0, true};

    auto by_error = [](const Segment& l, const Segment& r) { return l.error < r.error; };
    std::vector<Segment> heap{gk15(f, a, b)};
    double total = heap.front().value;
    double total_err = heap.front().error;

    auto done = [&] { return total_err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)); };

    while (!done() && static_cast<int>(heap.size()) < cfg.max_subdivisions) {
        std::pop_heap(heap.begin(), heap.end(), by_error);
        const Segment worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval cannot be split further in floating point
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end(), by_error);
            break;
        }
        const Segment left = gk15(f, worst.a, mid);
        const Segment right = gk15(f, mid, worst.b);
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_error);

        // Resum instead of updating incrementally so cancellation does not drift.
        total = 0.0;
        total_err = 0.0;
        for (const auto& s : heap) {
            total += s.value;
            total_err += s.error;
        }
    }

    return {total, total_err, static_cast<int>(heap.size()), done()};
}

QuadResult integrate_semi_infinite(const Integrand& f, double a, const QuadConfig& cfg) {
    auto mapped = [&f, a](double u) {
        const double w = 1.0 - u;
        const double y = a + u / w;
        const double fy = f(y);
        if (fy == 0.0) return 0.0;
        return fy / (w * w);
    };
    return integrate(mapped, 0.0, 1.0, cfg);
}

QuadResult& operator+=(QuadResult& lhs, const QuadResult& rhs) {
    lhs.value += rhs.value;
    lhs.error_estimate += rhs.error_estimate;
    lhs.subdivisions_used += rhs.subdivisions_used;
    lhs.converged = lhs.converged && rhs.converged;
    return lhs;
}

}  // namespace robbins::quadrature
