#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace coxsat {

/** Tolerances and recursion budget for the adaptive integrator. */
struct QuadratureSpec {
    double abs_tol = 1e-8;
    double rel_tol = 1e-6;
    int max_depth = 30;
};

/** Thrown when the adaptive integrator cannot meet its tolerance. */
class QuadratureError : public std::runtime_error {
  public:
    QuadratureError(double estimate, double error_bound)
        : std::runtime_error("integrate: tolerance not reached, estimate " +
                             std::to_string(estimate) + " with error bound " +
                             std::to_string(error_bound)),
          estimate(estimate),
          error_bound(error_bound) {}

    double estimate;
    double error_bound;
};

namespace detail {

// 15-point Kronrod rule with embedded 7-point Gauss rule on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

/** One Gauss-Kronrod panel: returns {kronrod value, error estimate}. */
template <typename F>
inline void gk15_panel(const F& f, double a, double b, double& value,
                       double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kKronrodNodes[i]);
        fv[14 - i] = f(c + h * kKronrodNodes[i]);
    }
    fv[7] = f(c);
    double kron = kKronrodWeights[7] * fv[7];
    for (int i = 0; i < 7; ++i)
        kron += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
    double gauss = kGaussWeights[3] * fv[7];
    for (int i = 0; i < 3; ++i)
        gauss += kGaussWeights[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    value = kron * h;
    error = std::abs((kron - gauss) * h);
}

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

}  // namespace detail

/**
 * Globally adaptive Gauss-Kronrod integration of f over [a, b]: the segment
 * with the largest error estimate is bisected until the summed error meets
 * max(abs_tol, rel_tol * |integral|). Global acceptance keeps narrow features
 * (boundary layers, kinks) from demanding precision the total does not need.
 *
 * Integrable endpoint singularities must be removed by the caller through a
 * substitution; the engine assumes f is finite on the closed interval.
 * Throws QuadratureError carrying the achieved estimate when the tolerance
 * cannot be met within the subdivision budget (64 * max_depth segments).
 */
template <typename F>
inline double integrate(const F& f, double a, double b,
                        const QuadratureSpec& spec = {}) {
    if (!(a <= b)) throw std::domain_error("integrate: requires a <= b");
    if (a == b) return 0.0;
    std::priority_queue<detail::Segment> queue;
    detail::Segment first{a, b, 0.0, 0.0};
    detail::gk15_panel(f, a, b, first.value, first.error);
    queue.push(first);
    double total_value = first.value;
    double total_error = first.error;
    const std::size_t budget =
        64 * static_cast<std::size_t>(std::max(spec.max_depth, 1));
    while (total_error > std::max(spec.abs_tol,
                                  spec.rel_tol * std::abs(total_value))) {
        const detail::Segment worst = queue.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (queue.size() >= budget || mid <= worst.a || mid >= worst.b)
            throw QuadratureError(total_value, total_error);
        queue.pop();
        detail::Segment left{worst.a, mid, 0.0, 0.0};
        detail::Segment right{mid, worst.b, 0.0, 0.0};
        detail::gk15_panel(f, left.a, left.b, left.value, left.error);
        detail::gk15_panel(f, right.a, right.b, right.value, right.error);
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
    }
    return total_value;
}

/**
 * Gauss-Legendre nodes and weights on [-1, 1], computed once by Newton
 * iteration on the Legendre recurrence and cached per order.
 */
class GaussLegendre {
  public:
    explicit GaussLegendre(int n) : nodes_(n), weights_(n) {
        const int half = (n + 1) / 2;
        for (int i = 0; i < half; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 =
                        ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes_[i] = -x;
            nodes_[n - 1 - i] = x;
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights_[i] = w;
            weights_[n - 1 - i] = w;
        }
    }

    /** Fixed-order quadrature of f over [a, b]. */
    template <typename F>
    double apply(const F& f, double a, double b) const {
        const double c = 0.5 * (a + b);
        const double h = 0.5 * (b - a);
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            sum += weights_[i] * f(c + h * nodes_[i]);
        return sum * h;
    }

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }

  private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/** Shared fixed-order rules for the smooth inner kernels. */
inline const GaussLegendre& gauss_legendre_16() {
    static const GaussLegendre rule(16);
    return rule;
}

inline const GaussLegendre& gauss_legendre_64() {
    static const GaussLegendre rule(64);
    return rule;
}

}  // namespace coxsat
