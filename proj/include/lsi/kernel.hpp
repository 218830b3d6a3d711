#pragma once

#include <cmath>
#include <stdexcept>

namespace lsi {

/// Small-world kernel kappa(x, y) = c0 / (|x - y|^delta + c1) on [0,1]^2.
///
/// Values lie in (0, c0/c1]. With c0 == c1 the kernel is normalized so that
/// kappa(x, x) == 1, which is required by the feature-space identities below.
struct Kernel {
    double c0 = 1.0;
    double c1 = 1.0;
    double delta = 2.0;

    Kernel() = default;
    Kernel(double c0_, double c1_, double delta_) : c0(c0_), c1(c1_), delta(delta_) {
        if (c0 <= 0.0 || c1 <= 0.0) throw std::invalid_argument("Kernel: c0 and c1 must be positive");
        if (delta <= 1.0) throw std::invalid_argument("Kernel: delta must exceed 1");
    }

    double operator()(double x, double y) const {
        const double h = std::abs(x - y);
        const double hd = delta == 2.0 ? h * h : std::pow(h, delta);
        return c0 / (hd + c1);
    }

    /// kappa(x, x) = c0/c1; also the maximum value the kernel attains.
    double max_value() const { return c0 / c1; }

    bool normalized() const { return c0 == c1; }

    /// Inverse map: the latent distance at which the kernel equals k.
    /// Sensitive to small k (the error blows up near the flat tail), so callers
    /// should prefer it only where k is large.
    double invert(double k) const {
        if (!(k > 0.0) || k > max_value() * (1.0 + 1e-12))
            throw std::invalid_argument("Kernel::invert: value outside (0, c0/c1]");
        double arg = c0 / k - c1;
        if (arg < 0.0) arg = 0.0;  // k == c0/c1 up to rounding
        return std::pow(arg, 1.0 / delta);
    }
};

/// ||Phi(x) - Phi(y)||^2 = kappa(x,x) + kappa(y,y) - 2 kappa(x,y) = 2 - 2 kappa(x,y).
/// Valid only for normalized kernels (c0 == c1), where kappa(x,x) == 1.
inline double feature_distance_sq(const Kernel& k, double x, double y) {
    if (!k.normalized())
        throw std::invalid_argument("feature_distance_sq: requires c0 == c1 (kappa(x,x) must be 1)");
    return 2.0 - 2.0 * k(x, y);
}

}  // namespace lsi
