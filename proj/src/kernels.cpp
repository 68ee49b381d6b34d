#include "screenbem/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace screenbem {

namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);
// below this |kr| the remainder is evaluated by its Taylor series to avoid
// cancellation in e^{ikr} - 1
constexpr double kSeriesThreshold = 1e-2;

} // namespace

WaveNumber::WaveNumber(double k) : value(k) {
    if (!std::isfinite(k))
        throw std::invalid_argument("wave number must be finite");
}

Complex single_layer_kernel(WaveNumber k, const Vec3& x, const Vec3& y) {
    const double r = distance(x, y);
    if (r <= 0.0)
        throw std::domain_error("single_layer_kernel: coincident points");
    return std::polar(kInv4Pi / r, k.value * r);
}

Complex kernel_remainder(WaveNumber k, double r) {
    const double kr = k.value * r;
    if (std::abs(kr) < kSeriesThreshold) {
        // (e^{z}-1)/(4 pi r) = (ik/4pi) * sum_{m>=0} z^m/(m+1)!,  z = ikr
        const Complex z(0.0, kr);
        Complex sum = 1.0;
        Complex term = 1.0;
        for (int m = 1; m <= 5; ++m) {
            term *= z / static_cast<double>(m + 1);
            sum += term;
        }
        return Complex(0.0, k.value * kInv4Pi) * sum;
    }
    return (std::polar(1.0, kr) - 1.0) * (kInv4Pi / r);
}

KernelSplit kernel_split(WaveNumber k, const Vec3& x, const Vec3& y) {
    const double r = distance(x, y);
    KernelSplit s;
    s.static_part = r > 0.0 ? kInv4Pi / r : std::numeric_limits<double>::infinity();
    s.remainder = kernel_remainder(k, r);
    return s;
}

Complex double_layer_kernel(WaveNumber k, const Vec3& x, const Vec3& y, const Vec3& n_y) {
    const Vec3 d = x - y;
    const double r = d.norm();
    if (r <= 0.0)
        throw std::domain_error("double_layer_kernel: coincident points");
    const double kr = k.value * r;
    const Complex phase = std::polar(1.0, kr);
    return phase * (Complex(1.0, -kr) * (kInv4Pi * dot(n_y, d) / (r * r * r)));
}

} // namespace screenbem
