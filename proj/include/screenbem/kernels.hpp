#pragma once

#include <complex>

#include "screenbem/geometry.hpp"

namespace screenbem {

using Complex = std::complex<double>;

/// Helmholtz wave number. k = 0 is the Laplace case; negative values arise
/// only through negation when assembling the adjoint operator.
struct WaveNumber {
    double value = 0;

    explicit WaveNumber(double k);
    WaveNumber negated() const { return WaveNumber(-value); }
};

/// Splitting of the single-layer kernel into the static 1/(4 pi r) part and
/// the smooth remainder (e^{ikr} - 1)/(4 pi r). The remainder extends
/// continuously to r = 0 with value ik/(4 pi); the static part is flagged
/// infinite there.
struct KernelSplit {
    double static_part = 0;
    Complex remainder = 0;
};

/// e^{ik|x-y|} / (4 pi |x-y|). Throws std::domain_error for x == y.
Complex single_layer_kernel(WaveNumber k, const Vec3& x, const Vec3& y);

KernelSplit kernel_split(WaveNumber k, const Vec3& x, const Vec3& y);

/// Smooth remainder as a function of the distance r >= 0.
Complex kernel_remainder(WaveNumber k, double r);

/// Normal derivative of the single-layer kernel in the second argument,
/// (1/4pi) d/dn_y [e^{ikr}/r] = e^{ikr} (1 - ikr) n_y.(x-y) / (4 pi r^3).
/// Throws std::domain_error for x == y.
Complex double_layer_kernel(WaveNumber k, const Vec3& x, const Vec3& y, const Vec3& n_y);

} // namespace screenbem
