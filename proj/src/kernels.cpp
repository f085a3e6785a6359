#include "rydecay/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace rydecay {

void KernelInputs::validate() const {
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("kernel separation b must be positive");
    if (!(cos2 >= 0.0 && cos2 <= 1.0)) throw std::invalid_argument("cos2 must lie in [0, 1]");
}

namespace {
// Below this the near-field difference cos b / b^2 - sin b / b^3 loses digits.
constexpr double kSeriesBelow = 1e-2;
}

double gamma_kernel(const KernelInputs& in) {
    in.validate();
    const double b = in.b, a = in.alpha(), be = in.beta();
    if (b < kSeriesBelow) {
        const double b2 = b * b;
        const double sinc = 1.0 - b2 / 6.0 * (1.0 - b2 / 20.0 * (1.0 - b2 / 42.0));
        const double near = -1.0 / 3.0 + b2 * (1.0 / 30.0 - b2 * (1.0 / 840.0 - b2 / 45360.0));
        return 1.5 * in.gamma_xi * (a * sinc + be * near);
    }
    const double s = std::sin(b), c = std::cos(b);
    return 1.5 * in.gamma_xi * (a * s / b + be * (c / (b * b) - s / (b * b * b)));
}

double v_kernel(const KernelInputs& in) {
    in.validate();
    const double b = in.b, s = std::sin(b), c = std::cos(b);
    return -0.75 * in.gamma_xi * (in.alpha() * c / b - in.beta() * (s / (b * b) + c / (b * b * b)));
}

double gamma_xi_rate(double gamma, double omega_a, double V, int xi) {
    const double shifted = omega_a + xi * V;
    if (!(omega_a > 0.0) || !(shifted > 0.0))
        throw std::invalid_argument("emission frequency omega_a + xi V must be positive");
    const double r = shifted / omega_a;
    return gamma * r * r * r;
}

}  // namespace rydecay
