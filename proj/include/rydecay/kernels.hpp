#pragma once

namespace rydecay {

/// Free-space dipole emission kernels between two atoms at dimensionless
/// separation b = 2 pi |r| / lambda, with cos2 = (d_hat . r_hat)^2.
struct KernelInputs {
    double b = 1.0;
    double cos2 = 0.0;
    double gamma_xi = 1.0;

    double alpha() const { return 1.0 - cos2; }
    double beta() const { return 1.0 - 3.0 * cos2; }
    void validate() const;
};

/// (3 gamma_xi / 2) [alpha sin b / b + beta (cos b / b^2 - sin b / b^3)]
double gamma_kernel(const KernelInputs& in);

/// -(3 gamma_xi / 4) [alpha cos b / b - beta (sin b / b^2 + cos b / b^3)]
double v_kernel(const KernelInputs& in);

/// gamma ((omega_a + xi V) / omega_a)^3: the decay rate of the channel whose
/// photon carries the interaction-shifted frequency.
double gamma_xi_rate(double gamma, double omega_a, double V, int xi);

}  // namespace rydecay
