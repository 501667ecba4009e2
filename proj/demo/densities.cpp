// Prints the two discrepancy densities, their balance functions at a few
// fractions, and the balance point of each parameter choice.

#include <cstdio>

#include "sharplad/balance.hpp"

int main() {
    using namespace sharplad;
    const AmpDistParams amp(0.0, 0.4);
    const IntDistParams in(0.8);

    std::printf("    z   g(z; rho=0, alpha=0.4)   f(z; rho=0.8)\n");
    for (double z : {0.05, 0.25, 0.5, 1.0, 2.0, 3.0})
        std::printf("%5.2f   %22.10f   %13.10f\n", z, pdf_abs_diff(z, amp), pdf_abs_prod(z, in));

    std::printf("\n    s   M(0, 0.4, s)   J(0.8, s)\n");
    for (double s : {0.0, 0.1, 0.2, 0.3})
        std::printf("%5.2f   %12.8f   %9.6f\n", s, balance_amplitude(amp, s).value, balance_intensity(in, s).value);

    std::printf("\nbalance points: amplitude %.6f, intensity %.6f\n", balance_point_amplitude(amp),
                balance_point_intensity(in));
}
