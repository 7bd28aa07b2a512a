// Mixes two thermal beams, counts one photon in mode b and prints the
// heralded photon statistics of mode a from both routes.

#include <cstdio>

#include "interfere/experiments.hpp"

int main() {
  using namespace interfere;
  const auto c = conditional_prep({0.5, 2.0}, BeamSplitterSpec::balanced(), 1, 30);

  std::printf("herald probability  %.6f (Fock) %.6f (P-function)\n", c.fock_probability,
              c.closed_form->probability);
  std::printf("mean photon number  %.6f (Fock) %.6f (P-function)\n", c.fock_mean_photon,
              c.closed_form->mean_photon);
  std::printf("quadrature excess kurtosis %.6f\n\n", c.fock_excess_kurtosis);
  std::printf(" n   p_n (Fock)   p_n (P-function)\n");
  for (int n = 0; n <= 8; ++n) {
    std::printf("%2d   %.8f   %.8f\n", n, c.fock_populations[std::size_t(n)], c.closed_form->state(n, n).real());
  }
  std::printf("\nlargest population difference %.2e\n", c.route_agreement);
}
