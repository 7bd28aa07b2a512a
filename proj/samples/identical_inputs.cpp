// Two equal thermal beams against two unequal ones: mutual information of
// the outputs from the Fock simulation next to the covariance-matrix value.

#include <cstdio>
#include <numbers>

#include "interfere/fock.hpp"
#include "interfere/gaussian.hpp"
#include "interfere/state.hpp"

int main() {
  using namespace interfere;
  const int cutoff = 30;
  const auto bs = BeamSplitterSpec::balanced();

  std::printf("%-16s %-12s %14s %14s\n", "mode a", "mode b", "MI (Fock)", "MI (Gaussian)");
  for (auto [a, b] : {std::pair{"thermal:1", "thermal:1"}, {"thermal:0.5", "thermal:1.5"},
                      {"squeezed:0.3,0", "vacuum"}, {"coherent:1", "vacuum"}}) {
    const auto in = tensor_product(make_state(a, cutoff).state, make_state(b, cutoff).state);
    const double mi = mutual_information(apply_beamsplitter(in, bs));
    const auto ga = gaussian_params(parse_descriptor(a));
    const auto gb = gaussian_params(parse_descriptor(b));
    const auto cov = bs_transform_covariance(product_state(gaussian_to_moments(*ga), gaussian_to_moments(*gb)), bs);
    std::printf("%-16s %-12s %14.3e %14.3e\n", a, b, mi, gaussian_mutual_information(cov));
  }
}
