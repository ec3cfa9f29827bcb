#pragma once

#include <cstdint>

#include "irtmpt/params.hpp"
#include "irtmpt/psi_cell.hpp"
#include "irtmpt/rng.hpp"

namespace irtmpt::testing {

inline PsiCell random_cell(DrawSequence& draws, double lo = 0.01, double hi = 0.99) {
  PsiCell c;
  for (double& v : c.psi) v = draws.uniform(lo, hi);
  return c;
}

// Generic parameters: every theta/delta column non-degenerate.
inline IrtParams random_params(const ModelDims& dims, std::uint64_t seed, double scale = 1.0) {
  DrawSequence d(CounterRng(seed, 0x7e57));
  IrtParams p = IrtParams::zeros(dims);
  for (int t = 0; t < dims.T; ++t)
    for (int c = 0; c < 5; ++c) p.theta(t, c) = d.uniform(-scale, scale);
  for (int k = 0; k < dims.K; ++k)
    for (int c = 0; c < 5; ++c) p.delta(k, c) = d.uniform(-scale, scale);
  for (int c = 0; c < 5; ++c) p.beta(c) = d.uniform(-scale, scale);
  for (int t = 0; t < dims.T; ++t) p.psi2(t) = d.uniform(0.1, 0.9);
  for (int k = 0; k < dims.K; ++k) p.psi7(k) = d.uniform(0.1, 0.9);
  p.psi8 = d.uniform(0.1, 0.9);
  return p;
}

}  // namespace irtmpt::testing
