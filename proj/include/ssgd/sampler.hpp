#pragma once

#include "ssgd/common.hpp"
#include "ssgd/rng.hpp"

namespace ssgd {

/// Draws i.i.d. samples x ~ D for a stochastic objective E[φ(w, x)].
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual int dim() const = 0;
  virtual Vector draw(Rng& rng) const = 0;

  /// k samples as the columns of a dim() x k matrix, drawn in column order.
  Matrix draw_batch(Rng& rng, int k) const;
};

}  // namespace ssgd
