#pragma once

#include <map>
#include <string>

#include "rex/tape.hpp"
#include "rex/tensor.hpp"

namespace rex {

// SGD with Nesterov momentum, folded lookahead form:
//   v <- mu*v - eta*g
//   p <- p + mu*v - eta*g
// With mu = 0 this is plain SGD. Velocity buffers are created lazily,
// zero-initialized, one per parameter.
class SgdNesterov {
 public:
  SgdNesterov(double learning_rate, double momentum);

  // Applies one update to every parameter in the store, then clears grads.
  // Throws if any parameter has no gradient from the last backward pass
  // (a detached subgraph).
  void step(ParameterStore& params);

  double learning_rate() const { return lr_; }
  double momentum() const { return momentum_; }

 private:
  double lr_;
  double momentum_;
  std::map<std::string, Tensor> velocity_;
};

}  // namespace rex
