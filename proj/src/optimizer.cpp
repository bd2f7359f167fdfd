#include "rex/optimizer.hpp"

#include <stdexcept>

namespace rex {

SgdNesterov::SgdNesterov(double learning_rate, double momentum)
    : lr_(learning_rate), momentum_(momentum) {
  if (learning_rate <= 0.0)
    throw std::invalid_argument("SgdNesterov: learning rate must be > 0");
  if (momentum < 0.0 || momentum >= 1.0)
    throw std::invalid_argument("SgdNesterov: momentum must be in [0,1)");
}

void SgdNesterov::step(ParameterStore& params) {
  for (Parameter* p : params.all()) {
    if (!p->grad_ready)
      throw std::logic_error("SgdNesterov: parameter '" + p->name +
                             "' has no gradient; subgraph detached from the "
                             "loss?");
    auto [it, inserted] = velocity_.try_emplace(
        p->name, Tensor(p->value.rows(), p->value.cols(), 0.0));
    Tensor& v = it->second;
    for (std::size_t i = 0; i < p->value.numel(); ++i) {
      double g = p->grad[i];
      v[i] = momentum_ * v[i] - lr_ * g;
      p->value[i] += momentum_ * v[i] - lr_ * g;
    }
  }
  params.zero_grads();
}

}  // namespace rex
