#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rex/rng.hpp"
#include "rex/tensor.hpp"

namespace rex {

// A named trainable tensor. The grad buffer always exists (same shape,
// zeroed); grad_ready flips when a backward pass has written into it.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool grad_ready = false;

  explicit Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(v), grad(v.rows(), v.cols(), 0.0) {}
};

// Insertion-ordered parameter collection owned by one model/run.
class ParameterStore {
 public:
  Parameter& create(const std::string& name, Tensor init);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t size() const { return params_.size(); }

  void zero_grads();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

// Handle to a node on a Tape.
using Var = std::size_t;

// Append-only reverse-mode autodiff tape. Forward ops record nodes; backward
// walks them in reverse creation order, accumulating gradients additively into
// every consumer, and finally into the leaf Parameters.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves.
  Var constant(Tensor t);               // does not receive gradient
  Var input(Tensor t);                  // non-parameter leaf that wants grad
  Var param(Parameter& p);              // grad flows into p.grad on backward

  // Primitives. Shapes are validated; mismatches throw with both shapes.
  Var add(Var a, Var b);                // same shape, or (n x d) + (1 x d)
  Var mul(Var a, Var b);                // elementwise, same shape
  Var matmul(Var a, Var b);
  Var concat_rows(const std::vector<Var>& xs);   // stack along axis 0
  Var concat_cols(const std::vector<Var>& xs);   // stack along axis 1
  Var tanh(Var x);
  Var sigmoid(Var x);
  Var relu(Var x);
  Var softmax_rows(Var x);
  // Stable -log softmax(logits)[target]; logits is 1 x C.
  Var cross_entropy(Var logits, std::size_t target);
  Var row_select(Var m, std::vector<std::size_t> rows);
  // Same-length 1-D convolution. x is n x d_in, w is (window*d_in) x filters;
  // output position i covers input rows [i-left, i+right] with
  // left=(window-1)/2, zero padding outside (even windows pad the extra on
  // the right).
  Var conv1d(Var x, Var w, std::size_t window);
  // Elementwise max over the given rows (0-based) of m -> 1 x d. Gradient
  // routes 1 to the lowest-index maximizer per column. Empty set -> zeros.
  Var masked_max(Var m, std::vector<std::size_t> rows);
  Var scale(Var x, double k);
  // Inverted dropout: training zeroes elements w.p. rate and scales survivors
  // by 1/(1-rate); inference is the identity.
  Var dropout(Var x, double rate, bool training, Rng& rng);
  // Bernoulli mask on a 2-D weight matrix, one mask per call (one forward
  // pass); identity at inference.
  Var dropconnect(Var weight, double rate, bool training, Rng& rng);

  const Tensor& value(Var v) const { return nodes_[v].value; }
  const Tensor& grad(Var v) const;

  // Populates d(loss)/d(leaf) for every grad-requiring node and accumulates
  // into the Parameters seen via param(). Calling twice on one tape throws.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // lazily sized at backward
    bool needs_grad = false;
    Parameter* parameter = nullptr;
    std::function<void(Tape&, std::size_t)> back;  // nullptr for leaves
  };

  Var push(Tensor value, bool needs_grad,
           std::function<void(Tape&, std::size_t)> back);
  Tensor& grad_buf(Var v);
  bool needs(Var v) const { return nodes_[v].needs_grad; }

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace rex
