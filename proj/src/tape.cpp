#include "rex/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rex {

Parameter& ParameterStore::create(const std::string& name, Tensor init) {
  if (index_.count(name))
    throw std::invalid_argument("ParameterStore: duplicate parameter '" +
                                name + "'");
  index_[name] = params_.size();
  params_.push_back(std::make_unique<Parameter>(name, std::move(init)));
  return *params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end())
    throw std::out_of_range("ParameterStore: unknown parameter '" + name +
                            "'");
  return *params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->get(name);
}

bool ParameterStore::contains(const std::string& name) const {
  return index_.count(name) != 0;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

void ParameterStore::zero_grads() {
  for (auto& p : params_) {
    p->grad.fill(0.0);
    p->grad_ready = false;
  }
}

Var Tape::push(Tensor value, bool needs_grad,
               std::function<void(Tape&, std::size_t)> back) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

Tensor& Tape::grad_buf(Var v) {
  Node& n = nodes_[v];
  if (n.grad.numel() == 0) n.grad = Tensor(n.value.rows(), n.value.cols(), 0.0);
  return n.grad;
}

const Tensor& Tape::grad(Var v) const {
  if (nodes_[v].grad.numel() == 0)
    throw std::logic_error("Tape::grad: no gradient recorded for node " +
                           std::to_string(v));
  return nodes_[v].grad;
}

Var Tape::constant(Tensor t) { return push(std::move(t), false, nullptr); }

Var Tape::input(Tensor t) { return push(std::move(t), true, nullptr); }

Var Tape::param(Parameter& p) {
  Var v = push(p.value, true, nullptr);
  nodes_[v].parameter = &p;
  return v;
}

Var Tape::add(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  bool broadcast = y.rows() == 1 && x.cols() == y.cols() && x.rows() != 1;
  if (!broadcast && !x.same_shape(y))
    throw std::invalid_argument("add: shape mismatch " + x.shape_str() +
                                " vs " + y.shape_str());
  Tensor out = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      out.at(r, c) += broadcast ? y.at(0, c) : y.at(r, c);
  return push(std::move(out), needs(a) || needs(b),
              [a, b, broadcast](Tape& t, std::size_t self) {
                const Tensor& g = t.grad_buf(self);
                if (t.needs(a)) {
                  Tensor& ga = t.grad_buf(a);
                  for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
                }
                if (t.needs(b)) {
                  Tensor& gb = t.grad_buf(b);
                  if (broadcast) {
                    for (std::size_t r = 0; r < g.rows(); ++r)
                      for (std::size_t c = 0; c < g.cols(); ++c)
                        gb.at(0, c) += g.at(r, c);
                  } else {
                    for (std::size_t i = 0; i < g.numel(); ++i) gb[i] += g[i];
                  }
                }
              });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  check_same_shape(x, y, "mul");
  Tensor out = x;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= y[i];
  return push(std::move(out), needs(a) || needs(b),
              [a, b](Tape& t, std::size_t self) {
                const Tensor& g = t.grad_buf(self);
                const Tensor& x = t.value(a);
                const Tensor& y = t.value(b);
                if (t.needs(a)) {
                  Tensor& ga = t.grad_buf(a);
                  for (std::size_t i = 0; i < g.numel(); ++i)
                    ga[i] += g[i] * y[i];
                }
                if (t.needs(b)) {
                  Tensor& gb = t.grad_buf(b);
                  for (std::size_t i = 0; i < g.numel(); ++i)
                    gb[i] += g[i] * x[i];
                }
              });
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  if (x.cols() != y.rows())
    throw std::invalid_argument("matmul: shape mismatch " + x.shape_str() +
                                " vs " + y.shape_str());
  Tensor out(x.rows(), y.cols(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t k = 0; k < x.cols(); ++k) {
      double xv = x.at(r, k);
      if (xv == 0.0) continue;
      for (std::size_t c = 0; c < y.cols(); ++c)
        out.at(r, c) += xv * y.at(k, c);
    }
  return push(std::move(out), needs(a) || needs(b),
              [a, b](Tape& t, std::size_t self) {
                const Tensor& g = t.grad_buf(self);
                const Tensor& x = t.value(a);
                const Tensor& y = t.value(b);
                if (t.needs(a)) {  // dL/dx = g * y^T
                  Tensor& ga = t.grad_buf(a);
                  for (std::size_t r = 0; r < x.rows(); ++r)
                    for (std::size_t k = 0; k < x.cols(); ++k) {
                      double s = 0.0;
                      for (std::size_t c = 0; c < y.cols(); ++c)
                        s += g.at(r, c) * y.at(k, c);
                      ga.at(r, k) += s;
                    }
                }
                if (t.needs(b)) {  // dL/dy = x^T * g
                  Tensor& gb = t.grad_buf(b);
                  for (std::size_t k = 0; k < y.rows(); ++k)
                    for (std::size_t c = 0; c < y.cols(); ++c) {
                      double s = 0.0;
                      for (std::size_t r = 0; r < x.rows(); ++r)
                        s += x.at(r, k) * g.at(r, c);
                      gb.at(k, c) += s;
                    }
                }
              });
}

Var Tape::concat_rows(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_rows: no operands");
  std::size_t cols = value(xs[0]).cols();
  std::size_t rows = 0;
  bool ng = false;
  for (Var v : xs) {
    if (value(v).cols() != cols)
      throw std::invalid_argument("concat_rows: shape mismatch " +
                                  value(xs[0]).shape_str() + " vs " +
                                  value(v).shape_str());
    rows += value(v).rows();
    ng = ng || needs(v);
  }
  Tensor out(rows, cols, 0.0);
  std::size_t r0 = 0;
  for (Var v : xs) {
    const Tensor& x = value(v);
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < cols; ++c) out.at(r0 + r, c) = x.at(r, c);
    r0 += x.rows();
  }
  return push(std::move(out), ng, [xs](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buf(self);
    std::size_t r0 = 0;
    for (Var v : xs) {
      const Tensor& x = t.value(v);
      if (t.needs(v)) {
        Tensor& gv = t.grad_buf(v);
        for (std::size_t r = 0; r < x.rows(); ++r)
          for (std::size_t c = 0; c < x.cols(); ++c)
            gv.at(r, c) += g.at(r0 + r, c);
      }
      r0 += x.rows();
    }
  });
}

Var Tape::concat_cols(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_cols: no operands");
  std::size_t rows = value(xs[0]).rows();
  std::size_t cols = 0;
  bool ng = false;
  for (Var v : xs) {
    if (value(v).rows() != rows)
      throw std::invalid_argument("concat_cols: shape mismatch " +
                                  value(xs[0]).shape_str() + " vs " +
                                  value(v).shape_str());
    cols += value(v).cols();
    ng = ng || needs(v);
  }
  Tensor out(rows, cols, 0.0);
  std::size_t c0 = 0;
  for (Var v : xs) {
    const Tensor& x = value(v);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c0 + c) = x.at(r, c);
    c0 += x.cols();
  }
  return push(std::move(out), ng, [xs](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_buf(self);
    std::size_t c0 = 0;
    for (Var v : xs) {
      const Tensor& x = t.value(v);
      if (t.needs(v)) {
        Tensor& gv = t.grad_buf(v);
        for (std::size_t r = 0; r < x.rows(); ++r)
          for (std::size_t c = 0; c < x.cols(); ++c)
            gv.at(r, c) += g.at(r, c0 + c);
      }
      c0 += x.cols();
    }
  });
}

Var Tape::tanh(Var x) {
  Tensor out = value(x);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
  return push(std::move(out), needs(x), [x](Tape& t, std::size_t self) {
    if (!t.needs(x)) return;
    const Tensor& g = t.grad_buf(self);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < g.numel(); ++i)
      gx[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var Tape::sigmoid(Var x) {
  Tensor out = value(x);
  for (std::size_t i = 0; i < out.numel(); ++i)
    out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  return push(std::move(out), needs(x), [x](Tape& t, std::size_t self) {
    if (!t.needs(x)) return;
    const Tensor& g = t.grad_buf(self);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < g.numel(); ++i)
      gx[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var Tape::relu(Var x) {
  Tensor out = value(x);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::max(0.0, out[i]);
  return push(std::move(out), needs(x), [x](Tape& t, std::size_t self) {
    if (!t.needs(x)) return;
    const Tensor& g = t.grad_buf(self);
    const Tensor& v = t.value(x);
    Tensor& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < g.numel(); ++i)
      if (v[i] > 0.0) gx[i] += g[i];
  });
}

Var Tape::softmax_rows(Var x) {
  Tensor out = value(x);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double m = out.at(r, 0);
    for (std::size_t c = 1; c < out.cols(); ++c) m = std::max(m, out.at(r, c));
    double z = 0.0;
    for (std::size_t c = 0; c < out.cols(); ++c) {
      out.at(r, c) = std::exp(out.at(r, c) - m);
      z += out.at(r, c);
    }
    for (std::size_t c = 0; c < out.cols(); ++c) out.at(r, c) /= z;
  }
  return push(std::move(out), needs(x), [x](Tape& t, std::size_t self) {
    if (!t.needs(x)) return;
    const Tensor& g = t.grad_buf(self);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad_buf(x);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c)
        dot += g.at(r, c) * y.at(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c)
        gx.at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
    }
  });
}

Var Tape::cross_entropy(Var logits, std::size_t target) {
  const Tensor& z = value(logits);
  if (z.rows() != 1)
    throw std::invalid_argument("cross_entropy: logits must be 1xC, got " +
                                z.shape_str());
  if (target >= z.cols())
    throw std::invalid_argument("cross_entropy: target " +
                                std::to_string(target) + " out of range for " +
                                z.shape_str());
  double m = z.at(0, 0);
  for (std::size_t c = 1; c < z.cols(); ++c) m = std::max(m, z.at(0, c));
  double lse = 0.0;
  for (std::size_t c = 0; c < z.cols(); ++c) lse += std::exp(z.at(0, c) - m);
  lse = m + std::log(lse);
  Tensor out = Tensor::scalar(lse - z.at(0, target));
  return push(std::move(out), needs(logits),
              [logits, target](Tape& t, std::size_t self) {
                if (!t.needs(logits)) return;
                double g = t.grad_buf(self)[0];
                const Tensor& z = t.value(logits);
                Tensor& gz = t.grad_buf(logits);
                double m = z.at(0, 0);
                for (std::size_t c = 1; c < z.cols(); ++c)
                  m = std::max(m, z.at(0, c));
                double sum = 0.0;
                for (std::size_t c = 0; c < z.cols(); ++c)
                  sum += std::exp(z.at(0, c) - m);
                for (std::size_t c = 0; c < z.cols(); ++c) {
                  double p = std::exp(z.at(0, c) - m) / sum;
                  gz.at(0, c) += g * (p - (c == target ? 1.0 : 0.0));
                }
              });
}

Var Tape::row_select(Var m, std::vector<std::size_t> rows) {
  const Tensor& x = value(m);
  for (std::size_t r : rows)
    if (r >= x.rows())
      throw std::invalid_argument("row_select: index " + std::to_string(r) +
                                  " out of range for " + x.shape_str());
  Tensor out(rows.size(), x.cols(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < x.cols(); ++c)
      out.at(i, c) = x.at(rows[i], c);
  return push(std::move(out), needs(m),
              [m, rows = std::move(rows)](Tape& t, std::size_t self) {
                if (!t.needs(m)) return;
                const Tensor& g = t.grad_buf(self);
                Tensor& gm = t.grad_buf(m);
                for (std::size_t i = 0; i < rows.size(); ++i)
                  for (std::size_t c = 0; c < g.cols(); ++c)
                    gm.at(rows[i], c) += g.at(i, c);
              });
}

Var Tape::conv1d(Var x, Var w, std::size_t window) {
  const Tensor& in = value(x);
  const Tensor& wt = value(w);
  if (window == 0) throw std::invalid_argument("conv1d: window must be >= 1");
  if (wt.rows() != window * in.cols())
    throw std::invalid_argument("conv1d: weight " + wt.shape_str() +
                                " does not match window*d_in = " +
                                std::to_string(window * in.cols()));
  std::size_t n = in.rows(), din = in.cols(), f = wt.cols();
  std::size_t left = (window - 1) / 2;
  Tensor out(n, f, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < window; ++j) {
      long src = static_cast<long>(i + j) - static_cast<long>(left);
      if (src < 0 || src >= static_cast<long>(n)) continue;
      for (std::size_t c = 0; c < din; ++c) {
        double v = in.at(src, c);
        if (v == 0.0) continue;
        for (std::size_t k = 0; k < f; ++k)
          out.at(i, k) += v * wt.at(j * din + c, k);
      }
    }
  return push(std::move(out), needs(x) || needs(w),
              [x, w, window, left](Tape& t, std::size_t self) {
                const Tensor& g = t.grad_buf(self);
                const Tensor& in = t.value(x);
                const Tensor& wt = t.value(w);
                // allocate up front so zero gradients still reach the leaves
                if (t.needs(x)) t.grad_buf(x);
                if (t.needs(w)) t.grad_buf(w);
                std::size_t n = in.rows(), din = in.cols(), f = wt.cols();
                for (std::size_t i = 0; i < n; ++i)
                  for (std::size_t j = 0; j < window; ++j) {
                    long src = static_cast<long>(i + j) - static_cast<long>(left);
                    if (src < 0 || src >= static_cast<long>(n)) continue;
                    for (std::size_t c = 0; c < din; ++c) {
                      for (std::size_t k = 0; k < f; ++k) {
                        double gv = g.at(i, k);
                        if (gv == 0.0) continue;
                        if (t.needs(x))
                          t.grad_buf(x).at(src, c) += gv * wt.at(j * din + c, k);
                        if (t.needs(w))
                          t.grad_buf(w).at(j * din + c, k) += gv * in.at(src, c);
                      }
                    }
                  }
              });
}

Var Tape::masked_max(Var m, std::vector<std::size_t> rows) {
  const Tensor& x = value(m);
  for (std::size_t r : rows)
    if (r >= x.rows())
      throw std::invalid_argument("masked_max: index " + std::to_string(r) +
                                  " out of range for " + x.shape_str());
  Tensor out(1, x.cols(), 0.0);
  std::vector<std::size_t> argmax(x.cols(), 0);
  if (!rows.empty()) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      std::size_t best = rows[0];
      double bv = x.at(rows[0], c);
      for (std::size_t r : rows)
        if (x.at(r, c) > bv) {  // strict: ties keep the earliest in set order
          bv = x.at(r, c);
          best = r;
        }
      out.at(0, c) = bv;
      argmax[c] = best;
    }
  }
  bool empty = rows.empty();
  return push(std::move(out), needs(m),
              [m, argmax = std::move(argmax), empty](Tape& t,
                                                     std::size_t self) {
                if (!t.needs(m)) return;
                const Tensor& g = t.grad_buf(self);
                Tensor& gm = t.grad_buf(m);
                if (empty) return;
                for (std::size_t c = 0; c < g.cols(); ++c)
                  gm.at(argmax[c], c) += g.at(0, c);
              });
}

Var Tape::scale(Var x, double k) {
  Tensor out = value(x);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= k;
  return push(std::move(out), needs(x), [x, k](Tape& t, std::size_t self) {
    if (!t.needs(x)) return;
    const Tensor& g = t.grad_buf(self);
    Tensor& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += k * g[i];
  });
}

Var Tape::dropout(Var x, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("dropout: rate must be in [0,1), got " +
                                std::to_string(rate));
  if (!training || rate == 0.0) return x;
  const Tensor& in = value(x);
  double keep = 1.0 - rate;
  std::vector<double> mask(in.numel());
  for (double& mv : mask) mv = rng.bernoulli(rate) ? 0.0 : 1.0 / keep;
  Tensor out = in;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= mask[i];
  return push(std::move(out), needs(x),
              [x, mask = std::move(mask)](Tape& t, std::size_t self) {
                if (!t.needs(x)) return;
                const Tensor& g = t.grad_buf(self);
                Tensor& gx = t.grad_buf(x);
                for (std::size_t i = 0; i < g.numel(); ++i)
                  gx[i] += g[i] * mask[i];
              });
}

Var Tape::dropconnect(Var weight, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("dropconnect: rate must be in [0,1), got " +
                                std::to_string(rate));
  const Tensor& w = value(weight);
  if (w.rows() < 1 || w.cols() < 1)
    throw std::invalid_argument("dropconnect: expects a 2-D weight matrix");
  return dropout(weight, rate, training, rng);
}

void Tape::backward(Var loss) {
  if (backward_done_)
    throw std::logic_error(
        "Tape::backward: tape already consumed; build a fresh tape per "
        "forward pass");
  if (value(loss).numel() != 1)
    throw std::invalid_argument("Tape::backward: loss must be scalar, got " +
                                value(loss).shape_str());
  if (nodes_.empty()) throw std::logic_error("Tape::backward: empty tape");
  backward_done_ = true;
  grad_buf(loss)[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.numel() == 0) continue;
    if (n.back) n.back(*this, i);
    if (n.parameter) {
      Tensor& pg = n.parameter->grad;
      for (std::size_t k = 0; k < pg.numel(); ++k) pg[k] += n.grad[k];
      n.parameter->grad_ready = true;
    }
  }
}

}  // namespace rex
