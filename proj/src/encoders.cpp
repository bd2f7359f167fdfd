#include "rex/encoders.hpp"

#include <stdexcept>

namespace rex {

std::string to_string(EncoderKind k) {
  switch (k) {
    case EncoderKind::Cnn: return "CNN";
    case EncoderKind::BiLstm: return "BiLSTM";
    case EncoderKind::BiLstmCnn: return "BiLSTM-CNN";
    case EncoderKind::BiLstmGcn: return "BiLSTM-GCN";
  }
  throw std::logic_error("unreachable");
}

EncoderKind encoder_from_string(const std::string& s) {
  for (EncoderKind k : all_encoder_kinds())
    if (to_string(k) == s) return k;
  if (s == "BiLSTM-GCNN") return EncoderKind::BiLstmGcn;
  throw std::invalid_argument("unknown encoder '" + s +
                              "' (expected CNN, BiLSTM, BiLSTM-CNN or "
                              "BiLSTM-GCN)");
}

const std::vector<EncoderKind>& all_encoder_kinds() {
  static const std::vector<EncoderKind> all{
      EncoderKind::Cnn, EncoderKind::BiLstm, EncoderKind::BiLstmCnn,
      EncoderKind::BiLstmGcn};
  return all;
}

std::size_t EncoderConfig::output_dim() const {
  switch (kind) {
    case EncoderKind::Cnn:
    case EncoderKind::BiLstmCnn:
      return cnn_windows.size() * cnn_filters;
    case EncoderKind::BiLstm:
      return 2 * lstm_hidden;
    case EncoderKind::BiLstmGcn:
      return gcn_hidden;
  }
  throw std::logic_error("unreachable");
}

namespace {

const char* kGates = "ifgo";

Tensor uniform_init(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t(rows, cols, 0.0);
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-0.1, 0.1);
  return t;
}

std::string lstm_name(std::size_t layer, const char* dir, char gate,
                      const char* what) {
  return "lstm.l" + std::to_string(layer) + "." + dir + "." + what + gate;
}

void init_lstm_params(ParameterStore& params, const EncoderConfig& cfg,
                      std::size_t input_dim, Rng& rng) {
  std::size_t h = cfg.lstm_hidden;
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    std::size_t d_in = l == 0 ? input_dim : 2 * h;
    for (const char* dir : {"fw", "bw"}) {
      for (const char* g = kGates; *g; ++g) {
        params.create(lstm_name(l, dir, *g, "Wx"), uniform_init(d_in, h, rng));
        params.create(lstm_name(l, dir, *g, "Wh"), uniform_init(h, h, rng));
        params.create(lstm_name(l, dir, *g, "b"),
                      Tensor(1, h, *g == 'f' ? 1.0 : 0.0));
      }
    }
  }
}

void init_cnn_params(ParameterStore& params, const EncoderConfig& cfg,
                     std::size_t input_dim, Rng& rng) {
  for (std::size_t k : cfg.cnn_windows) {
    params.create("cnn.w" + std::to_string(k),
                  uniform_init(k * input_dim, cfg.cnn_filters, rng));
    params.create("cnn.b" + std::to_string(k), Tensor(1, cfg.cnn_filters, 0.0));
  }
}

void init_gcn_params(ParameterStore& params, const EncoderConfig& cfg,
                     std::size_t input_dim, Rng& rng) {
  for (std::size_t l = 0; l < cfg.gcn_layers; ++l) {
    std::size_t d_in = l == 0 ? input_dim : cfg.gcn_hidden;
    params.create("gcn.l" + std::to_string(l) + ".W",
                  uniform_init(d_in, cfg.gcn_hidden, rng));
    params.create("gcn.l" + std::to_string(l) + ".b",
                  Tensor(1, cfg.gcn_hidden, 0.0));
  }
}

Var run_cnn(Tape& tape, ParameterStore& params, const EncoderConfig& cfg,
            Var X) {
  std::vector<Var> parts;
  for (std::size_t k : cfg.cnn_windows) {
    Var w = tape.param(params.get("cnn.w" + std::to_string(k)));
    Var b = tape.param(params.get("cnn.b" + std::to_string(k)));
    parts.push_back(tape.tanh(tape.add(tape.conv1d(X, w, k), b)));
  }
  return tape.concat_cols(parts);
}

Var run_bilstm(Tape& tape, ParameterStore& params, const EncoderConfig& cfg,
               Var X, bool training, Rng& rng) {
  std::size_t h = cfg.lstm_hidden;
  Var layer_in = X;
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    std::size_t n = tape.value(layer_in).rows();
    std::vector<Var> fw(n), bw(n);
    for (const char* dir : {"fw", "bw"}) {
      Var Wx[4], Wh[4], b[4];
      for (int g = 0; g < 4; ++g) {
        Wx[g] = tape.param(params.get(lstm_name(l, dir, kGates[g], "Wx")));
        // One DropConnect mask per hidden matrix per forward pass.
        Wh[g] = tape.dropconnect(
            tape.param(params.get(lstm_name(l, dir, kGates[g], "Wh"))),
            cfg.dropconnect, training, rng);
        b[g] = tape.param(params.get(lstm_name(l, dir, kGates[g], "b")));
      }
      Var hstate = tape.constant(Tensor(1, h, 0.0));
      Var cstate = tape.constant(Tensor(1, h, 0.0));
      bool forward = dir[0] == 'f';
      for (std::size_t step = 0; step < n; ++step) {
        std::size_t t = forward ? step : n - 1 - step;
        Var x = tape.row_select(layer_in, {t});
        auto gate = [&](int g) {
          return tape.add(tape.add(tape.matmul(x, Wx[g]),
                                   tape.matmul(hstate, Wh[g])),
                          b[g]);
        };
        Var ig = tape.sigmoid(gate(0));
        Var fg = tape.sigmoid(gate(1));
        Var gg = tape.tanh(gate(2));
        Var og = tape.sigmoid(gate(3));
        cstate = tape.add(tape.mul(fg, cstate), tape.mul(ig, gg));
        hstate = tape.mul(og, tape.tanh(cstate));
        (forward ? fw : bw)[t] = hstate;
      }
    }
    std::vector<Var> rows(n);
    for (std::size_t t = 0; t < n; ++t)
      rows[t] = tape.concat_cols({fw[t], bw[t]});
    Var out = tape.concat_rows(rows);
    if (l + 1 < cfg.lstm_layers)
      out = tape.dropout(out, cfg.interlayer_dropout, training, rng);
    layer_in = out;
  }
  return layer_in;
}

Var run_gcn(Tape& tape, ParameterStore& params, const EncoderConfig& cfg,
            Var H, const DependencyTree& tree) {
  Adjacency adj = gcn_adjacency(tree);
  // Row-normalized adjacency D^-1 * (A + I), a constant of the example.
  Tensor norm = adj.matrix;
  for (std::size_t r = 0; r < norm.rows(); ++r)
    for (std::size_t c = 0; c < norm.cols(); ++c)
      norm.at(r, c) /= adj.degree[r];
  Var N = tape.constant(std::move(norm));
  for (std::size_t l = 0; l < cfg.gcn_layers; ++l) {
    Var W = tape.param(params.get("gcn.l" + std::to_string(l) + ".W"));
    Var b = tape.param(params.get("gcn.l" + std::to_string(l) + ".b"));
    H = tape.relu(tape.add(tape.matmul(tape.matmul(N, H), W), b));
  }
  return H;
}

}  // namespace

void init_encoder_params(ParameterStore& params, const EncoderConfig& cfg,
                         std::size_t input_dim, Rng& rng) {
  switch (cfg.kind) {
    case EncoderKind::Cnn:
      init_cnn_params(params, cfg, input_dim, rng);
      break;
    case EncoderKind::BiLstm:
      init_lstm_params(params, cfg, input_dim, rng);
      break;
    case EncoderKind::BiLstmCnn:
      init_lstm_params(params, cfg, input_dim, rng);
      init_cnn_params(params, cfg, 2 * cfg.lstm_hidden, rng);
      break;
    case EncoderKind::BiLstmGcn:
      init_lstm_params(params, cfg, input_dim, rng);
      init_gcn_params(params, cfg, 2 * cfg.lstm_hidden, rng);
      break;
  }
}

Var encode(Tape& tape, ParameterStore& params, const EncoderConfig& cfg,
           Var V, const DependencyTree* tree, bool training, Rng& rng) {
  switch (cfg.kind) {
    case EncoderKind::Cnn:
      return run_cnn(tape, params, cfg, V);
    case EncoderKind::BiLstm:
      return run_bilstm(tape, params, cfg, V, training, rng);
    case EncoderKind::BiLstmCnn:
      return run_cnn(tape, params, cfg,
                     run_bilstm(tape, params, cfg, V, training, rng));
    case EncoderKind::BiLstmGcn: {
      if (tree == nullptr)
        throw std::invalid_argument("BiLSTM-GCN needs a dependency tree");
      if (tree->size() != tape.value(V).rows())
        throw std::invalid_argument(
            "BiLSTM-GCN: tree has " + std::to_string(tree->size()) +
            " tokens but input has " +
            std::to_string(tape.value(V).rows()));
      return run_gcn(tape, params, cfg,
                     run_bilstm(tape, params, cfg, V, training, rng), *tree);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace rex
