#pragma once

#include <string>
#include <vector>

#include "rex/syntax.hpp"
#include "rex/tape.hpp"

namespace rex {

enum class EncoderKind { Cnn, BiLstm, BiLstmCnn, BiLstmGcn };

std::string to_string(EncoderKind k);
EncoderKind encoder_from_string(const std::string& s);
const std::vector<EncoderKind>& all_encoder_kinds();

struct EncoderConfig {
  EncoderKind kind = EncoderKind::BiLstm;
  std::size_t lstm_layers = 2;
  std::size_t lstm_hidden = 300;  // per direction
  std::vector<std::size_t> cnn_windows = {2, 3, 4, 5};
  std::size_t cnn_filters = 200;  // per window size
  std::size_t gcn_layers = 2;
  std::size_t gcn_hidden = 300;
  double interlayer_dropout = 0.5;  // between stacked LSTM layers
  double dropconnect = 0.5;         // on hidden-to-hidden LSTM matrices

  // d_A of the abstract sequence this encoder emits.
  std::size_t output_dim() const;
};

// Creates the encoder's parameters in the store. Weights uniform in
// [-0.1, 0.1]; LSTM forget-gate biases start at 1, every other bias at 0.
void init_encoder_params(ParameterStore& params, const EncoderConfig& cfg,
                         std::size_t input_dim, Rng& rng);

// Maps V (n x d_in) to the abstract sequence A (n x d_A). The tree is
// required for BiLSTM-GCN and ignored otherwise.
Var encode(Tape& tape, ParameterStore& params, const EncoderConfig& cfg,
           Var V, const DependencyTree* tree, bool training, Rng& rng);

}  // namespace rex
