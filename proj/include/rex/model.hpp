#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rex/checkpoint.hpp"
#include "rex/corpus.hpp"
#include "rex/encoders.hpp"
#include "rex/eval.hpp"
#include "rex/optimizer.hpp"
#include "rex/pooling.hpp"
#include "rex/tape.hpp"

namespace rex {

// One experiment cell: encoder x pooling x hyperparameters x seeds.
// Learning rate 0.5, momentum 0.8, dropout 0.7 (word) / 0.5 (elsewhere),
// DropConnect 0.5 and the layer sizes follow the tuned setup; batch size,
// epoch count and validation split are toolkit defaults and recorded as
// such in every results file.
struct ExperimentConfig {
  EncoderConfig encoder;
  PoolingStrategy pooling = PoolingStrategy::EntOnly;

  std::size_t word_dim = 300;
  std::size_t pos_dim = 30;
  std::size_t ff_hidden = 1000;

  double learning_rate = 0.5;
  double momentum = 0.8;
  double word_dropout = 0.7;
  double dropout = 0.5;      // between LSTM layers and before the classifier
  double dropconnect = 0.5;  // LSTM hidden-to-hidden matrices

  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  bool weighted_sampling = true;
  std::string negative_label = "no_relation";
  // Used only when no validation set is given; 0 disables best-epoch
  // selection (final parameters are kept).
  double validation_fraction = 0.1;

  std::string train_path;
  std::string validation_path;  // optional
  std::string test_path;        // optional
  std::string embedding_path;   // optional
  std::string output_dir;       // optional; empty = nothing persisted

  Precision precision = Precision::F32;  // checkpoint payload width

  void validate() const;
};

// Reads a JSON config file; unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

class TrainingError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// embedding -> encoder -> pooling -> feed-forward -> softmax.
class RelationClassifier {
 public:
  RelationClassifier(Vocabulary vocab, const ExperimentConfig& cfg,
                     const EmbeddingMap* pretrained, Rng& rng);

  // Logits (1 x |labels|) on the given tape. Training mode applies dropout
  // and DropConnect.
  Var forward_logits(Tape& tape, const RelationExample& ex, bool training,
                     Rng& rng);
  // Inference-mode probability vector; non-negative, sums to 1.
  Tensor forward_probs(const RelationExample& ex);
  std::string predict(const RelationExample& ex);

  ParameterStore& params() { return params_; }
  const Vocabulary& vocab() const { return vocab_; }
  const ExperimentConfig& config() const { return cfg_; }

 private:
  Vocabulary vocab_;
  ExperimentConfig cfg_;
  ParameterStore params_;
};

struct TrainResult {
  std::vector<double> probe_loss;  // inference-mode NLL of a fixed batch
  std::size_t best_epoch = 0;
  double best_val_f1 = 0.0;
};

// Trains in place. val may be null (then validation_fraction of train is
// held out, if nonzero). Throws TrainingError on NaN loss.
TrainResult train(RelationClassifier& model, const ExperimentConfig& cfg,
                  std::vector<RelationExample> train_set,
                  const std::vector<RelationExample>* val, Rng& rng);

EvalReport evaluate(RelationClassifier& model,
                    const std::vector<RelationExample>& examples);

struct SeedResult {
  std::uint64_t seed = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct ExperimentResult {
  std::vector<SeedResult> per_seed;
  double mean_precision = 0.0, mean_recall = 0.0, mean_f1 = 0.0;
  double stddev_f1 = 0.0;

  ResultRecord record(const ExperimentConfig& cfg) const;
};

// Trains one model per seed, scores each on the test set, aggregates, and
// (when cfg.output_dir is set) writes results.json plus a model bundle per
// seed under output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::vector<RelationExample>& train_set,
                                const std::vector<RelationExample>* val,
                                const std::vector<RelationExample>& test_set);

// Model bundle: <dir>/model.json (config + vocabulary) and <dir>/params.bin
// (checkpoint).
void save_model(RelationClassifier& model, const std::string& dir);
RelationClassifier load_model(const std::string& dir);

}  // namespace rex
