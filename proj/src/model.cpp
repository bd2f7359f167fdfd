#include "rex/model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace rex {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw std::invalid_argument("config: seeds must be distinct");
  if (learning_rate <= 0.0) throw std::invalid_argument("config: learning_rate must be > 0");
  if (momentum < 0.0 || momentum >= 1.0)
    throw std::invalid_argument("config: momentum must be in [0,1)");
  for (double r : {word_dropout, dropout, dropconnect})
    if (r < 0.0 || r >= 1.0)
      throw std::invalid_argument("config: drop rates must be in [0,1)");
  if (word_dim == 0 || pos_dim == 0 || ff_hidden == 0 || batch_size == 0)
    throw std::invalid_argument("config: extents must be positive");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0)
    throw std::invalid_argument("config: validation_fraction must be in [0,1)");
}

namespace {

json config_json(const ExperimentConfig& c) {
  return json{{"encoder", to_string(c.encoder.kind)},
              {"pooling", to_string(c.pooling)},
              {"lstm_layers", c.encoder.lstm_layers},
              {"lstm_hidden", c.encoder.lstm_hidden},
              {"cnn_windows", c.encoder.cnn_windows},
              {"cnn_filters", c.encoder.cnn_filters},
              {"gcn_layers", c.encoder.gcn_layers},
              {"gcn_hidden", c.encoder.gcn_hidden},
              {"word_dim", c.word_dim},
              {"pos_dim", c.pos_dim},
              {"ff_hidden", c.ff_hidden},
              {"learning_rate", c.learning_rate},
              {"momentum", c.momentum},
              {"word_dropout", c.word_dropout},
              {"dropout", c.dropout},
              {"dropconnect", c.dropconnect},
              {"seeds", c.seeds},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"weighted_sampling", c.weighted_sampling},
              {"negative_label", c.negative_label},
              {"validation_fraction", c.validation_fraction},
              {"train_path", c.train_path},
              {"validation_path", c.validation_path},
              {"test_path", c.test_path},
              {"embedding_path", c.embedding_path},
              {"output_dir", c.output_dir},
              {"precision", to_string(c.precision)}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  const json defaults = config_json(c);
  for (const auto& [key, value] : j.items())
    if (!defaults.contains(key))
      throw std::invalid_argument("config: unknown key '" + key + "'");
  auto opt = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j.at(key).template get<std::decay_t<decltype(slot)>>();
  };
  if (j.contains("encoder"))
    c.encoder.kind = encoder_from_string(j.at("encoder").get<std::string>());
  if (j.contains("pooling"))
    c.pooling = pooling_from_string(j.at("pooling").get<std::string>());
  opt("lstm_layers", c.encoder.lstm_layers);
  opt("lstm_hidden", c.encoder.lstm_hidden);
  opt("cnn_windows", c.encoder.cnn_windows);
  opt("cnn_filters", c.encoder.cnn_filters);
  opt("gcn_layers", c.encoder.gcn_layers);
  opt("gcn_hidden", c.encoder.gcn_hidden);
  opt("word_dim", c.word_dim);
  opt("pos_dim", c.pos_dim);
  opt("ff_hidden", c.ff_hidden);
  opt("learning_rate", c.learning_rate);
  opt("momentum", c.momentum);
  opt("word_dropout", c.word_dropout);
  opt("dropout", c.dropout);
  opt("dropconnect", c.dropconnect);
  opt("seeds", c.seeds);
  opt("epochs", c.epochs);
  opt("batch_size", c.batch_size);
  opt("weighted_sampling", c.weighted_sampling);
  opt("negative_label", c.negative_label);
  opt("validation_fraction", c.validation_fraction);
  opt("train_path", c.train_path);
  opt("validation_path", c.validation_path);
  opt("test_path", c.test_path);
  opt("embedding_path", c.embedding_path);
  opt("output_dir", c.output_dir);
  if (j.contains("precision"))
    c.precision = precision_from_string(j.at("precision").get<std::string>());
  c.encoder.interlayer_dropout = c.dropout;
  c.encoder.dropconnect = c.dropconnect;
  c.validate();
  return c;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": malformed JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  return config_json(cfg).dump(2);
}

RelationClassifier::RelationClassifier(Vocabulary vocab,
                                       const ExperimentConfig& cfg,
                                       const EmbeddingMap* pretrained, Rng& rng)
    : vocab_(std::move(vocab)), cfg_(cfg) {
  cfg_.encoder.interlayer_dropout = cfg_.dropout;
  cfg_.encoder.dropconnect = cfg_.dropconnect;
  EmbeddingTable table =
      EmbeddingTable::init(vocab_, cfg_.word_dim, cfg_.pos_dim, pretrained, rng);
  params_.create("emb.word", std::move(table.word));
  params_.create("emb.pos", std::move(table.pos));
  init_encoder_params(params_, cfg_.encoder, cfg_.word_dim + cfg_.pos_dim, rng);
  const std::size_t pool_dim =
      plan_set_count(cfg_.pooling) * cfg_.encoder.output_dim();
  auto uniform = [&rng](std::size_t r, std::size_t c) {
    Tensor t(r, c, 0.0);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-0.1, 0.1);
    return t;
  };
  params_.create("ff.W1", uniform(pool_dim, cfg_.ff_hidden));
  params_.create("ff.b1", Tensor(1, cfg_.ff_hidden, 0.0));
  params_.create("ff.W2", uniform(cfg_.ff_hidden, vocab_.label_count()));
  params_.create("ff.b2", Tensor(1, vocab_.label_count(), 0.0));
}

Var RelationClassifier::forward_logits(Tape& tape, const RelationExample& ex,
                                       bool training, Rng& rng) {
  const auto widx = vocab_.encode_words(ex);
  const auto pidx = vocab_.encode_pos(ex);
  Var words = tape.row_select(tape.param(params_.get("emb.word")), widx);
  words = tape.dropout(words, cfg_.word_dropout, training, rng);
  Var pos = tape.row_select(tape.param(params_.get("emb.pos")), pidx);
  Var V = tape.concat_cols({words, pos});

  const DependencyTree* tree =
      cfg_.encoder.kind == EncoderKind::BiLstmGcn ? &ex.tree : nullptr;
  Var A = encode(tape, params_, cfg_.encoder, V, tree, training, rng);

  PathSets ps;
  const PathSets* ps_ptr = nullptr;
  if (cfg_.pooling == PoolingStrategy::EntDep0 ||
      cfg_.pooling == PoolingStrategy::EntDep1) {
    ps = path_sets(ex.tree, ex.m1, ex.m2);
    ps_ptr = &ps;
  }
  PoolingPlan plan = make_plan(cfg_.pooling, ex.size(), ex.m1, ex.m2, ps_ptr);
  Var F = pool(tape, A, plan);
  F = tape.dropout(F, cfg_.dropout, training, rng);

  Var h = tape.relu(tape.add(tape.matmul(F, tape.param(params_.get("ff.W1"))),
                             tape.param(params_.get("ff.b1"))));
  return tape.add(tape.matmul(h, tape.param(params_.get("ff.W2"))),
                  tape.param(params_.get("ff.b2")));
}

Tensor RelationClassifier::forward_probs(const RelationExample& ex) {
  Tape tape;
  Rng rng(0);  // inference path draws nothing
  Var logits = forward_logits(tape, ex, /*training=*/false, rng);
  return tape.value(tape.softmax_rows(logits));
}

std::string RelationClassifier::predict(const RelationExample& ex) {
  Tensor p = forward_probs(ex);
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.cols(); ++c)
    if (p.at(0, c) > p.at(0, best)) best = c;
  return vocab_.label_name(best);
}

namespace {

double probe_nll(RelationClassifier& model,
                 const std::vector<RelationExample>& probe) {
  double total = 0.0;
  Rng rng(0);
  for (const auto& ex : probe) {
    Tape tape;
    Var logits = model.forward_logits(tape, ex, false, rng);
    Var loss =
        tape.cross_entropy(logits, model.vocab().label_index(ex.label));
    total += tape.value(loss)[0];
  }
  return total / double(probe.size());
}

std::vector<Tensor> snapshot(ParameterStore& store) {
  std::vector<Tensor> out;
  for (Parameter* p : store.all()) out.push_back(p->value);
  return out;
}

void restore(ParameterStore& store, const std::vector<Tensor>& snap) {
  auto all = store.all();
  for (std::size_t i = 0; i < all.size(); ++i) all[i]->value = snap[i];
}

}  // namespace

TrainResult train(RelationClassifier& model, const ExperimentConfig& cfg,
                  std::vector<RelationExample> train_set,
                  const std::vector<RelationExample>* val, Rng& rng) {
  if (train_set.empty()) throw TrainingError("train: empty training set");
  std::vector<RelationExample> holdout;
  if (val == nullptr && cfg.validation_fraction > 0.0) {
    std::shuffle(train_set.begin(), train_set.end(), rng.engine());
    std::size_t k = static_cast<std::size_t>(
        cfg.validation_fraction * double(train_set.size()));
    if (k > 0 && k < train_set.size()) {
      holdout.assign(train_set.end() - k, train_set.end());
      train_set.resize(train_set.size() - k);
      val = &holdout;
    }
  }

  const std::size_t n = train_set.size();
  const std::size_t batch = std::min(cfg.batch_size, n);
  const std::size_t steps = (n + batch - 1) / batch;
  std::vector<RelationExample> probe(train_set.begin(),
                                     train_set.begin() + batch);

  std::optional<WeightedSampler> sampler;
  if (cfg.weighted_sampling)
    sampler.emplace(train_set, cfg.negative_label, rng.engine()());

  SgdNesterov opt(cfg.learning_rate, cfg.momentum);
  TrainResult result;
  result.probe_loss.push_back(probe_nll(model, probe));
  std::vector<Tensor> best_params;
  double best_f1 = -1.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (!sampler) std::shuffle(order.begin(), order.end(), rng.engine());
    std::size_t cursor = 0;
    for (std::size_t step = 0; step < steps; ++step) {
      Tape tape;
      std::vector<Var> losses;
      for (std::size_t b = 0; b < batch; ++b) {
        std::size_t idx =
            sampler ? sampler->next() : order[(cursor++) % n];
        const auto& ex = train_set[idx];
        Var logits = model.forward_logits(tape, ex, true, rng);
        losses.push_back(
            tape.cross_entropy(logits, model.vocab().label_index(ex.label)));
      }
      Var total = losses[0];
      for (std::size_t i = 1; i < losses.size(); ++i)
        total = tape.add(total, losses[i]);
      Var loss = tape.scale(total, 1.0 / double(losses.size()));
      double lv = tape.value(loss)[0];
      if (!std::isfinite(lv))
        throw TrainingError(
            "train: loss is not finite at epoch " + std::to_string(epoch) +
            "; try a smaller learning_rate");
      tape.backward(loss);
      opt.step(model.params());
    }
    result.probe_loss.push_back(probe_nll(model, probe));
    if (val) {
      double f1 = evaluate(model, *val).micro_f1;
      if (f1 > best_f1) {
        best_f1 = f1;
        best_params = snapshot(model.params());
        result.best_epoch = epoch;
        result.best_val_f1 = f1;
      }
    } else {
      result.best_epoch = epoch;
    }
  }
  if (!best_params.empty()) restore(model.params(), best_params);
  return result;
}

EvalReport evaluate(RelationClassifier& model,
                    const std::vector<RelationExample>& examples) {
  std::vector<std::string> gold, pred;
  gold.reserve(examples.size());
  pred.reserve(examples.size());
  for (const auto& ex : examples) {
    gold.push_back(ex.label);
    pred.push_back(model.predict(ex));
  }
  return micro_f1(gold, pred, model.config().negative_label);
}

ResultRecord ExperimentResult::record(const ExperimentConfig& cfg) const {
  return ResultRecord{to_string(cfg.encoder.kind), to_string(cfg.pooling),
                      mean_precision, mean_recall, mean_f1, stddev_f1};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::vector<RelationExample>& train_set,
                                const std::vector<RelationExample>* val,
                                const std::vector<RelationExample>& test_set) {
  cfg.validate();
  namespace fs = std::filesystem;
  if (!cfg.output_dir.empty()) fs::create_directories(cfg.output_dir);

  ExperimentResult result;
  json seeds_json = json::array();
  std::string failure;
  EmbeddingMap pretrained;
  const EmbeddingMap* pretrained_ptr = nullptr;
  if (!cfg.embedding_path.empty()) {
    pretrained = load_embeddings(cfg.embedding_path, cfg.word_dim);
    pretrained_ptr = &pretrained;
  }

  for (std::uint64_t seed : cfg.seeds) {
    try {
      Rng rng(seed);
      RelationClassifier model(Vocabulary::build(train_set), cfg,
                               pretrained_ptr, rng);
      TrainResult tr = train(model, cfg, train_set, val, rng);
      EvalReport rep = evaluate(model, test_set.empty() ? train_set : test_set);
      result.per_seed.push_back(
          {seed, rep.micro_precision, rep.micro_recall, rep.micro_f1});
      seeds_json.push_back(json{{"seed", seed},
                                {"precision", rep.micro_precision},
                                {"recall", rep.micro_recall},
                                {"f1", rep.micro_f1},
                                {"best_epoch", tr.best_epoch}});
      if (!cfg.output_dir.empty())
        save_model(model, cfg.output_dir + "/seed" + std::to_string(seed));
    } catch (const std::exception& e) {
      failure = "seed " + std::to_string(seed) + ": " + e.what();
      break;
    }
  }

  const std::size_t k = result.per_seed.size();
  if (k > 0) {
    for (const auto& s : result.per_seed) {
      result.mean_precision += s.precision / double(k);
      result.mean_recall += s.recall / double(k);
      result.mean_f1 += s.f1 / double(k);
    }
    double var = 0.0;
    for (const auto& s : result.per_seed) {
      double d = s.f1 - result.mean_f1;
      var += d * d / double(k);
    }
    result.stddev_f1 = std::sqrt(var);
  }

  if (!cfg.output_dir.empty()) {
    json out{{"config", json::parse(config_to_json(cfg))},
             {"status", failure.empty() ? "ok" : "failed"},
             {"non_tuned_defaults",
              {"epochs", "batch_size", "validation_fraction", "pos_dim"}},
             {"precision", to_string(cfg.precision)},
             {"seeds", seeds_json},
             {"mean", {{"precision", result.mean_precision},
                       {"recall", result.mean_recall},
                       {"f1", result.mean_f1},
                       {"f1_stddev", result.stddev_f1}}}};
    if (!failure.empty()) out["error"] = failure;
    std::ofstream os(cfg.output_dir + "/results.json");
    os << out.dump(2) << "\n";
  }
  if (!failure.empty())
    throw TrainingError("experiment failed (" + failure +
                        "); partial results preserved");
  return result;
}

void save_model(RelationClassifier& model, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const Vocabulary& v = model.vocab();
  json j{{"config", json::parse(config_to_json(model.config()))},
         {"vocab", {{"words", v.words()}, {"pos", v.pos()},
                    {"labels", v.labels()}}}};
  std::ofstream os(dir + "/model.json");
  if (!os) throw std::runtime_error("cannot write " + dir + "/model.json");
  os << j.dump() << "\n";
  save_checkpoint(model.params(), dir + "/params.bin",
                  model.config().precision);
}

RelationClassifier load_model(const std::string& dir) {
  std::ifstream is(dir + "/model.json");
  if (!is) throw std::runtime_error("cannot open " + dir + "/model.json");
  json j;
  is >> j;
  ExperimentConfig cfg = config_from_json(j.at("config"));
  using Map = std::map<std::string, std::size_t>;
  Vocabulary vocab = Vocabulary::from_maps(
      j.at("vocab").at("words").get<Map>(), j.at("vocab").at("pos").get<Map>(),
      j.at("vocab").at("labels").get<Map>());
  Rng rng(0);  // initial values are immediately overwritten by the checkpoint
  RelationClassifier model(std::move(vocab), cfg, nullptr, rng);
  load_checkpoint(model.params(), dir + "/params.bin");
  return model;
}

}  // namespace rex
