#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rex/corpus.hpp"
#include "rex/eval.hpp"
#include "rex/model.hpp"
#include "rex/pooling.hpp"
#include "rex/syntax.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kTrainingError = 3;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<rex::RelationExample> load_data(const std::string& path) {
  try {
    return rex::parse_dataset(path);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

int cmd_validate_data(const std::string& path) {
  try {
    auto examples = rex::parse_dataset(path);
    std::cout << path << ": " << examples.size() << " valid records\n";
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    return kDataError;
  }
}

rex::ExperimentResult run_one(const rex::ExperimentConfig& cfg) {
  auto train_set = load_data(cfg.train_path);
  std::vector<rex::RelationExample> val_set, test_set;
  const std::vector<rex::RelationExample>* val = nullptr;
  if (!cfg.validation_path.empty()) {
    val_set = load_data(cfg.validation_path);
    val = &val_set;
  }
  if (!cfg.test_path.empty()) test_set = load_data(cfg.test_path);
  return rex::run_experiment(cfg, train_set, val, test_set);
}

int cmd_train(const std::string& config_path) {
  rex::ExperimentConfig cfg = rex::load_config(config_path);
  if (cfg.train_path.empty()) {
    std::cerr << "config: train_path is required\n";
    return kUsageError;
  }
  rex::ExperimentResult res = run_one(cfg);
  std::cout << rex::emit_table({res.record(cfg)});
  if (!cfg.output_dir.empty())
    std::cout << "results written to " << cfg.output_dir << "\n";
  return kOk;
}

int cmd_run_matrix(const std::string& config_path) {
  rex::ExperimentConfig base = rex::load_config(config_path);
  if (base.train_path.empty()) {
    std::cerr << "config: train_path is required\n";
    return kUsageError;
  }
  std::vector<rex::ResultRecord> records;
  for (rex::EncoderKind enc : rex::all_encoder_kinds()) {
    for (rex::PoolingStrategy ps : rex::all_pooling_strategies()) {
      rex::ExperimentConfig cfg = base;
      cfg.encoder.kind = enc;
      cfg.pooling = ps;
      if (!base.output_dir.empty())
        cfg.output_dir = base.output_dir + "/" + rex::to_string(enc) + "_" +
                         rex::to_string(ps);
      std::cerr << "running " << rex::to_string(enc) << " + "
                << rex::to_string(ps) << "...\n";
      records.push_back(run_one(cfg).record(cfg));
    }
  }
  std::cout << rex::emit_table(records);
  return kOk;
}

int cmd_evaluate(const std::string& model_dir, const std::string& data_path) {
  rex::RelationClassifier model = rex::load_model(model_dir);
  auto examples = load_data(data_path);
  rex::EvalReport rep = rex::evaluate(model, examples);
  json per_class = json::object();
  for (const auto& [cls, m] : rep.per_class)
    per_class[cls] = {{"precision", m.precision},
                      {"recall", m.recall},
                      {"f1", m.f1},
                      {"tp", rep.counts.at(cls).tp},
                      {"fp", rep.counts.at(cls).fp},
                      {"fn", rep.counts.at(cls).fn}};
  json out{{"micro_precision", rep.micro_precision},
           {"micro_recall", rep.micro_recall},
           {"micro_f1", rep.micro_f1},
           {"per_class", per_class},
           {"confusion", rep.confusion}};
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_predict(const std::string& model_dir, const std::string& data_path) {
  rex::RelationClassifier model = rex::load_model(model_dir);
  auto examples = load_data(data_path);
  for (const auto& ex : examples) {
    rex::Tensor probs = model.forward_probs(ex);
    std::size_t best = 0;
    json pvec = json::array();
    for (std::size_t c = 0; c < probs.cols(); ++c) {
      pvec.push_back(probs.at(0, c));
      if (probs.at(0, c) > probs.at(0, best)) best = c;
    }
    json out{{"id", ex.id},
             {"label", model.vocab().label_name(best)},
             {"probabilities", pvec}};
    std::cout << out.dump() << "\n";
  }
  return kOk;
}

int cmd_inspect_pooling(const std::string& data_path,
                        const std::string& strategy_name,
                        const std::vector<std::string>& ids) {
  rex::PoolingStrategy strategy = rex::pooling_from_string(strategy_name);
  auto examples = load_data(data_path);
  bool any = false;
  for (const auto& ex : examples) {
    if (!ids.empty() &&
        std::find(ids.begin(), ids.end(), ex.id) == ids.end())
      continue;
    any = true;
    rex::PathSets ps = rex::path_sets(ex.tree, ex.m1, ex.m2);
    rex::PoolingPlan plan =
        rex::make_plan(strategy, ex.size(), ex.m1, ex.m2, &ps);
    json sets = json::array();
    for (const auto& s : plan.sets)
      sets.push_back({{"name", s.name}, {"indices", s.indices}});
    json out{{"id", ex.id},
             {"masked_tokens", rex::mask_entities(ex)},
             {"sdp0", ps.sdp0},
             {"sdp1", ps.sdp1},
             {"strategy", rex::to_string(strategy)},
             {"index_sets", sets}};
    std::cout << out.dump(2) << "\n";
  }
  if (!any) {
    std::cerr << "no matching examples\n";
    return kUsageError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural relation extraction toolkit"};
  app.require_subcommand(1);

  std::string config_path, model_dir, data_path, strategy = "ENT-DEP1";
  std::vector<std::string> ids;

  auto* train = app.add_subcommand("train", "Run one experiment from a config file");
  train->add_option("--config", config_path, "JSON experiment config")->required();

  auto* matrix = app.add_subcommand(
      "run-matrix", "Sweep all 20 encoder x pooling combinations");
  matrix->add_option("--config", config_path, "JSON base config")->required();

  auto* eval = app.add_subcommand("evaluate", "Score a saved model on a dataset");
  eval->add_option("--model", model_dir, "model bundle directory")->required();
  eval->add_option("--data", data_path, "dataset file")->required();

  auto* predict = app.add_subcommand("predict", "Emit per-example predictions");
  predict->add_option("--model", model_dir, "model bundle directory")->required();
  predict->add_option("--data", data_path, "dataset file")->required();

  auto* inspect = app.add_subcommand(
      "inspect-pooling", "Print masked tokens, SDP sets and pooling index sets");
  inspect->add_option("--data", data_path, "dataset file")->required();
  inspect->add_option("--strategy", strategy, "pooling strategy");
  inspect->add_option("--ids", ids, "restrict to these example ids");

  auto* validate = app.add_subcommand("validate-data",
                                      "Audit a dataset file against the schema");
  validate->add_option("path", data_path, "dataset file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsageError;
  }

  try {
    if (*train) return cmd_train(config_path);
    if (*matrix) return cmd_run_matrix(config_path);
    if (*eval) return cmd_evaluate(model_dir, data_path);
    if (*predict) return cmd_predict(model_dir, data_path);
    if (*inspect) return cmd_inspect_pooling(data_path, strategy, ids);
    if (*validate) return cmd_validate_data(data_path);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const rex::TrainingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kTrainingError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}
