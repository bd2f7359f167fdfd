#include "rex/eval.hpp"

#include <cstdio>
#include <stdexcept>

#include "rex/encoders.hpp"
#include "rex/pooling.hpp"

namespace rex {

EvalReport micro_f1(const std::vector<std::string>& gold,
                    const std::vector<std::string>& pred,
                    const std::string& negative_label) {
  if (gold.size() != pred.size())
    throw std::invalid_argument("micro_f1: gold has " +
                                std::to_string(gold.size()) +
                                " labels, pred has " +
                                std::to_string(pred.size()));
  if (gold.empty()) throw std::invalid_argument("micro_f1: empty input");
  EvalReport r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    r.confusion[gold[i]][pred[i]] += 1;
    if (gold[i] == pred[i]) {
      if (gold[i] != negative_label) r.counts[gold[i]].tp += 1;
    } else {
      if (pred[i] != negative_label) r.counts[pred[i]].fp += 1;
      if (gold[i] != negative_label) r.counts[gold[i]].fn += 1;
    }
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (auto& [cls, c] : r.counts) {
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
    ClassMetrics m;
    m.precision = c.tp + c.fp ? double(c.tp) / double(c.tp + c.fp) : 0.0;
    m.recall = c.tp + c.fn ? double(c.tp) / double(c.tp + c.fn) : 0.0;
    m.f1 = m.precision + m.recall
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    r.per_class[cls] = m;
  }
  r.micro_precision = tp + fp ? double(tp) / double(tp + fp) : 0.0;
  r.micro_recall = tp + fn ? double(tp) / double(tp + fn) : 0.0;
  r.micro_f1 = r.micro_precision + r.micro_recall
                   ? 2.0 * r.micro_precision * r.micro_recall /
                         (r.micro_precision + r.micro_recall)
                   : 0.0;
  return r;
}

std::string emit_table(const std::vector<ResultRecord>& results) {
  if (results.empty()) throw std::invalid_argument("emit_table: no results");
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-24s %6s %6s %6s %8s\n", "Model", "P", "R",
                "F1", "F1-sd");
  out += buf;
  out += std::string(54, '-') + "\n";
  for (EncoderKind enc : all_encoder_kinds()) {
    bool block_open = false;
    for (PoolingStrategy ps : all_pooling_strategies()) {
      for (const auto& rec : results) {
        if (rec.encoder != to_string(enc) || rec.pooling != to_string(ps))
          continue;
        if (!block_open) {
          out += to_string(enc) + "\n";
          block_open = true;
        }
        std::snprintf(buf, sizeof buf, "  + %-20s %6.1f %6.1f %6.1f %8.1f\n",
                      rec.pooling.c_str(), 100.0 * rec.precision,
                      100.0 * rec.recall, 100.0 * rec.f1,
                      100.0 * rec.f1_stddev);
        out += buf;
      }
    }
  }
  return out;
}

}  // namespace rex
