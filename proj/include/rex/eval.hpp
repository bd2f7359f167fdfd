#pragma once

#include <map>
#include <string>
#include <vector>

namespace rex {

struct ClassCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

struct ClassMetrics {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

// Micro-averaged scores over the positive classes: the negative label is
// excluded from the TP/FP/FN pools. A positive prediction on a negative gold
// is an FP for the predicted class; a negative prediction on a positive gold
// is an FN for the gold class.
struct EvalReport {
  std::map<std::string, ClassCounts> counts;   // positive classes only
  std::map<std::string, ClassMetrics> per_class;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  // Confusion matrix including the negative class: confusion[gold][pred].
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
};

EvalReport micro_f1(const std::vector<std::string>& gold,
                    const std::vector<std::string>& pred,
                    const std::string& negative_label);

// One experiment cell for table emission.
struct ResultRecord {
  std::string encoder;
  std::string pooling;
  double precision = 0.0;  // mean over seeds, fractions in [0,1]
  double recall = 0.0;
  double f1 = 0.0;
  double f1_stddev = 0.0;
};

// Fixed-order table (encoders CNN, BiLSTM, BiLSTM-CNN, BiLSTM-GCN; poolings
// ENT-ONLY .. ENT-DEP1), percentages to one decimal. Deterministic output.
std::string emit_table(const std::vector<ResultRecord>& results);

}  // namespace rex
