#include "rex/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rex {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void reject(const std::string& id, const std::string& what) {
  throw std::invalid_argument("record '" + id + "': " + what);
}

}  // namespace

void validate_example(const RelationExample& ex) {
  const std::size_t n = ex.tokens.size();
  if (n == 0) reject(ex.id, "empty sentence");
  if (ex.pos_tags.size() != n || ex.tree.head.size() != n ||
      (!ex.tree.label.empty() && ex.tree.label.size() != n))
    reject(ex.id, "parallel arrays have unequal lengths");
  const auto& m1 = ex.m1;
  const auto& m2 = ex.m2;
  if (!(1 <= m1.start && m1.start <= m1.end && m1.end < m2.start &&
        m2.start <= m2.end && m2.end <= n))
    reject(ex.id, "mention ordering violated (need 1 <= s1 <= e1 < s2 <= e2 "
                  "<= n)");
  if (m1.type.empty() || m2.type.empty()) reject(ex.id, "empty entity type");
  if (ex.label.empty()) reject(ex.id, "empty label");
  try {
    validate_tree(ex.tree);
  } catch (const std::exception& e) {
    reject(ex.id, std::string("tree: ") + e.what());
  }
}

std::vector<RelationExample> parse_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<RelationExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed JSON: " + e.what());
    }
    RelationExample ex;
    try {
      ex.id = j.at("id").get<std::string>();
      ex.tokens = j.at("tokens").get<std::vector<std::string>>();
      ex.pos_tags = j.at("pos").get<std::vector<std::string>>();
      ex.tree.head = j.at("head").get<std::vector<std::size_t>>();
      if (j.contains("deprel"))
        ex.tree.label = j.at("deprel").get<std::vector<std::string>>();
      auto read_mention = [&](const char* key) {
        const auto& m = j.at(key);
        EntityMention em;
        em.start = m.at("start").get<std::size_t>();
        em.end = m.at("end").get<std::size_t>();
        em.type = m.at("type").get<std::string>();
        return em;
      };
      ex.m1 = read_mention("e1");
      ex.m2 = read_mention("e2");
      ex.label = j.at("label").get<std::string>();
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": bad record: " + e.what());
    }
    validate_example(ex);
    out.push_back(std::move(ex));
  }
  return out;
}

std::string mask_token(int role, const std::string& type) {
  return "M" + std::to_string(role) + "-" + type;
}

std::vector<std::string> mask_entities(const RelationExample& ex) {
  std::vector<std::string> out = ex.tokens;
  for (std::size_t i = ex.m1.start; i <= ex.m1.end; ++i)
    out[i - 1] = mask_token(1, ex.m1.type);
  for (std::size_t i = ex.m2.start; i <= ex.m2.end; ++i)
    out[i - 1] = mask_token(2, ex.m2.type);
  return out;
}

Vocabulary Vocabulary::build(const std::vector<RelationExample>& examples) {
  Vocabulary v;
  auto intern = [](std::map<std::string, std::size_t>& m,
                   const std::string& key) {
    m.try_emplace(key, m.size());
  };
  intern(v.words_, kUnknown);
  for (const auto& ex : examples) {
    const auto masked = mask_entities(ex);
    for (std::size_t i = 0; i < masked.size(); ++i) {
      bool in_span = (i + 1 >= ex.m1.start && i + 1 <= ex.m1.end) ||
                     (i + 1 >= ex.m2.start && i + 1 <= ex.m2.end);
      intern(v.words_, in_span ? masked[i] : lowercase(masked[i]));
    }
    for (const auto& tag : ex.pos_tags) intern(v.pos_, tag);
    intern(v.labels_, ex.label);
  }
  v.label_names_.resize(v.labels_.size());
  for (const auto& [name, idx] : v.labels_) v.label_names_[idx] = name;
  return v;
}

Vocabulary Vocabulary::from_maps(std::map<std::string, std::size_t> words,
                                 std::map<std::string, std::size_t> pos,
                                 std::map<std::string, std::size_t> labels) {
  Vocabulary v;
  v.words_ = std::move(words);
  v.pos_ = std::move(pos);
  v.labels_ = std::move(labels);
  if (!v.words_.count(kUnknown))
    throw std::invalid_argument("vocabulary maps lack the unknown token");
  auto check_dense = [](const std::map<std::string, std::size_t>& m,
                        const char* what) {
    std::vector<bool> seen(m.size(), false);
    for (const auto& [k, idx] : m) {
      if (idx >= m.size() || seen[idx])
        throw std::invalid_argument(std::string(what) +
                                    " indices are not a dense 0-based "
                                    "bijection");
      seen[idx] = true;
    }
  };
  check_dense(v.words_, "word");
  check_dense(v.pos_, "POS");
  check_dense(v.labels_, "label");
  v.label_names_.resize(v.labels_.size());
  for (const auto& [name, idx] : v.labels_) v.label_names_[idx] = name;
  return v;
}

std::size_t Vocabulary::word_index(const std::string& word) const {
  auto it = words_.find(word);
  if (it != words_.end()) return it->second;
  it = words_.find(lowercase(word));
  if (it != words_.end()) return it->second;
  return words_.at(kUnknown);
}

std::size_t Vocabulary::pos_index(const std::string& tag) const {
  auto it = pos_.find(tag);
  if (it == pos_.end())
    throw std::out_of_range("unknown POS tag '" + tag +
                            "' (tagset is closed at vocabulary build)");
  return it->second;
}

std::size_t Vocabulary::label_index(const std::string& label) const {
  auto it = labels_.find(label);
  if (it == labels_.end())
    throw std::out_of_range("unknown relation label '" + label + "'");
  return it->second;
}

const std::string& Vocabulary::label_name(std::size_t idx) const {
  return label_names_.at(idx);
}

std::vector<std::size_t> Vocabulary::encode_words(
    const RelationExample& ex) const {
  const auto masked = mask_entities(ex);
  std::vector<std::size_t> out;
  out.reserve(masked.size());
  for (const auto& w : masked) out.push_back(word_index(w));
  return out;
}

std::vector<std::size_t> Vocabulary::encode_pos(
    const RelationExample& ex) const {
  std::vector<std::size_t> out;
  out.reserve(ex.pos_tags.size());
  for (const auto& t : ex.pos_tags) out.push_back(pos_index(t));
  return out;
}

EmbeddingMap load_embeddings(const std::string& path, std::size_t expect_dim) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open embeddings: " + path);
  std::string header;
  if (!std::getline(is, header))
    throw std::runtime_error(path + ": missing header line");
  std::istringstream hs(header);
  std::size_t count = 0, dim = 0;
  if (!(hs >> count >> dim))
    throw std::runtime_error(path + ":1: header must be 'count dim'");
  if (dim != expect_dim)
    throw std::runtime_error(path + ": embedding dim " + std::to_string(dim) +
                             " != configured dim " +
                             std::to_string(expect_dim));
  EmbeddingMap map;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    std::vector<double> vec(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      if (!(ls >> vec[i]))
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": expected " + std::to_string(dim) +
                                 " values for '" + word + "'");
    }
    double extra;
    if (ls >> extra)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": too many values for '" + word + "'");
    if (map.count(word))
      std::cerr << "warning: duplicate embedding for '" << word
                << "' at line " << lineno << "; keeping the later one\n";
    map[word] = std::move(vec);
  }
  return map;
}

void save_embeddings(const EmbeddingMap& map, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  std::size_t dim = map.empty() ? 0 : map.begin()->second.size();
  os.precision(17);
  os << map.size() << " " << dim << "\n";
  for (const auto& [word, vec] : map) {
    os << word;
    for (double v : vec) os << " " << v;
    os << "\n";
  }
}

EmbeddingTable EmbeddingTable::init(const Vocabulary& vocab,
                                    std::size_t word_dim, std::size_t pos_dim,
                                    const EmbeddingMap* pretrained, Rng& rng) {
  EmbeddingTable t{Tensor(vocab.word_count(), word_dim, 0.0),
                   Tensor(vocab.pos_count(), pos_dim, 0.0)};
  for (const auto& [word, idx] : vocab.words()) {
    const std::vector<double>* vec = nullptr;
    if (pretrained) {
      auto it = pretrained->find(word);
      if (it != pretrained->end()) vec = &it->second;
    }
    for (std::size_t c = 0; c < word_dim; ++c)
      t.word.at(idx, c) = vec ? (*vec)[c] : rng.uniform(-0.1, 0.1);
  }
  for (std::size_t i = 0; i < t.pos.numel(); ++i)
    t.pos[i] = rng.uniform(-0.1, 0.1);
  return t;
}

Tensor vectorize(const RelationExample& ex, const Vocabulary& vocab,
                 const EmbeddingTable& table) {
  const auto widx = vocab.encode_words(ex);
  const auto pidx = vocab.encode_pos(ex);
  const std::size_t dw = table.word.cols(), dp = table.pos.cols();
  Tensor out(ex.size(), dw + dp, 0.0);
  for (std::size_t i = 0; i < ex.size(); ++i) {
    for (std::size_t c = 0; c < dw; ++c)
      out.at(i, c) = table.word.at(widx[i], c);
    for (std::size_t c = 0; c < dp; ++c)
      out.at(i, dw + c) = table.pos.at(pidx[i], c);
  }
  return out;
}

WeightedSampler::WeightedSampler(const std::vector<RelationExample>& examples,
                                 const std::string& negative_label,
                                 std::uint64_t seed)
    : rng_(seed) {
  for (std::size_t i = 0; i < examples.size(); ++i)
    (examples[i].label == negative_label ? negative_ : positive_).push_back(i);
  if (positive_.empty() || negative_.empty())
    throw std::invalid_argument(
        "weighted sampler: dataset has a single class; disable weighted "
        "sampling for this data");
}

std::size_t WeightedSampler::next() {
  const auto& side = rng_.bernoulli(0.5) ? positive_ : negative_;
  return side[rng_.index(side.size())];
}

}  // namespace rex
