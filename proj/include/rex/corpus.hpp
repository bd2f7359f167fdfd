#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rex/rng.hpp"
#include "rex/syntax.hpp"
#include "rex/tensor.hpp"

namespace rex {

// One classification instance: a sentence, its parse, two ordered
// non-nested entity mentions and a gold relation label.
struct RelationExample {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::string> pos_tags;
  DependencyTree tree;
  EntityMention m1;
  EntityMention m2;
  std::string label;

  std::size_t size() const { return tokens.size(); }
};

// Validates all RelationExample invariants; throws naming the record id and
// the violated invariant.
void validate_example(const RelationExample& ex);

// Reads the line-delimited JSON dataset format (one object per line with
// fields id, tokens[], pos[], head[], deprel[], e1{start,end,type},
// e2{start,end,type}, label; indices 1-based, head 0 = root).
std::vector<RelationExample> parse_dataset(const std::string& path);

// Mask token for a mention role (1 or 2) and entity type, e.g. "M1-drug".
std::string mask_token(int role, const std::string& type);

// Tokens with each mention span replaced by its role-and-type mask token.
// Length-preserving and idempotent.
std::vector<std::string> mask_entities(const RelationExample& ex);

class Vocabulary {
 public:
  static constexpr const char* kUnknown = "<unk>";

  // Builds word/POS/label maps from the training examples: masked lowercased
  // words, every mask token seen, the unknown token, the closed POS tagset
  // and the label set.
  static Vocabulary build(const std::vector<RelationExample>& examples);

  std::size_t word_index(const std::string& word) const;  // OOV -> <unk>
  std::size_t pos_index(const std::string& tag) const;    // unknown -> throws
  std::size_t label_index(const std::string& label) const;
  const std::string& label_name(std::size_t idx) const;

  std::size_t word_count() const { return words_.size(); }
  std::size_t pos_count() const { return pos_.size(); }
  std::size_t label_count() const { return label_names_.size(); }

  // Masked word indices and POS indices for one example.
  std::vector<std::size_t> encode_words(const RelationExample& ex) const;
  std::vector<std::size_t> encode_pos(const RelationExample& ex) const;

  const std::map<std::string, std::size_t>& words() const { return words_; }
  const std::map<std::string, std::size_t>& pos() const { return pos_; }
  const std::map<std::string, std::size_t>& labels() const { return labels_; }

  // Rebuilds a vocabulary from previously serialized maps (model bundles).
  static Vocabulary from_maps(std::map<std::string, std::size_t> words,
                              std::map<std::string, std::size_t> pos,
                              std::map<std::string, std::size_t> labels);

 private:
  std::map<std::string, std::size_t> words_;
  std::map<std::string, std::size_t> pos_;
  std::map<std::string, std::size_t> labels_;
  std::vector<std::string> label_names_;
};

using EmbeddingMap = std::map<std::string, std::vector<double>>;

// Textual word2vec format: header "count dim", then "word v1 ... v_dim"
// per line. Dimension mismatches are errors naming the line; duplicate
// words: last one wins.
EmbeddingMap load_embeddings(const std::string& path, std::size_t expect_dim);
void save_embeddings(const EmbeddingMap& map, const std::string& path);

// Word and POS embedding matrices. Rows found in the pretrained map are
// copied; mask/unknown/unfound rows are uniform random in [-0.1, 0.1].
struct EmbeddingTable {
  Tensor word;  // |words| x word_dim
  Tensor pos;   // |pos| x pos_dim

  static EmbeddingTable init(const Vocabulary& vocab, std::size_t word_dim,
                             std::size_t pos_dim, const EmbeddingMap* pretrained,
                             Rng& rng);
};

// v_i = [word_emb(masked w_i), pos_emb(pos_i)] as an n x (word_dim+pos_dim)
// matrix. Pure lookup; the trainable path goes through the tape instead.
Tensor vectorize(const RelationExample& ex, const Vocabulary& vocab,
                 const EmbeddingTable& table);

// Draws negative examples with probability 1/2 and positive examples with
// probability 1/2, uniform within each class.
class WeightedSampler {
 public:
  WeightedSampler(const std::vector<RelationExample>& examples,
                  const std::string& negative_label, std::uint64_t seed);

  // Index into the examples vector passed at construction.
  std::size_t next();

 private:
  std::vector<std::size_t> positive_;
  std::vector<std::size_t> negative_;
  Rng rng_;
};

}  // namespace rex
