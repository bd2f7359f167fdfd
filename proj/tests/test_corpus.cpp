#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "rex/corpus.hpp"
#include "support/synthetic.hpp"

using namespace rex;

namespace {

// The running example sentence with mentions at tokens 1 and 4.
RelationExample example5() {
  RelationExample ex;
  ex.id = "ex5";
  ex.tokens = {"Acetazolamide", "can", "elevate", "cyclosporine", "levels"};
  ex.pos_tags = {"NN", "MD", "VB", "NN", "NNS"};
  ex.tree.head = {3, 3, 0, 5, 3};
  ex.tree.label = {"nsubj", "aux", "root", "nmod", "dobj"};
  ex.m1 = {1, 1, "drug"};
  ex.m2 = {4, 4, "drug"};
  ex.label = "mechanism";
  return ex;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    path = (std::filesystem::temp_directory_path() /
            ("rex_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++)))
               .string();
    std::ofstream(path) << contents;
  }
  ~TempFile() { std::filesystem::remove(path); }
  static inline int counter = 0;
};

std::string record_json(const RelationExample& ex) {
  std::string toks, pos, heads, deprels;
  for (std::size_t i = 0; i < ex.size(); ++i) {
    toks += (i ? "," : "") + ("\"" + ex.tokens[i] + "\"");
    pos += (i ? "," : "") + ("\"" + ex.pos_tags[i] + "\"");
    heads += (i ? "," : "") + std::to_string(ex.tree.head[i]);
    deprels += (i ? "," : "") + ("\"" + ex.tree.label[i] + "\"");
  }
  auto mention = [](const EntityMention& m) {
    return "{\"start\":" + std::to_string(m.start) +
           ",\"end\":" + std::to_string(m.end) + ",\"type\":\"" + m.type +
           "\"}";
  };
  return "{\"id\":\"" + ex.id + "\",\"tokens\":[" + toks + "],\"pos\":[" +
         pos + "],\"head\":[" + heads + "],\"deprel\":[" + deprels +
         "],\"e1\":" + mention(ex.m1) + ",\"e2\":" + mention(ex.m2) +
         ",\"label\":\"" + ex.label + "\"}";
}

}  // namespace

TEST_CASE("parse a two-record file") {
  auto ex = example5();
  TempFile f(record_json(ex) + "\n" + record_json(ex) + "\n");
  auto got = parse_dataset(f.path);
  CHECK(got.size() == 2);
  CHECK(got[0].id == "ex5");
  CHECK(got[0].tree.head == std::vector<std::size_t>{3, 3, 0, 5, 3});
}

TEST_CASE("mention ordering violation rejected") {
  auto ex = example5();
  ex.m1 = {1, 4, "drug"};  // e1 >= s2
  TempFile f(record_json(ex) + "\n");
  CHECK_THROWS_WITH_AS(parse_dataset(f.path),
                       doctest::Contains("mention ordering"),
                       std::invalid_argument);
}

TEST_CASE("two roots rejected with a tree diagnostic") {
  auto ex = example5();
  ex.tree.head = {3, 3, 0, 0, 3};
  TempFile f(record_json(ex) + "\n");
  CHECK_THROWS_WITH_AS(parse_dataset(f.path), doctest::Contains("tree"),
                       std::invalid_argument);
}

TEST_CASE("malformed line names its number") {
  TempFile f(record_json(example5()) + "\nnot json\n");
  CHECK_THROWS_WITH_AS(parse_dataset(f.path), doctest::Contains(":2:"),
                       std::runtime_error);
}

TEST_CASE("masking replaces mention spans with typed tokens") {
  auto masked = mask_entities(example5());
  CHECK(masked == std::vector<std::string>{"M1-drug", "can", "elevate",
                                           "M2-drug", "levels"});
}

TEST_CASE("multi-token mention masks every token and keeps length") {
  auto ex = example5();
  ex.m1 = {1, 2, "drug"};
  auto masked = mask_entities(ex);
  CHECK(masked.size() == 5);
  CHECK(masked[0] == "M1-drug");
  CHECK(masked[1] == "M1-drug");
  CHECK(masked[2] == "elevate");
}

TEST_CASE("vectorize shape and OOV behavior") {
  auto ex = example5();
  Vocabulary vocab = Vocabulary::build({ex});
  Rng rng(3);
  EmbeddingTable table = EmbeddingTable::init(vocab, 300, 30, nullptr, rng);
  Tensor v = vectorize(ex, vocab, table);
  CHECK(v.rows() == 5);
  CHECK(v.cols() == 330);

  auto oov = ex;
  oov.tokens[4] = "zzzunseen";
  Tensor v2 = vectorize(oov, vocab, table);
  std::size_t unk = vocab.word_index("definitely-not-in-vocab");
  CHECK(unk == vocab.word_index(Vocabulary::kUnknown));
  for (std::size_t c = 0; c < 300; ++c)
    CHECK(v2.at(4, c) == table.word.at(unk, c));
}

TEST_CASE("unknown POS tag is an error") {
  auto ex = example5();
  Vocabulary vocab = Vocabulary::build({ex});
  ex.pos_tags[0] = "XYZ";
  CHECK_THROWS_AS(vocab.encode_pos(ex), std::out_of_range);
}

TEST_CASE("pretrained rows are copied verbatim") {
  auto ex = example5();
  Vocabulary vocab = Vocabulary::build({ex});
  EmbeddingMap pre;
  pre["can"] = std::vector<double>(300, 0.25);
  Rng rng(4);
  EmbeddingTable table = EmbeddingTable::init(vocab, 300, 30, &pre, rng);
  Tensor v = vectorize(ex, vocab, table);
  for (std::size_t c = 0; c < 300; ++c) CHECK(v.at(1, c) == 0.25);
}

TEST_CASE("masking invariance: surface form inside spans is irrelevant") {
  auto ex = example5();
  Vocabulary vocab = Vocabulary::build({ex});
  Rng rng(5);
  EmbeddingTable table = EmbeddingTable::init(vocab, 20, 5, nullptr, rng);
  Tensor base = vectorize(ex, vocab, table);
  Rng mut(99);
  for (int i = 0; i < 100; ++i) {
    auto mutated = ex;
    mutated.tokens[0] = "surface" + std::to_string(mut.index(1000));
    mutated.tokens[3] = "other" + std::to_string(mut.index(1000));
    Tensor v = vectorize(mutated, vocab, table);
    CHECK(v.data() == base.data());
  }
}

TEST_CASE("masking is idempotent") {
  auto ex = example5();
  auto once = mask_entities(ex);
  auto twice_input = ex;
  twice_input.tokens = once;
  CHECK(mask_entities(twice_input) == once);
}

TEST_CASE("vocabulary indices form a dense bijection") {
  auto data = rex::testsupport::make_synthetic(40, 0.4, 7);
  Vocabulary vocab = Vocabulary::build(data);
  std::vector<bool> seen(vocab.word_count(), false);
  for (const auto& [w, idx] : vocab.words()) {
    CHECK(idx < vocab.word_count());
    CHECK_FALSE(seen[idx]);
    seen[idx] = true;
  }
}

TEST_CASE("embedding file round trip") {
  EmbeddingMap map;
  Rng rng(8);
  for (int i = 0; i < 3; ++i) {
    std::vector<double> v(4);
    for (double& x : v) x = rng.uniform(-1, 1);
    map["word" + std::to_string(i)] = v;
  }
  TempFile f("");
  save_embeddings(map, f.path);
  EmbeddingMap back = load_embeddings(f.path, 4);
  CHECK(back == map);
}

TEST_CASE("embedding dim mismatch errors name the line") {
  TempFile f("2 3\na 1 2 3\nb 1 2\n");
  CHECK_THROWS_WITH_AS(load_embeddings(f.path, 3), doctest::Contains(":3:"),
                       std::runtime_error);
  TempFile g("1 3\na 1 2 3\n");
  CHECK_THROWS_AS(load_embeddings(g.path, 300), std::runtime_error);
}

TEST_CASE("weighted sampler balances an 85%-negative set") {
  auto data = rex::testsupport::make_synthetic(200, 0.85, 21);
  WeightedSampler sampler(data, "no_relation", 42);
  std::size_t pos = 0;
  const std::size_t draws = 100000;
  for (std::size_t i = 0; i < draws; ++i)
    if (data[sampler.next()].label != "no_relation") ++pos;
  double frac = double(pos) / double(draws);
  CHECK(frac > 0.48);
  CHECK(frac < 0.52);
}

TEST_CASE("sampler is uniform within class (chi-square)") {
  auto data = rex::testsupport::make_synthetic(30, 0.5, 33);
  WeightedSampler sampler(data, "no_relation", 7);
  std::vector<std::size_t> counts(data.size(), 0);
  const std::size_t draws = 100000;
  for (std::size_t i = 0; i < draws; ++i) counts[sampler.next()]++;
  std::size_t npos = 0;
  for (const auto& ex : data)
    if (ex.label != "no_relation") ++npos;
  std::size_t nneg = data.size() - npos;
  // Expected per-example count within each class.
  double chi2 = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double expect = 0.5 * double(draws) /
                    double(data[i].label != "no_relation" ? npos : nneg);
    double d = double(counts[i]) - expect;
    chi2 += d * d / expect;
  }
  // dof = n-2; crude upper bound at alpha ~ 0.01 for dof <= 28.
  CHECK(chi2 < 2.0 * double(data.size()));
}

TEST_CASE("sampler streams are seed-deterministic") {
  auto data = rex::testsupport::make_synthetic(50, 0.5, 1);
  WeightedSampler a(data, "no_relation", 5);
  WeightedSampler b(data, "no_relation", 5);
  for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("single-class dataset rejected") {
  auto data = rex::testsupport::make_synthetic(20, 0.0, 2);
  CHECK_THROWS_WITH_AS(WeightedSampler(data, "no_relation", 1),
                       doctest::Contains("disable weighted sampling"),
                       std::invalid_argument);
}
