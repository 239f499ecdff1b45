#include "mrca/embedding.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace mrca {

std::string lowercase_ascii(const std::string &s) {
  std::string out = s;
  for (char &c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

EmbeddingStore EmbeddingStore::load(std::istream &source,
                                    const std::string &source_name) {
  EmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;
  double max_entry = -std::numeric_limits<double>::infinity();
  while (std::getline(source, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<double> values;
    double x;
    while (fields >> x) values.push_back(x);
    if (token.empty() || values.empty()) {
      throw DataError(source_name + ":" + std::to_string(line_no) +
                      ": malformed embedding entry");
    }
    if (store.dim_ == 0) {
      store.dim_ = static_cast<int>(values.size());
    } else if (static_cast<int>(values.size()) != store.dim_) {
      throw DataError(source_name + ":" + std::to_string(line_no) +
                      ": expected " + std::to_string(store.dim_) +
                      " values, got " + std::to_string(values.size()));
    }
    token = lowercase_ascii(token);
    if (store.vocab_.count(token)) continue;  // first occurrence wins
    Eigen::VectorXd vec(store.dim_);
    for (int i = 0; i < store.dim_; ++i) {
      vec[i] = values[static_cast<std::size_t>(i)];
      if (vec[i] > max_entry) max_entry = vec[i];
    }
    store.vocab_.emplace(std::move(token), std::move(vec));
  }
  if (store.vocab_.empty()) {
    throw DataError(source_name + ": no embedding entries");
  }
  store.boost_ = std::ceil(max_entry);
  for (const auto &[word, vec] : store.vocab_) {
    if (word.size() == 1) store.char_table_.emplace(word[0], &vec);
  }
  return store;
}

EmbeddingStore EmbeddingStore::load_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);
  return load(in, path);
}

bool EmbeddingStore::contains(const std::string &word) const {
  return vocab_.count(lowercase_ascii(word)) > 0;
}

Eigen::VectorXd EmbeddingStore::lookup(const std::string &word) const {
  const std::string key = lowercase_ascii(word);
  auto it = vocab_.find(key);
  if (it != vocab_.end()) return it->second;

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim_);
  int hits = 0;
  for (char c : key) {
    auto ct = char_table_.find(c);
    if (ct != char_table_.end()) {
      sum += *ct->second;
      ++hits;
    }
  }
  if (hits > 0) sum /= static_cast<double>(hits);
  return sum;
}

double case_feature(const std::string &word, const EmbeddingStore &store) {
  if (word.empty()) throw DataError("case_feature: empty token");
  const bool upper = std::isupper(static_cast<unsigned char>(word[0])) != 0;
  return upper ? store.boost() : -store.boost();
}

double entity_feature(int index, const std::vector<Span> &subjects,
                      const std::vector<Span> &objects,
                      const EmbeddingStore &store) {
  for (const Span &s : subjects) {
    if (s.contains(index)) return store.boost();
  }
  for (const Span &s : objects) {
    if (s.contains(index)) return -store.boost();
  }
  return 0.0;
}

EncodedSentence encode_sentence(const std::vector<std::string> &tokens,
                                const std::vector<Span> &subjects,
                                const std::vector<Span> &objects,
                                const EmbeddingStore &store, int padded_len) {
  if (tokens.empty()) throw DataError("encode_sentence: empty token list");
  const int d = store.dim();
  EncodedSentence enc;
  enc.features.setZero(padded_len, d + 2);
  enc.valid_len = std::min<int>(static_cast<int>(tokens.size()), padded_len);
  for (int i = 0; i < enc.valid_len; ++i) {
    const std::string &tok = tokens[static_cast<std::size_t>(i)];
    enc.features.row(i).head(d) = store.lookup(tok).transpose();
    enc.features(i, d) = case_feature(tok, store);
    enc.features(i, d + 1) = entity_feature(i, subjects, objects, store);
  }
  return enc;
}

}  // namespace mrca
