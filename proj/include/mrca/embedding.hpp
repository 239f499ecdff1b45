#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "mrca/common.hpp"

namespace mrca {

// Immutable word -> vector table. Keys are lowercase; lookups lowercase the
// query. The boost constant v is the ceiling of the largest entry across
// the whole table and doubles as the magnitude of the case and entity
// feature columns.
class EmbeddingStore {
 public:
  // `source` holds one entry per line: token followed by d whitespace
  // separated reals. Duplicate tokens keep the first occurrence.
  static EmbeddingStore load(std::istream &source,
                             const std::string &source_name = "<stream>");
  static EmbeddingStore load_file(const std::string &path);

  int dim() const { return dim_; }
  double boost() const { return boost_; }
  std::size_t size() const { return vocab_.size(); }
  bool contains(const std::string &word) const;

  // In-vocabulary words return their stored vector. Out-of-vocabulary words
  // fall back to the mean of the single-character vectors of their
  // characters; words with no character hits map to the zero vector.
  Eigen::VectorXd lookup(const std::string &word) const;

 private:
  EmbeddingStore() = default;

  int dim_ = 0;
  double boost_ = 0.0;
  std::unordered_map<std::string, Eigen::VectorXd> vocab_;
  std::unordered_map<char, const Eigen::VectorXd *> char_table_;
};

// +v for an uppercase first character, -v otherwise (digits and punctuation
// included). Empty tokens are an error.
double case_feature(const std::string &word, const EmbeddingStore &store);

// +v inside any subject span, -v inside any object span, 0 elsewhere.
// A token covered by both kinds of span counts as a subject.
double entity_feature(int index, const std::vector<Span> &subjects,
                      const std::vector<Span> &objects,
                      const EmbeddingStore &store);

// Padded L x (d+2) feature matrix: word vector, case feature, entity
// feature per row; rows past valid_len are all-zero.
struct EncodedSentence {
  Eigen::MatrixXd features;
  int valid_len = 0;
};

EncodedSentence encode_sentence(const std::vector<std::string> &tokens,
                                const std::vector<Span> &subjects,
                                const std::vector<Span> &objects,
                                const EmbeddingStore &store, int padded_len = 100);

std::string lowercase_ascii(const std::string &s);

}  // namespace mrca
