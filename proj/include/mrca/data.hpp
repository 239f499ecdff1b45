#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrca/common.hpp"

namespace mrca {

// One sentence with all of its gold entity spans and the binary label
// vector over the owning dataset's relation vocabulary.
struct LabeledExample {
  std::vector<std::string> tokens;
  std::vector<Span> subjects;  // sorted, deduplicated
  std::vector<Span> objects;
  std::vector<std::uint8_t> labels;

  friend bool operator==(const LabeledExample &, const LabeledExample &) = default;
};

enum class SplitId { train, validation, test };
SplitId split_from_string(const std::string &name);
std::string to_string(SplitId split);

struct Dataset {
  std::string name;
  std::vector<std::string> relation_vocab;  // lexicographic, defines indices
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> validation;
  std::vector<LabeledExample> test;
  std::size_t skipped_entity_not_found = 0;
  std::size_t skipped_no_relation = 0;

  const std::vector<LabeledExample> &split(SplitId id) const;
  std::size_t skipped_records() const {
    return skipped_entity_not_found + skipped_no_relation;
  }
};

enum class CorpusFormat { copyre_json, canonical_jsonl };
CorpusFormat corpus_format_from_string(const std::string &name);

// Reads three split streams in the named format. The relation vocabulary is
// the sorted union over all splits; each sentence becomes one example whose
// positive labels, subject spans and object spans are the unions over its
// triples. Sentences whose entities cannot be located, or with no usable
// relation, are skipped and counted.
Dataset import_corpus(std::istream &train, std::istream &validation,
                      std::istream &test, CorpusFormat format,
                      const std::string &name = "corpus");

Dataset import_corpus_files(const std::string &train_path,
                            const std::string &validation_path,
                            const std::string &test_path, CorpusFormat format,
                            const std::string &name = "corpus");

// Line-delimited records: {"tokens": [...], "subjects": [[s,e],...],
// "objects": [[s,e],...], "relations": [...]}. Round-trips losslessly
// through import_corpus.
std::size_t export_canonical(const std::vector<LabeledExample> &examples,
                             const std::vector<std::string> &relation_vocab,
                             std::ostream &sink);
void export_canonical_dir(const Dataset &ds, const std::string &dir);

struct SplitStats {
  std::size_t sentences = 0;
  double mean_positives = 0.0;
  double stdev_positives = 0.0;  // population stdev
  double frac_three_plus = 0.0;
};

struct DatasetStats {
  std::size_t n_relations = 0;
  SplitStats train, validation, test;
  SplitStats all;  // every split combined
};

DatasetStats dataset_stats(const Dataset &ds);
void print_stats(const Dataset &ds, const DatasetStats &stats, std::ostream &out);

// Deterministic shuffle of [0, n) under the seed, then consecutive chunks
// of batch_size; the final partial batch is retained.
std::vector<std::vector<std::size_t>> batch_iter(std::size_t n_examples,
                                                 std::size_t batch_size,
                                                 std::uint64_t seed);

}  // namespace mrca
