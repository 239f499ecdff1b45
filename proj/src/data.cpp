#include "mrca/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mrca {

using nlohmann::json;

SplitId split_from_string(const std::string &name) {
  if (name == "train") return SplitId::train;
  if (name == "validation" || name == "valid" || name == "dev")
    return SplitId::validation;
  if (name == "test") return SplitId::test;
  throw DataError("unknown split: " + name);
}

std::string to_string(SplitId split) {
  switch (split) {
    case SplitId::train: return "train";
    case SplitId::validation: return "validation";
    case SplitId::test: return "test";
  }
  return "?";
}

const std::vector<LabeledExample> &Dataset::split(SplitId id) const {
  switch (id) {
    case SplitId::train: return train;
    case SplitId::validation: return validation;
    case SplitId::test: return test;
  }
  throw DataError("bad split id");
}

CorpusFormat corpus_format_from_string(const std::string &name) {
  if (name == "copyre-json") return CorpusFormat::copyre_json;
  if (name == "canonical-jsonl") return CorpusFormat::canonical_jsonl;
  throw DataError("unknown corpus format: " + name);
}

namespace {

std::vector<std::string> whitespace_tokens(const std::string &text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

// Pre-vocabulary record: relations still by name.
struct RawExample {
  std::vector<std::string> tokens;
  std::vector<Span> subjects;
  std::vector<Span> objects;
  std::set<std::string> relations;
};

void sort_spans(std::vector<Span> &spans) {
  std::sort(spans.begin(), spans.end());
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
}

// First exact token-sequence occurrence of `entity` in `tokens`.
bool find_span(const std::vector<std::string> &tokens,
               const std::vector<std::string> &entity, Span &out) {
  if (entity.empty() || entity.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + entity.size() <= tokens.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < entity.size(); ++j) {
      if (tokens[i + j] != entity[j]) {
        match = false;
        break;
      }
    }
    if (match) {
      out = Span{static_cast<int>(i), static_cast<int>(i + entity.size())};
      return true;
    }
  }
  return false;
}

bool is_null_relation(const std::string &label) {
  return label.empty() || label == "None" || label == "NA";
}

// One json record per line; a file that is a single top-level array is
// accepted too.
std::vector<json> read_records(std::istream &in, const std::string &where) {
  std::vector<json> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (records.empty() && line[first] == '[') {
      // whole-file array: slurp the rest
      std::ostringstream rest;
      rest << line << '\n' << in.rdbuf();
      json doc;
      try {
        doc = json::parse(rest.str());
      } catch (const json::exception &e) {
        throw DataError(where + ": invalid JSON array: " + e.what());
      }
      if (!doc.is_array()) throw DataError(where + ": expected array");
      for (auto &item : doc) records.push_back(std::move(item));
      return records;
    }
    try {
      records.push_back(json::parse(line));
    } catch (const json::exception &e) {
      throw DataError(where + ": record " + std::to_string(line_no) +
                      ": invalid JSON: " + e.what());
    }
  }
  return records;
}

std::vector<RawExample> parse_copyre(std::istream &in, const std::string &where,
                                     std::size_t &skipped_entity,
                                     std::size_t &skipped_no_rel) {
  std::vector<RawExample> out;
  std::size_t index = 0;
  for (const json &rec : read_records(in, where)) {
    ++index;
    const std::string at = where + ": record " + std::to_string(index);
    if (!rec.is_object() || !rec.contains("sentText") ||
        !rec.contains("relationMentions")) {
      throw DataError(at + ": expected sentText and relationMentions fields");
    }
    if (!rec["sentText"].is_string() || !rec["relationMentions"].is_array()) {
      throw DataError(at + ": malformed sentText/relationMentions");
    }
    RawExample ex;
    ex.tokens = whitespace_tokens(rec["sentText"].get<std::string>());
    if (ex.tokens.empty()) throw DataError(at + ": empty sentence");

    bool entity_missing = false;
    for (const json &mention : rec["relationMentions"]) {
      if (!mention.is_object() || !mention.contains("em1Text") ||
          !mention.contains("em2Text") || !mention.contains("label")) {
        throw DataError(at + ": malformed relation mention");
      }
      const std::string label = mention["label"].get<std::string>();
      if (is_null_relation(label)) continue;
      Span subj, obj;
      if (!find_span(ex.tokens,
                     whitespace_tokens(mention["em1Text"].get<std::string>()),
                     subj) ||
          !find_span(ex.tokens,
                     whitespace_tokens(mention["em2Text"].get<std::string>()),
                     obj)) {
        entity_missing = true;
        break;
      }
      ex.subjects.push_back(subj);
      ex.objects.push_back(obj);
      ex.relations.insert(label);
    }
    if (entity_missing) {
      ++skipped_entity;
      continue;
    }
    if (ex.relations.empty()) {
      ++skipped_no_rel;
      continue;
    }
    sort_spans(ex.subjects);
    sort_spans(ex.objects);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Span> parse_span_list(const json &list, std::size_t n_tokens,
                                  const std::string &at) {
  if (!list.is_array()) throw DataError(at + ": span list must be an array");
  std::vector<Span> spans;
  for (const json &pair : list) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
        !pair[1].is_number_integer()) {
      throw DataError(at + ": spans must be [start, end] integer pairs");
    }
    Span s{pair[0].get<int>(), pair[1].get<int>()};
    if (s.start < 0 || s.end <= s.start ||
        s.end > static_cast<int>(n_tokens)) {
      throw DataError(at + ": span [" + std::to_string(s.start) + ", " +
                      std::to_string(s.end) + ") out of range for " +
                      std::to_string(n_tokens) + " tokens");
    }
    spans.push_back(s);
  }
  sort_spans(spans);
  return spans;
}

std::vector<RawExample> parse_canonical(std::istream &in,
                                        const std::string &where,
                                        std::size_t &skipped_no_rel) {
  std::vector<RawExample> out;
  std::size_t index = 0;
  for (const json &rec : read_records(in, where)) {
    ++index;
    const std::string at = where + ": record " + std::to_string(index);
    if (!rec.is_object() || !rec.contains("tokens") ||
        !rec.contains("subjects") || !rec.contains("objects") ||
        !rec.contains("relations")) {
      throw DataError(at + ": expected tokens/subjects/objects/relations");
    }
    RawExample ex;
    if (!rec["tokens"].is_array() || rec["tokens"].empty()) {
      throw DataError(at + ": tokens must be a non-empty array");
    }
    for (const json &tok : rec["tokens"]) {
      if (!tok.is_string()) throw DataError(at + ": tokens must be strings");
      ex.tokens.push_back(tok.get<std::string>());
    }
    ex.subjects = parse_span_list(rec["subjects"], ex.tokens.size(), at);
    ex.objects = parse_span_list(rec["objects"], ex.tokens.size(), at);
    if (!rec["relations"].is_array()) {
      throw DataError(at + ": relations must be an array");
    }
    for (const json &rel : rec["relations"]) {
      if (!rel.is_string()) throw DataError(at + ": relations must be strings");
      ex.relations.insert(rel.get<std::string>());
    }
    if (ex.relations.empty()) {
      ++skipped_no_rel;
      continue;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

Dataset import_corpus(std::istream &train, std::istream &validation,
                      std::istream &test, CorpusFormat format,
                      const std::string &name) {
  Dataset ds;
  ds.name = name;

  std::vector<RawExample> raw[3];
  std::istream *streams[3] = {&train, &validation, &test};
  const char *split_names[3] = {"train", "validation", "test"};
  for (int s = 0; s < 3; ++s) {
    if (format == CorpusFormat::copyre_json) {
      raw[s] = parse_copyre(*streams[s], split_names[s],
                            ds.skipped_entity_not_found, ds.skipped_no_relation);
    } else {
      raw[s] = parse_canonical(*streams[s], split_names[s],
                               ds.skipped_no_relation);
    }
  }

  std::set<std::string> vocab;
  for (const auto &split : raw) {
    for (const auto &ex : split) {
      vocab.insert(ex.relations.begin(), ex.relations.end());
    }
  }
  ds.relation_vocab.assign(vocab.begin(), vocab.end());

  auto binarize = [&](std::vector<RawExample> &src,
                      std::vector<LabeledExample> &dst) {
    dst.reserve(src.size());
    for (auto &ex : src) {
      LabeledExample out;
      out.tokens = std::move(ex.tokens);
      out.subjects = std::move(ex.subjects);
      out.objects = std::move(ex.objects);
      out.labels.assign(ds.relation_vocab.size(), 0);
      for (const auto &rel : ex.relations) {
        auto it = std::lower_bound(ds.relation_vocab.begin(),
                                   ds.relation_vocab.end(), rel);
        out.labels[static_cast<std::size_t>(it - ds.relation_vocab.begin())] = 1;
      }
      dst.push_back(std::move(out));
    }
  };
  binarize(raw[0], ds.train);
  binarize(raw[1], ds.validation);
  binarize(raw[2], ds.test);
  return ds;
}

Dataset import_corpus_files(const std::string &train_path,
                            const std::string &validation_path,
                            const std::string &test_path, CorpusFormat format,
                            const std::string &name) {
  std::ifstream tr(train_path), va(validation_path), te(test_path);
  if (!tr) throw DataError("cannot open " + train_path);
  if (!va) throw DataError("cannot open " + validation_path);
  if (!te) throw DataError("cannot open " + test_path);
  return import_corpus(tr, va, te, format, name);
}

std::size_t export_canonical(const std::vector<LabeledExample> &examples,
                             const std::vector<std::string> &relation_vocab,
                             std::ostream &sink) {
  std::size_t count = 0;
  for (const auto &ex : examples) {
    json rec;
    rec["tokens"] = ex.tokens;
    rec["subjects"] = json::array();
    for (const Span &s : ex.subjects) rec["subjects"].push_back({s.start, s.end});
    rec["objects"] = json::array();
    for (const Span &s : ex.objects) rec["objects"].push_back({s.start, s.end});
    rec["relations"] = json::array();
    for (std::size_t i = 0; i < ex.labels.size(); ++i) {
      if (ex.labels[i]) rec["relations"].push_back(relation_vocab[i]);
    }
    sink << rec.dump() << '\n';
    ++count;
  }
  if (!sink) throw DataError("export_canonical: write failure");
  return count;
}

void export_canonical_dir(const Dataset &ds, const std::string &dir) {
  for (SplitId id : {SplitId::train, SplitId::validation, SplitId::test}) {
    const std::string path = dir + "/" + to_string(id) + ".jsonl";
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    export_canonical(ds.split(id), ds.relation_vocab, out);
  }
}

namespace {

SplitStats stats_over(const std::vector<const LabeledExample *> &examples) {
  SplitStats s;
  s.sentences = examples.size();
  if (examples.empty()) return s;
  double sum = 0.0, sum_sq = 0.0;
  std::size_t three_plus = 0;
  for (const auto *ex : examples) {
    double positives = 0;
    for (auto l : ex->labels) positives += l;
    sum += positives;
    sum_sq += positives * positives;
    if (positives >= 3) ++three_plus;
  }
  const double n = static_cast<double>(examples.size());
  s.mean_positives = sum / n;
  s.stdev_positives = std::sqrt(std::max(0.0, sum_sq / n - s.mean_positives * s.mean_positives));
  s.frac_three_plus = static_cast<double>(three_plus) / n;
  return s;
}

std::vector<const LabeledExample *> pointers(const std::vector<LabeledExample> &v) {
  std::vector<const LabeledExample *> out;
  out.reserve(v.size());
  for (const auto &ex : v) out.push_back(&ex);
  return out;
}

}  // namespace

DatasetStats dataset_stats(const Dataset &ds) {
  DatasetStats st;
  st.n_relations = ds.relation_vocab.size();
  st.train = stats_over(pointers(ds.train));
  st.validation = stats_over(pointers(ds.validation));
  st.test = stats_over(pointers(ds.test));
  auto all = pointers(ds.train);
  for (const auto &ex : ds.validation) all.push_back(&ex);
  for (const auto &ex : ds.test) all.push_back(&ex);
  st.all = stats_over(all);
  return st;
}

void print_stats(const Dataset &ds, const DatasetStats &stats,
                 std::ostream &out) {
  out << "Dataset: " << ds.name << "\n";
  out << "Relations: " << stats.n_relations << "\n";
  auto row = [&](const char *label, const SplitStats &s) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s %8zu  avg %.2f  stdev %.2f  3+ %.2f%%",
                  label, s.sentences, s.mean_positives, s.stdev_positives,
                  s.frac_three_plus * 100.0);
    out << buf << "\n";
  };
  row("train", stats.train);
  row("validation", stats.validation);
  row("test", stats.test);
  row("all", stats.all);
  out << "Skipped records: " << ds.skipped_records()
      << " (entity not found: " << ds.skipped_entity_not_found
      << ", no relation: " << ds.skipped_no_relation << ")\n";
}

std::vector<std::vector<std::size_t>> batch_iter(std::size_t n_examples,
                                                 std::size_t batch_size,
                                                 std::uint64_t seed) {
  if (n_examples == 0) throw DataError("batch_iter: empty split");
  if (batch_size == 0) throw DataError("batch_iter: batch size must be positive");
  std::vector<std::size_t> order(n_examples);
  for (std::size_t i = 0; i < n_examples; ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0xBA7C4));
  for (std::size_t i = n_examples - 1; i > 0; --i) {
    std::size_t j = rng.below(i + 1);
    std::swap(order[i], order[j]);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n_examples; start += batch_size) {
    const std::size_t end = std::min(n_examples, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace mrca
