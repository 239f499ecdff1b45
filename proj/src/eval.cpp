#include "mrca/eval.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace mrca {

namespace {

EvalReport finish(std::size_t tp, std::size_t fp, std::size_t fn,
                  std::size_t n) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.n_examples = n;
  r.precision = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
  r.recall = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
  r.f1 = (r.precision + r.recall > 0.0)
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

}  // namespace

EvalReport micro_prf(const Eigen::MatrixXd &predictions,
                     const Eigen::MatrixXd &gold) {
  if (predictions.rows() != gold.rows() || predictions.cols() != gold.cols()) {
    throw DataError("micro_prf: prediction matrix " +
                    std::to_string(predictions.rows()) + "x" +
                    std::to_string(predictions.cols()) + " vs gold " +
                    std::to_string(gold.rows()) + "x" +
                    std::to_string(gold.cols()));
  }
  MicroCounts counts;
  for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
    counts.add(predictions.row(i).array(), gold.row(i).array());
  }
  return counts.report();
}

void MicroCounts::add(const Eigen::ArrayXd &predicted,
                      const Eigen::ArrayXd &gold) {
  if (predicted.size() != gold.size()) {
    throw DataError("micro counts: row length mismatch");
  }
  for (Eigen::Index j = 0; j < predicted.size(); ++j) {
    const bool p = predicted[j] != 0.0;
    const bool g = gold[j] != 0.0;
    if (p && g) ++tp_;
    else if (p && !g) ++fp_;
    else if (!p && g) ++fn_;
  }
  ++n_;
}

EvalReport MicroCounts::report() const { return finish(tp_, fp_, fn_, n_); }

MetricStats aggregate_runs(const std::vector<EvalReport> &reports) {
  if (reports.empty()) throw DataError("aggregate_runs: no reports");
  MetricStats s;
  s.n_runs = reports.size();
  const double n = static_cast<double>(reports.size());
  for (const auto &r : reports) {
    s.mean_precision += r.precision;
    s.mean_recall += r.recall;
    s.mean_f1 += r.f1;
  }
  s.mean_precision /= n;
  s.mean_recall /= n;
  s.mean_f1 /= n;
  if (reports.size() > 1) {
    double vp = 0, vr = 0, vf = 0;
    for (const auto &r : reports) {
      vp += (r.precision - s.mean_precision) * (r.precision - s.mean_precision);
      vr += (r.recall - s.mean_recall) * (r.recall - s.mean_recall);
      vf += (r.f1 - s.mean_f1) * (r.f1 - s.mean_f1);
    }
    s.stdev_precision = std::sqrt(vp / (n - 1.0));
    s.stdev_recall = std::sqrt(vr / (n - 1.0));
    s.stdev_f1 = std::sqrt(vf / (n - 1.0));
  }
  return s;
}

std::string format_mean_stdev(double mean, double stdev) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f_{%.2f}", mean * 100.0, stdev * 100.0);
  return buf;
}

}  // namespace mrca
