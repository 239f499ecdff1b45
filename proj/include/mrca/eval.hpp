#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "mrca/common.hpp"

namespace mrca {

// Micro-averaged counts and metrics over (example, relation) cells.
// Zero-denominator cases report 0 rather than NaN.
struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t n_examples = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

EvalReport micro_prf(const Eigen::MatrixXd &predictions,
                     const Eigen::MatrixXd &gold);

// Streaming accumulator so large splits need not materialize full matrices.
class MicroCounts {
 public:
  void add(const Eigen::ArrayXd &predicted, const Eigen::ArrayXd &gold);
  EvalReport report() const;

 private:
  std::size_t tp_ = 0, fp_ = 0, fn_ = 0, n_ = 0;
};

struct MetricStats {
  double mean_precision = 0.0, stdev_precision = 0.0;
  double mean_recall = 0.0, stdev_recall = 0.0;
  double mean_f1 = 0.0, stdev_f1 = 0.0;
  std::size_t n_runs = 0;
};

// Mean and sample (n-1) standard deviation of P/R/F1 across runs.
MetricStats aggregate_runs(const std::vector<EvalReport> &reports);

// "96.65_{0.17}" style a-la subscripted score tables (values in percent).
std::string format_mean_stdev(double mean, double stdev);

}  // namespace mrca
