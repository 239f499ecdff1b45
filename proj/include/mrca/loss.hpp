#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "mrca/common.hpp"

namespace mrca {

enum class LossKind { rc_dice, dice, bce_sigmoid };
enum class Reduction { mean, sum };

LossKind loss_kind_from_string(const std::string &name);
std::string to_string(LossKind kind);

struct LossConfig {
  double gamma = 1e-6;
  Reduction reduction = Reduction::mean;
  LossKind kind = LossKind::rc_dice;
};

// Dice loss for one (label, prediction) cell:
//   1 - (2*p*y + gamma) / (p^2 + y^2 + gamma)
double dice_loss(double y, double p, double gamma);
double dice_grad(double y, double p, double gamma);

// Dice loss with the correctly-predicted-negative branch: when y = 0 and
// p < 0.5 (strict), the loss collapses to gamma^2 / (p^2 + y^2 + gamma),
// at most gamma, so confident negatives stop dominating the objective.
// The function is discontinuous at (y=0, p=0.5); p = 0.5 exactly takes the
// plain dice branch.
double rc_dice_loss(double y, double p, double gamma);
double rc_dice_grad(double y, double p, double gamma);

// Binary cross entropy on a probability q, clamped to [1e-12, 1 - 1e-12].
double bce_loss(double y, double q);
double bce_grad(double y, double q);

struct BatchLoss {
  double value = 0.0;
  Eigen::MatrixXd grad;  // dLoss/dPred, same shape as the prediction matrix
};

// Per-element loss over a batch of label rows and raw score rows, reduced
// by mean (default) or sum over all (sample, relation) cells. For
// bce_sigmoid the scores pass through a sigmoid before the cross entropy
// and the returned gradient is with respect to the raw scores.
BatchLoss batch_loss(const Eigen::MatrixXd &labels,
                     const Eigen::MatrixXd &scores, const LossConfig &cfg);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace mrca
