#include "mrca/loss.hpp"

#include <algorithm>
#include <cmath>

namespace mrca {

namespace {
constexpr double kBceEps = 1e-12;
}

LossKind loss_kind_from_string(const std::string &name) {
  if (name == "rc_dice") return LossKind::rc_dice;
  if (name == "dice") return LossKind::dice;
  if (name == "bce_sigmoid") return LossKind::bce_sigmoid;
  throw DataError("unknown loss kind: " + name);
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::rc_dice: return "rc_dice";
    case LossKind::dice: return "dice";
    case LossKind::bce_sigmoid: return "bce_sigmoid";
  }
  return "?";
}

double dice_loss(double y, double p, double gamma) {
  return 1.0 - (2.0 * p * y + gamma) / (p * p + y * y + gamma);
}

double dice_grad(double y, double p, double gamma) {
  const double den = p * p + y * y + gamma;
  return (2.0 * p * (2.0 * p * y + gamma) - 2.0 * y * den) / (den * den);
}

double rc_dice_loss(double y, double p, double gamma) {
  if (y == 0.0 && p < 0.5) {
    return (gamma * gamma) / (p * p + y * y + gamma);
  }
  return dice_loss(y, p, gamma);
}

double rc_dice_grad(double y, double p, double gamma) {
  if (y == 0.0 && p < 0.5) {
    const double den = p * p + gamma;
    return -2.0 * p * gamma * gamma / (den * den);
  }
  return dice_grad(y, p, gamma);
}

double bce_loss(double y, double q) {
  q = std::clamp(q, kBceEps, 1.0 - kBceEps);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

double bce_grad(double y, double q) {
  q = std::clamp(q, kBceEps, 1.0 - kBceEps);
  return -y / q + (1.0 - y) / (1.0 - q);
}

BatchLoss batch_loss(const Eigen::MatrixXd &labels,
                     const Eigen::MatrixXd &scores, const LossConfig &cfg) {
  if (labels.rows() != scores.rows() || labels.cols() != scores.cols()) {
    throw DataError("batch_loss: label matrix " +
                    std::to_string(labels.rows()) + "x" +
                    std::to_string(labels.cols()) + " vs prediction matrix " +
                    std::to_string(scores.rows()) + "x" +
                    std::to_string(scores.cols()));
  }
  BatchLoss out;
  out.grad.setZero(scores.rows(), scores.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      const double y = labels(i, j);
      const double p = scores(i, j);
      switch (cfg.kind) {
        case LossKind::rc_dice:
          total += rc_dice_loss(y, p, cfg.gamma);
          out.grad(i, j) = rc_dice_grad(y, p, cfg.gamma);
          break;
        case LossKind::dice:
          total += dice_loss(y, p, cfg.gamma);
          out.grad(i, j) = dice_grad(y, p, cfg.gamma);
          break;
        case LossKind::bce_sigmoid: {
          const double q = sigmoid(p);
          total += bce_loss(y, q);
          out.grad(i, j) = q - y;  // d bce(y, sigmoid(p)) / dp
          break;
        }
      }
    }
  }
  const auto cells = static_cast<double>(scores.size());
  if (cfg.reduction == Reduction::mean && cells > 0) {
    out.value = total / cells;
    out.grad /= cells;
  } else {
    out.value = total;
  }
  return out;
}

}  // namespace mrca
