#include "gsr/common.hpp"

#include <cmath>
#include <limits>

namespace gsr {

Mat softmax_over_all(const Mat& log_weights) {
  const double hi = log_weights.maxCoeff();
  if (!std::isfinite(hi)) throw std::runtime_error("softmax over non-finite log-weights");
  Mat w = (log_weights.array() - hi).exp();
  const double total = w.sum();
  return w / total;
}

Mat softmax_rows(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (int r = 0; r < logits.rows(); ++r) {
    const double hi = logits.row(r).maxCoeff();
    if (!std::isfinite(hi)) throw std::runtime_error("softmax over non-finite logits");
    Eigen::RowVectorXd w = (logits.row(r).array() - hi).exp();
    out.row(r) = w / w.sum();
  }
  return out;
}

}  // namespace gsr
