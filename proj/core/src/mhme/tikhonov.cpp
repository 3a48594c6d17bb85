#include "csmc/mhme/tikhonov.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <string>

#include "csmc/error.hpp"

namespace csmc::mhme {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A = Phi H^T, M_B x K.
Eigen::MatrixXd projected_hypotheses(const sensing::OperatorView& view, const HypothesisSet& hypotheses) {
  const auto& phi = view.matrix();
  const auto& h = hypotheses.rows;
  if (h.rank() != 2 || h.dim(1) != phi.dim(1)) {
    throw DimensionError("hypotheses " + diff::to_string(h.shape()) + " do not match operator " +
                         diff::to_string(phi.shape()));
  }
  const Eigen::Map<const RowMatrix> phi_m(phi.data().data(), static_cast<Eigen::Index>(phi.dim(0)),
                                         static_cast<Eigen::Index>(phi.dim(1)));
  const Eigen::Map<const RowMatrix> h_m(h.data().data(), static_cast<Eigen::Index>(h.dim(0)),
                                       static_cast<Eigen::Index>(h.dim(1)));
  return phi_m * h_m.transpose();
}

}  // namespace

TikhonovSolution tikhonov_solve(std::span<const double> y, const sensing::OperatorView& view,
                                const HypothesisSet& hypotheses, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("Tikhonov lambda must be non-negative");
  if (y.size() != view.rows()) {
    throw DimensionError("measurement vector of length " + std::to_string(y.size()) + " for an operator with " +
                         std::to_string(view.rows()) + " rows");
  }
  const Eigen::MatrixXd a = projected_hypotheses(view, hypotheses);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double s_max = s.size() ? s(0) : 0.0;
  const double tol =
      static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<double>::epsilon() * s_max;

  const Eigen::VectorXd uty = svd.matrixU().transpose() * yv;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(a.cols());
  TikhonovSolution out;
  double s_min_kept = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= tol) continue;
    const double gain = s(i) / (s(i) * s(i) + lambda);
    w += gain * uty(i) * svd.matrixV().col(i);
    ++out.rank;
    s_min_kept = s(i);
  }
  out.condition = out.rank ? s_max / s_min_kept : std::numeric_limits<double>::infinity();
  out.weights.assign(w.data(), w.data() + w.size());
  return out;
}

double tikhonov_objective(std::span<const double> y, const sensing::OperatorView& view,
                          const HypothesisSet& hypotheses, std::span<const double> weights, double lambda) {
  const Eigen::MatrixXd a = projected_hypotheses(view, hypotheses);
  if (static_cast<Eigen::Index>(weights.size()) != a.cols() || static_cast<Eigen::Index>(y.size()) != a.rows()) {
    throw DimensionError("Tikhonov objective: inconsistent lengths");
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), a.rows());
  const Eigen::Map<const Eigen::VectorXd> wv(weights.data(), a.cols());
  return (yv - a * wv).squaredNorm() + lambda * wv.squaredNorm();
}

}  // namespace csmc::mhme
