// SPDX-License-Identifier: Apache-2.0

#include "mvgeo/training.hpp"

#include <cmath>

#include "mvgeo/errors.hpp"

namespace mvgeo {

void ProjectionWeights::validate() const {
  if (w_in.rows() < 1 || w_in.cols() < 1)
    throw ValidationError("weights: w_in must be nonempty");
  if (b_in.size() != w_in.cols())
    throw ValidationError("weights: b_in must have C_t entries");
  if (w_out.rows() != w_in.cols())
    throw ValidationError("weights: w_out must have C_t rows");
  if (b_out.size() != w_out.cols())
    throw ValidationError("weights: b_out must have C_v entries");
  if (!w_in.allFinite() || !b_in.allFinite() || !w_out.allFinite() ||
      !b_out.allFinite())
    throw ValidationError("weights: entries must be finite");
}

ExtendedProjectionWeights extend_projections(const ProjectionWeights& w) {
  w.validate();
  const auto cv = w.w_in.rows();
  const auto ct = w.w_in.cols();
  const auto cv_out = w.w_out.cols();

  ExtendedProjectionWeights ext;
  ext.w_in_plus = Eigen::MatrixXd::Zero(2 * cv, ct);
  ext.w_in_plus.topRows(cv) = w.w_in;
  ext.b_in_plus = w.b_in;
  ext.w_out_plus.resize(ct, 2 * cv_out);
  ext.w_out_plus.leftCols(cv_out) = w.w_out;
  ext.w_out_plus.rightCols(cv_out) = w.w_out;
  ext.b_out_plus.resize(2 * cv_out);
  ext.b_out_plus.head(cv_out) = w.b_out;
  ext.b_out_plus.tail(cv_out) = w.b_out;
  return ext;
}

namespace {

// Fixed-order matvec: out[c] = b[c] + sum_k latent[k] * w(k, c). Both the
// original and the extended forward pass go through this exact loop, which
// is what makes the zero-row and copied-column invariants hold bitwise.
Eigen::VectorXd affine_rowvec(const Eigen::VectorXd& latent,
                              const Eigen::MatrixXd& w,
                              const Eigen::VectorXd& b) {
  Eigen::VectorXd out(w.cols());
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    double acc = b(c);
    for (Eigen::Index k = 0; k < w.rows(); ++k) acc += latent(k) * w(k, c);
    out(c) = acc;
  }
  return out;
}

}  // namespace

Eigen::VectorXd toy_forward(const ProjectionWeights& w,
                            const Eigen::VectorXd& latent) {
  if (latent.size() != w.w_in.rows())
    throw ValidationError("toy_forward: latent dimension mismatch");
  const Eigen::VectorXd token = affine_rowvec(latent, w.w_in, w.b_in);
  return affine_rowvec(token, w.w_out, w.b_out);
}

Eigen::VectorXd toy_forward(const ExtendedProjectionWeights& w,
                            const Eigen::VectorXd& latent) {
  if (latent.size() != w.w_in_plus.rows())
    throw ValidationError("toy_forward: latent dimension mismatch");
  const Eigen::VectorXd token = affine_rowvec(latent, w.w_in_plus, w.b_in_plus);
  return affine_rowvec(token, w.w_out_plus, w.b_out_plus);
}

double NoiseSchedule::at(int t) const {
  if (t < 1 || t > steps())
    throw ValidationError("schedule: timestep out of range");
  return alpha_bar[static_cast<size_t>(t)];
}

double NoiseSchedule::alpha(int t) const {
  const double prev = alpha_bar[static_cast<size_t>(t) - 1];
  return prev > 0.0 ? at(t) / prev : 0.0;
}

NoiseSchedule NoiseSchedule::linear_alpha_bar(int steps) {
  if (steps < 1) throw ValidationError("schedule: steps must be >= 1");
  NoiseSchedule s;
  s.alpha_bar.resize(static_cast<size_t>(steps) + 1);
  for (int t = 0; t <= steps; ++t)
    s.alpha_bar[static_cast<size_t>(t)] = 1.0 - static_cast<double>(t) / steps;
  return s;
}

void NoiseSchedule::validate() const {
  if (alpha_bar.empty() || alpha_bar.front() != 1.0)
    throw ValidationError("schedule: alpha_bar[0] must be 1");
  for (size_t t = 1; t < alpha_bar.size(); ++t) {
    const double a = alpha_bar[t];
    if (!(a >= 0.0 && a <= alpha_bar[t - 1]))
      throw ValidationError("schedule: alpha_bar must be non-increasing in [0, 1]");
  }
}

void LossWeights::validate() const {
  if (!(alpha_ramp > 0.0))
    throw ValidationError("loss weights: alpha_ramp must be > 0");
  if (!(lambda_geo >= 0.0))
    throw ValidationError("loss weights: lambda_geo must be >= 0");
}

double lambda_depth(int64_t step, const LossWeights& w) {
  if (step < 0) throw ValidationError("lambda_depth: step must be >= 0");
  return std::min(1.0, 0.1 + w.alpha_ramp * static_cast<double>(step));
}

Eigen::VectorXd add_noise(const Eigen::VectorXd& z0, const Eigen::VectorXd& eps,
                          int t, const NoiseSchedule& sched) {
  if (z0.size() != eps.size())
    throw ValidationError("add_noise: z0 and eps sizes differ");
  const double ab = sched.at(t);
  return std::sqrt(ab) * z0 + std::sqrt(1.0 - ab) * eps;
}

Eigen::VectorXd v_target(const Eigen::VectorXd& z0, const Eigen::VectorXd& eps,
                         int t, const NoiseSchedule& sched) {
  if (z0.size() != eps.size())
    throw ValidationError("v_target: z0 and eps sizes differ");
  const double ab = sched.at(t);
  return std::sqrt(ab) * eps - std::sqrt(1.0 - ab) * z0;
}

Eigen::VectorXd recover_z0(const Eigen::VectorXd& z_t, const Eigen::VectorXd& v,
                           int t, const NoiseSchedule& sched) {
  const double ab = sched.at(t);
  return std::sqrt(ab) * z_t - std::sqrt(1.0 - ab) * v;
}

double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ValidationError("mse: size mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double stage1_loss(double l_rgb, double l_d, int64_t step, const LossWeights& w) {
  return l_rgb + lambda_depth(step, w) * l_d;
}

double total_loss(double l_rgb, double l_d, double l_geo, int64_t step,
                  const LossWeights& w) {
  return l_rgb + lambda_depth(step, w) * l_d + w.lambda_geo * l_geo;
}

}  // namespace mvgeo
