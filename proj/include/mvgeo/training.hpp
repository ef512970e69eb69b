// SPDX-License-Identifier: Apache-2.0
//
// Training-side arithmetic on toy tensors: projection-weight extension for
// a second modality, the depth-loss ramp, closed-form forward noising,
// v-prediction targets and the staged objectives. The "transformer body"
// between the projections is the identity map; the extension invariants
// are properties of the projections alone.

#pragma once

#include <Eigen/Core>

#include <vector>

namespace mvgeo {

/// Input/output projection of a toy single-modality denoiser.
/// w_in: C_v x C_t, b_in: C_t, w_out: C_t x C_v, b_out: C_v.
struct ProjectionWeights {
  Eigen::MatrixXd w_in;
  Eigen::VectorXd b_in;
  Eigen::MatrixXd w_out;
  Eigen::VectorXd b_out;

  void validate() const;
  int channels() const { return static_cast<int>(w_in.rows()); }   // C_v
  int tokens() const { return static_cast<int>(w_in.cols()); }     // C_t
};

/// Dual-modality projections: the new rows of w_in_plus are exact zeros and
/// the two column blocks of w_out_plus are exact copies, so the second
/// modality starts as a zero-influence pathway.
struct ExtendedProjectionWeights {
  Eigen::MatrixXd w_in_plus;   // 2C_v x C_t
  Eigen::VectorXd b_in_plus;   // C_t (unchanged)
  Eigen::MatrixXd w_out_plus;  // C_t x 2C_v
  Eigen::VectorXd b_out_plus;  // 2C_v (stacked copy)
};

ExtendedProjectionWeights extend_projections(const ProjectionWeights& w);

/// out = (latent^T w_in + b_in) w_out + b_out with an identity body.
/// The sums run in a fixed order so that the extended forward pass on
/// [z_rgb; z_d] reproduces the original output bit for bit on the first
/// half (the appended terms multiply exact zeros).
Eigen::VectorXd toy_forward(const ProjectionWeights& w,
                            const Eigen::VectorXd& latent);
Eigen::VectorXd toy_forward(const ExtendedProjectionWeights& w,
                            const Eigen::VectorXd& latent);

/// Cumulative noise schedule: alpha_bar[0] = 1 by convention and
/// alpha_bar[t] = prod_{s<=t} alpha_s, non-increasing in [0, 1]. The final
/// entry may reach exactly 0 (fully noised).
struct NoiseSchedule {
  std::vector<double> alpha_bar;

  int steps() const { return static_cast<int>(alpha_bar.size()) - 1; }
  double at(int t) const;  // throws on t outside [1, steps()]
  /// Per-step alpha_t = alpha_bar[t] / alpha_bar[t-1] (0 when fully noised).
  double alpha(int t) const;

  static NoiseSchedule linear_alpha_bar(int steps);
  void validate() const;
};

struct LossWeights {
  double alpha_ramp = 1e-4;  // per-step increment of the depth-loss weight
  double lambda_geo = 0.5;

  void validate() const;
};

/// min(1.0, 0.1 + alpha_ramp * step); non-decreasing, clamped.
double lambda_depth(int64_t step, const LossWeights& w);

/// z_t = sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) eps.
Eigen::VectorXd add_noise(const Eigen::VectorXd& z0, const Eigen::VectorXd& eps,
                          int t, const NoiseSchedule& sched);

/// v = sqrt(alpha_bar_t) eps - sqrt(1 - alpha_bar_t) z0. Satisfies
/// z0 = sqrt(alpha_bar_t) z_t - sqrt(1 - alpha_bar_t) v exactly.
Eigen::VectorXd v_target(const Eigen::VectorXd& z0, const Eigen::VectorXd& eps,
                         int t, const NoiseSchedule& sched);

/// Recovers z0 from (z_t, v); the algebraic inverse of the two above.
Eigen::VectorXd recover_z0(const Eigen::VectorXd& z_t, const Eigen::VectorXd& v,
                           int t, const NoiseSchedule& sched);

/// Mean squared error, the diffusion loss used on toy tensors.
double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// l_rgb + lambda_depth(step) * l_d.
double stage1_loss(double l_rgb, double l_d, int64_t step, const LossWeights& w);

/// l_rgb + lambda_depth(step) * l_d + lambda_geo * l_geo.
double total_loss(double l_rgb, double l_d, double l_geo, int64_t step,
                  const LossWeights& w);

}  // namespace mvgeo
