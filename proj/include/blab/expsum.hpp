#pragma once

#include <vector>

#include <Eigen/Core>

namespace blab {

// Channels of samples y_c(s0 + k ds), one row per channel.
struct ExpSumData {
  double s0 = 0, ds = 0;
  Eigen::MatrixXd values;
};

struct ExpSumModel {
  std::vector<double> rates;  // strictly increasing
  Eigen::MatrixXd amplitudes; // channel x rate, referred to s = 0
  double residual = 0;        // ||Y - fit||_F / ||Y||_F
  bool rank_collapsed = false;
  bool refined = false;       // nonlinear least squares was applied
};

struct ExpSumOptions {
  double rank_tol = 1e-13;    // singular values below rank_tol * s_max are noise
  double merge_tol = 1e-6;
  double refine_above = 1e-8;
};

// Multichannel matrix pencil on the stacked Hankel matrices. Fits up to
// `order` exponentials y_c(s) = sum_k a_ck e^{-lambda_k s}.
ExpSumModel exp_sum_extract(const ExpSumData& data, int order, const ExpSumOptions& opts = {});

}  // namespace blab
