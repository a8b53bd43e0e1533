#include "blab/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "blab/error.hpp"

namespace blab {

namespace {

Eigen::MatrixXd vandermonde(const ExpSumData& d, const std::vector<double>& rates) {
  const int ns = d.values.cols();
  Eigen::MatrixXd V(ns, rates.size());
  for (int k = 0; k < ns; ++k)
    for (size_t j = 0; j < rates.size(); ++j) V(k, j) = std::exp(-rates[j] * (d.s0 + k * d.ds));
  return V;
}

// Least-squares amplitudes (channel x rate) and the relative residual.
double fit_amplitudes(const ExpSumData& d, const std::vector<double>& rates, Eigen::MatrixXd& A) {
  const Eigen::MatrixXd V = vandermonde(d, rates);
  A = V.colPivHouseholderQr().solve(d.values.transpose()).transpose();
  const double ny = d.values.norm();
  return ny > 0 ? (d.values - A * V.transpose()).norm() / ny : 0.0;
}

std::vector<double> merge_rates(std::vector<double> r, double tol) {
  std::sort(r.begin(), r.end());
  std::vector<double> out;
  int count = 0;
  for (double x : r) {
    if (!out.empty() && std::abs(x - out.back() / count) <= tol * std::abs(x)) {
      out.back() += x;
      ++count;
      continue;
    }
    if (!out.empty()) out.back() /= count;
    out.push_back(x);
    count = 1;
  }
  if (!out.empty()) out.back() /= count;
  return out;
}

// Variable projection: rates are the unknowns, amplitudes are eliminated.
struct Projection : Eigen::DenseFunctor<double> {
  Projection(const Eigen::MatrixXd& Z, double s0, double ds, int nrates)
      : Eigen::DenseFunctor<double>(nrates, Z.size()), Z(Z), s0(s0), ds(ds) {}
  int operator()(const Eigen::VectorXd& rates, Eigen::VectorXd& fvec) const {
    const int ns = Z.rows();
    Eigen::MatrixXd V(ns, rates.size());
    for (int k = 0; k < ns; ++k)
      for (int j = 0; j < rates.size(); ++j) V(k, j) = std::exp(-rates[j] * (s0 + k * ds));
    const Eigen::MatrixXd R = Z - V * V.colPivHouseholderQr().solve(Z);
    fvec = Eigen::Map<const Eigen::VectorXd>(R.data(), R.size());
    return 0;
  }
  const Eigen::MatrixXd& Z;
  double s0, ds;
};

}  // namespace

ExpSumModel exp_sum_extract(const ExpSumData& data, int order, const ExpSumOptions& opts) {
  const int ns = data.values.cols();
  if (order < 1) throw InvalidArgument("exp_sum_extract needs order >= 1");
  if (ns < 2 * order + 4)
    throw InvalidArgument("exp_sum_extract needs at least " + std::to_string(2 * order + 4) +
                          " samples for order " + std::to_string(order) + ", got " +
                          std::to_string(ns));
  if (!(data.ds > 0)) throw InvalidArgument("sample spacing must be positive");
  if (!data.values.allFinite()) throw InvalidArgument("samples contain non-finite values");

  ExpSumModel m;
  if (data.values.norm() == 0) {
    m.rank_collapsed = true;
    m.amplitudes.resize(data.values.rows(), 0);
    return m;
  }

  // Compressed channels: rows s_i w_i^T of the data's SVD span the same
  // exponentials and there are at most ns of them.
  Eigen::BDCSVD<Eigen::MatrixXd> csvd(data.values, Eigen::ComputeThinV);
  const auto& cs = csvd.singularValues();
  int nc = 0;
  while (nc < cs.size() && cs[nc] > 1e-15 * cs[0]) ++nc;
  const Eigen::MatrixXd Z =
      (csvd.matrixV().leftCols(nc) * cs.head(nc).asDiagonal()).transpose();  // nc x ns

  const int L = ns / 2;
  const int rows = ns - L;
  Eigen::MatrixXd H(nc * rows, L + 1);
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < rows; ++i) H.row(c * rows + i) = Z.row(c).segment(i, L + 1);
  Eigen::BDCSVD<Eigen::MatrixXd> hsvd(H, Eigen::ComputeThinV);
  const auto& hs = hsvd.singularValues();
  int rank = 0;
  while (rank < hs.size() && hs[rank] > opts.rank_tol * hs[0]) ++rank;
  const int r = std::min(order, rank);
  m.rank_collapsed = rank < order;

  const Eigen::MatrixXd V = hsvd.matrixV().leftCols(r);
  const Eigen::MatrixXd Phi =
      V.topRows(L).completeOrthogonalDecomposition().solve(V.bottomRows(L));
  Eigen::EigenSolver<Eigen::MatrixXd> es(Phi, false);
  std::vector<double> rates;
  for (int k = 0; k < r; ++k) {
    const auto z = es.eigenvalues()[k];
    if (z.real() <= 0 || z.real() >= 1 || std::abs(z.imag()) > 1e-8 * std::abs(z)) continue;
    rates.push_back(-std::log(z.real()) / data.ds);
  }
  if (static_cast<int>(rates.size()) < order) m.rank_collapsed = true;
  rates = merge_rates(rates, opts.merge_tol);
  m.residual = fit_amplitudes(data, rates, m.amplitudes);

  if (m.residual > opts.refine_above && !rates.empty()) {
    // Z^T is ns x nc: the projection residual of the compressed data has the
    // same norm as that of the full data.
    const Eigen::MatrixXd Zt = Z.transpose();
    Projection f(Zt, data.s0, data.ds, static_cast<int>(rates.size()));
    Eigen::NumericalDiff<Projection> nd(f);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Projection>> lm(nd);
    Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(rates.data(), rates.size());
    lm.minimize(x);
    std::vector<double> refined(x.data(), x.data() + x.size());
    if (std::all_of(refined.begin(), refined.end(), [](double v) { return std::isfinite(v); })) {
      refined = merge_rates(refined, opts.merge_tol);
      Eigen::MatrixXd A;
      const double res = fit_amplitudes(data, refined, A);
      if (res < m.residual) {
        rates = refined;
        m.amplitudes = A;
        m.residual = res;
        m.refined = true;
      }
    }
  }
  m.rates = rates;
  return m;
}

}  // namespace blab
