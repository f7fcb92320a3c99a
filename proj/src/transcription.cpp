#include "transcription.hpp"

#include <cmath>
#include <memory>
#include <vector>

#include <ceres/ceres.h>

namespace heatchain {

namespace {

// Dense drift Jacobian assembled row by row from the transpose product.
void drift_jacobian(const ModelParams& m, const Eigen::Ref<const Vec>& x, Mat& A, Vec& e, Vec& row) {
  const int n = m.dim();
  for (int i = 0; i < n; ++i) {
    e.setZero();
    e[i] = 1.0;
    kernel::drift_vjp(m, x, e, row);
    A.row(i) = row.transpose();
  }
}

// One RK4 step with linearly interpolated control and its Jacobian with respect to
// z = [x | u_a | u_b].
class Rk4Step {
 public:
  Rk4Step(const ModelParams& m, double h)
      : m_(m), h_(h), n_(m.dim()), nr_(2 * m.d), off_(m.r_offset()), scale_(noise_diagonal(m)) {
    const int nz = n_ + 2 * nr_;
    for (auto* M : {&D1_, &D2_, &D3_, &D4_, &Dy_}) M->resize(n_, nz);
    A_.resize(n_, n_);
    e_.resize(n_);
    row_.resize(n_);
    for (auto* v : {&k1_, &k2_, &k3_, &k4_, &y_}) v->resize(n_);
    Bua_ = Mat::Zero(n_, nz);
    Bub_ = Mat::Zero(n_, nz);
    for (int j = 0; j < nr_; ++j) {
      Bua_(off_ + j, n_ + j) = scale_[j];
      Bub_(off_ + j, n_ + nr_ + j) = scale_[j];
    }
  }

  void eval(const double* x, const double* ua, const double* ub, Vec& out, Mat* J) {
    using CMap = Eigen::Map<const Vec>;
    const CMap X(x, n_);
    const CMap Ua(ua, nr_);
    const CMap Ub(ub, nr_);
    const Vec um = 0.5 * (Ua + Ub);
    auto stage = [&](const Vec& at, const Eigen::Ref<const Vec>& u, Vec& k) {
      kernel::drift(m_, at, k);
      k.segment(off_, nr_) += scale_.cwiseProduct(u);
    };
    y_ = X;
    stage(y_, Ua, k1_);
    if (J) {
      drift_jacobian(m_, y_, A_, e_, row_);
      D1_ = Bua_;
      D1_.leftCols(n_) += A_;
    }
    y_ = X + (0.5 * h_) * k1_;
    if (J) {
      Dy_ = (0.5 * h_) * D1_;
      Dy_.leftCols(n_) += Mat::Identity(n_, n_);
      drift_jacobian(m_, y_, A_, e_, row_);
      D2_ = A_ * Dy_ + 0.5 * (Bua_ + Bub_);
    }
    stage(y_, um, k2_);
    y_ = X + (0.5 * h_) * k2_;
    if (J) {
      Dy_ = (0.5 * h_) * D2_;
      Dy_.leftCols(n_) += Mat::Identity(n_, n_);
      drift_jacobian(m_, y_, A_, e_, row_);
      D3_ = A_ * Dy_ + 0.5 * (Bua_ + Bub_);
    }
    stage(y_, um, k3_);
    y_ = X + h_ * k3_;
    if (J) {
      Dy_ = h_ * D3_;
      Dy_.leftCols(n_) += Mat::Identity(n_, n_);
      drift_jacobian(m_, y_, A_, e_, row_);
      D4_ = A_ * Dy_ + Bub_;
    }
    stage(y_, Ub, k4_);
    out = X + (h_ / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    if (J) {
      *J = (h_ / 6.0) * (D1_ + 2.0 * D2_ + 2.0 * D3_ + D4_);
      J->leftCols(n_) += Mat::Identity(n_, n_);
    }
  }

 private:
  const ModelParams& m_;
  double h_;
  int n_;
  int nr_;
  int off_;
  Vec scale_;
  Mat A_, D1_, D2_, D3_, D4_, Dy_, Bua_, Bub_;
  Vec e_, row_, k1_, k2_, k3_, k4_, y_;
};

// sqrt(weight) (x_{k+1} - RK4(x_k, u_k, u_{k+1})).
class DefectCost final : public ceres::CostFunction {
 public:
  DefectCost(const ModelParams& m, double h, const double* weight) : step_(m, h), weight_(weight) {
    n_ = m.dim();
    nr_ = 2 * m.d;
    set_num_residuals(n_);
    auto* sizes = mutable_parameter_block_sizes();
    *sizes = {n_, n_, nr_, nr_};
    next_.resize(n_);
  }

  bool Evaluate(const double* const* params, double* residuals, double** jacobians) const override {
    const double s = std::sqrt(*weight_);
    const bool want = jacobians != nullptr;
    step_.eval(params[0], params[2], params[3], next_, want ? &J_ : nullptr);
    Eigen::Map<Vec> r(residuals, n_);
    r = s * (Eigen::Map<const Vec>(params[1], n_) - next_);
    if (!r.allFinite()) return false;
    if (!want) return true;
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    if (jacobians[0]) Eigen::Map<RowMat>(jacobians[0], n_, n_) = -s * J_.leftCols(n_);
    if (jacobians[1]) Eigen::Map<RowMat>(jacobians[1], n_, n_) = s * Mat::Identity(n_, n_);
    if (jacobians[2]) Eigen::Map<RowMat>(jacobians[2], n_, nr_) = -s * J_.middleCols(n_, nr_);
    if (jacobians[3]) Eigen::Map<RowMat>(jacobians[3], n_, nr_) = -s * J_.rightCols(nr_);
    return true;
  }

 private:
  mutable Rk4Step step_;
  const double* weight_;
  int n_;
  int nr_;
  mutable Vec next_;
  mutable Mat J_;
};

// sqrt(w_k) u_k so that the squared norm sums to the trapezoid control energy.
class EnergyCost final : public ceres::CostFunction {
 public:
  EnergyCost(int nr, double w) : nr_(nr), s_(std::sqrt(w)) {
    set_num_residuals(nr);
    mutable_parameter_block_sizes()->push_back(nr);
  }

  bool Evaluate(const double* const* params, double* residuals, double** jacobians) const override {
    for (int j = 0; j < nr_; ++j) residuals[j] = s_ * params[0][j];
    if (jacobians && jacobians[0]) {
      Eigen::Map<Mat>(jacobians[0], nr_, nr_) = s_ * Mat::Identity(nr_, nr_);
    }
    return true;
  }

 private:
  int nr_;
  double s_;
};

}  // namespace

TranscriptionOutcome transcribe(const ModelParams& m, const State& x, const State& y, double T, const Mat& u0,
                                const Mat& states0, const MamOptions& opts) {
  const int N = static_cast<int>(u0.rows()) - 1;
  const int n = m.dim();
  const int nr = 2 * m.d;
  const double h = T / N;

  // States start on the trajectory of u0, bent linearly so that the last one equals y.
  Mat X(n, N + 1);
  {
    Mat init = states0.rows() == N + 1 ? Mat(states0.transpose()) : Mat(integrate_controlled(m, x, u0, T).states.transpose());
    const Vec miss = y.vec() - init.col(N);
    for (int k = 0; k <= N; ++k) X.col(k) = init.col(k) + (static_cast<double>(k) / N) * miss;
    X.col(0) = x.vec();
    X.col(N) = y.vec();
  }
  Mat U = u0.transpose();  // column k is u_k

  double weight = opts.defect_weights.front();
  ceres::Problem::Options popts;
  popts.cost_function_ownership = ceres::TAKE_OWNERSHIP;
  ceres::Problem problem(popts);
  for (int k = 0; k <= N; ++k) {
    problem.AddParameterBlock(X.col(k).data(), n);
    problem.AddParameterBlock(U.col(k).data(), nr);
  }
  problem.SetParameterBlockConstant(X.col(0).data());
  problem.SetParameterBlockConstant(X.col(N).data());
  for (int k = 0; k <= N; ++k) {
    const double w = (k == 0 || k == N) ? 0.5 * h : h;
    problem.AddResidualBlock(new EnergyCost(nr, w), nullptr, U.col(k).data());
  }
  for (int k = 0; k < N; ++k) {
    problem.AddResidualBlock(new DefectCost(m, h, &weight), nullptr, X.col(k).data(), X.col(k + 1).data(),
                             U.col(k).data(), U.col(k + 1).data());
  }

  ceres::Solver::Options sopts;
  sopts.linear_solver_type = ceres::SPARSE_NORMAL_CHOLESKY;
  sopts.max_num_iterations = opts.lm_iterations;
  sopts.function_tolerance = 1e-14;
  sopts.gradient_tolerance = 1e-14;
  sopts.parameter_tolerance = 1e-14;
  sopts.logging_type = ceres::SILENT;
  sopts.num_threads = 1;

  TranscriptionOutcome out;
  for (double w : opts.defect_weights) {
    weight = w;
    ceres::Solver::Summary summary;
    ceres::Solve(sopts, &problem, &summary);
    out.iterations += static_cast<int>(summary.iterations.size());
    out.message = summary.message;
  }
  out.control = U.transpose();
  return out;
}

}  // namespace heatchain
