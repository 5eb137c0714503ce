#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scriptqa/rng.hpp"

namespace scriptqa {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Raised when training or evaluation produces a non-finite value; callers
// distinguish this from validation errors when choosing an exit status.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A named tensor with its gradient accumulator. Batch dimension is columns
// throughout; a vector is an n x 1 matrix.
struct Parameter {
  std::string name;
  Mat v, g;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, int rows, int cols, bool train = true)
      : name(std::move(n)),
        v(Mat::Zero(rows, cols)),
        g(Mat::Zero(rows, cols)),
        trainable(train) {}

  void zero_grad() { g.setZero(); }
};

// Glorot uniform: +-sqrt(6 / (fan_in + fan_out)), fans from the shape
// (rows = out, cols = in).
void glorot_init(Rng& rng, Parameter& p);

// Elementwise activations. The *_from_y forms take the activation output.
Mat sigmoid(const Mat& x);
Mat dsigmoid_from_y(const Mat& y);
Mat tanh_m(const Mat& x);
Mat dtanh_from_y(const Mat& y);
// Column-wise softmax.
Mat softmax_cols(const Mat& z);

// Mean binary cross-entropy over all elements; outputs are clipped to
// [1e-7, 1 - 1e-7]. Gradient is with respect to the unclipped outputs.
double bce_mean(const Mat& y, const Mat& t);
Mat bce_grad(const Mat& y, const Mat& t);

// Mean categorical cross-entropy over columns, from logits (softmax fused
// into both the loss and the gradient). targets[j] indexes the hot row of
// column j; a negative target skips that column (padding).
double ce_mean_logits(const Mat& z, const std::vector<int>& targets);
Mat ce_grad_logits(const Mat& z, const std::vector<int>& targets);

// Fused-gate LSTM. Gate rows are ordered [input; forget; cell; output].
// The forget gate bias is initialized to 1.
struct LstmCell {
  Parameter Wx, Wh, b;
  int in = 0, hidden = 0;

  LstmCell() = default;
  LstmCell(const std::string& prefix, int in_dim, int hidden_dim, Rng& rng);

  struct Cache {
    Mat x, h_prev, c_prev;
    Mat i, f, g, o, c, tanh_c;
  };

  // h, c: hidden x batch. Fills cache for backward.
  void forward(const Mat& x, const Mat& h_prev, const Mat& c_prev, Mat& h,
               Mat& c, Cache& cache) const;
  // Accumulates parameter grads; returns grads w.r.t. x, h_prev, c_prev.
  // need_dx = false skips the input gradient (for leaf inputs).
  void backward(const Mat& dh, const Mat& dc_in, const Cache& cache, Mat& dx,
                Mat& dh_prev, Mat& dc_prev, bool need_dx = true);

  std::vector<Parameter*> params();
};

// Nadam with optional global-norm gradient clipping (0 disables).
class Nadam {
 public:
  struct Config {
    double lr = 0.002;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 5.0;
  };

  explicit Nadam(std::vector<Parameter*> params);
  Nadam(std::vector<Parameter*> params, Config cfg);

  void step();
  long long t() const { return t_; }
  const Config& config() const { return cfg_; }
  std::vector<Parameter*>& params() { return params_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Mat> m_, v_;
  Config cfg_;
  long long t_ = 0;
};

// Central-difference gradient check. loss_and_grads must zero, recompute,
// and accumulate gradients; loss_only must not touch gradients. Returns the
// maximum relative error over all trainable parameter elements.
double gradient_check(std::vector<Parameter*> params,
                      const std::function<double()>& loss_and_grads,
                      const std::function<double()>& loss_only,
                      double h = 1e-5);

}  // namespace scriptqa
