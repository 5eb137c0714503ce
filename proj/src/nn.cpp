#include "scriptqa/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace scriptqa {

void glorot_init(Rng& rng, Parameter& p) {
  double lim = std::sqrt(6.0 / (p.v.rows() + p.v.cols()));
  for (Eigen::Index j = 0; j < p.v.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.v.rows(); ++i) {
      p.v(i, j) = rng.uniform(-lim, lim);
    }
  }
}

Mat sigmoid(const Mat& x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Mat dsigmoid_from_y(const Mat& y) { return y.array() * (1.0 - y.array()); }

Mat tanh_m(const Mat& x) { return x.array().tanh(); }

Mat dtanh_from_y(const Mat& y) { return 1.0 - y.array().square(); }

Mat softmax_cols(const Mat& z) {
  Mat out(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    Vec col = z.col(j);
    double mx = col.maxCoeff();
    Vec e = (col.array() - mx).exp();
    out.col(j) = e / e.sum();
  }
  return out;
}

namespace {
constexpr double kClip = 1e-7;
inline double clip01(double y) {
  return y < kClip ? kClip : (y > 1.0 - kClip ? 1.0 - kClip : y);
}
}  // namespace

double bce_mean(const Mat& y, const Mat& t) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      double p = clip01(y(i, j));
      total -= t(i, j) * std::log(p) + (1.0 - t(i, j)) * std::log(1.0 - p);
    }
  }
  return total / static_cast<double>(y.size());
}

Mat bce_grad(const Mat& y, const Mat& t) {
  Mat g(y.rows(), y.cols());
  double n = static_cast<double>(y.size());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      double p = clip01(y(i, j));
      g(i, j) = (p - t(i, j)) / (p * (1.0 - p) * n);
    }
  }
  return g;
}

double ce_mean_logits(const Mat& z, const std::vector<int>& targets) {
  if (static_cast<Eigen::Index>(targets.size()) != z.cols()) {
    throw std::invalid_argument("ce_mean_logits: target count mismatch");
  }
  double total = 0.0;
  int live = 0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    if (targets[j] < 0) continue;
    Vec col = z.col(j);
    double mx = col.maxCoeff();
    double lse = std::log((col.array() - mx).exp().sum()) + mx;
    total += lse - z(targets[j], j);
    ++live;
  }
  return live == 0 ? 0.0 : total / live;
}

Mat ce_grad_logits(const Mat& z, const std::vector<int>& targets) {
  if (static_cast<Eigen::Index>(targets.size()) != z.cols()) {
    throw std::invalid_argument("ce_grad_logits: target count mismatch");
  }
  int live = 0;
  for (int t : targets) live += t >= 0;
  Mat g = Mat::Zero(z.rows(), z.cols());
  if (live == 0) return g;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    if (targets[j] < 0) continue;
    Vec col = z.col(j);
    double mx = col.maxCoeff();
    Vec e = (col.array() - mx).exp();
    g.col(j) = e / e.sum();
    g(targets[j], j) -= 1.0;
    g.col(j) /= live;
  }
  return g;
}

LstmCell::LstmCell(const std::string& prefix, int in_dim, int hidden_dim,
                   Rng& rng)
    : Wx(prefix + ".Wx", 4 * hidden_dim, in_dim),
      Wh(prefix + ".Wh", 4 * hidden_dim, hidden_dim),
      b(prefix + ".b", 4 * hidden_dim, 1),
      in(in_dim),
      hidden(hidden_dim) {
  glorot_init(rng, Wx);
  glorot_init(rng, Wh);
  b.v.block(hidden, 0, hidden, 1).setOnes();  // forget gate bias
}

void LstmCell::forward(const Mat& x, const Mat& h_prev, const Mat& c_prev,
                       Mat& h, Mat& c, Cache& cache) const {
  Mat z = Wx.v * x + Wh.v * h_prev;
  z.colwise() += Vec(b.v.col(0));
  const int H = hidden;
  cache.x = x;
  cache.h_prev = h_prev;
  cache.c_prev = c_prev;
  cache.i = sigmoid(z.topRows(H));
  cache.f = sigmoid(z.middleRows(H, H));
  cache.g = tanh_m(z.middleRows(2 * H, H));
  cache.o = sigmoid(z.bottomRows(H));
  cache.c = cache.f.array() * c_prev.array() + cache.i.array() * cache.g.array();
  cache.tanh_c = tanh_m(cache.c);
  c = cache.c;
  h = cache.o.array() * cache.tanh_c.array();
}

void LstmCell::backward(const Mat& dh, const Mat& dc_in, const Cache& cache,
                        Mat& dx, Mat& dh_prev, Mat& dc_prev, bool need_dx) {
  const int H = hidden;
  Mat do_ = dh.array() * cache.tanh_c.array();
  Mat dc = dc_in.array() +
           dh.array() * cache.o.array() * dtanh_from_y(cache.tanh_c).array();
  Mat di = dc.array() * cache.g.array();
  Mat df = dc.array() * cache.c_prev.array();
  Mat dg = dc.array() * cache.i.array();
  dc_prev = dc.array() * cache.f.array();

  Mat dz(4 * H, dh.cols());
  dz.topRows(H) = di.array() * dsigmoid_from_y(cache.i).array();
  dz.middleRows(H, H) = df.array() * dsigmoid_from_y(cache.f).array();
  dz.middleRows(2 * H, H) = dg.array() * dtanh_from_y(cache.g).array();
  dz.bottomRows(H) = do_.array() * dsigmoid_from_y(cache.o).array();

  Wx.g.noalias() += dz * cache.x.transpose();
  Wh.g.noalias() += dz * cache.h_prev.transpose();
  b.g.col(0) += dz.rowwise().sum();
  if (need_dx) dx.noalias() = Wx.v.transpose() * dz;
  dh_prev.noalias() = Wh.v.transpose() * dz;
}

std::vector<Parameter*> LstmCell::params() { return {&Wx, &Wh, &b}; }

Nadam::Nadam(std::vector<Parameter*> params)
    : Nadam(std::move(params), Config()) {}

Nadam::Nadam(std::vector<Parameter*> params, Config cfg)
    : params_(std::move(params)), cfg_(cfg) {
  for (const Parameter* p : params_) {
    m_.push_back(Mat::Zero(p->v.rows(), p->v.cols()));
    v_.push_back(Mat::Zero(p->v.rows(), p->v.cols()));
  }
}

void Nadam::step() {
  ++t_;
  if (cfg_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const Parameter* p : params_) {
      if (p->trainable) sq += p->g.squaredNorm();
    }
    double norm = std::sqrt(sq);
    if (norm > cfg_.clip_norm) {
      double scale = cfg_.clip_norm / norm;
      for (Parameter* p : params_) {
        if (p->trainable) p->g *= scale;
      }
    }
  }
  double b1 = cfg_.beta1, b2 = cfg_.beta2;
  double b1t = std::pow(b1, static_cast<double>(t_));
  double b1t1 = std::pow(b1, static_cast<double>(t_ + 1));
  double b2t = std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter* p = params_[k];
    if (!p->trainable) continue;
    m_[k] = b1 * m_[k] + (1.0 - b1) * p->g;
    v_[k] = b2 * v_[k] + (1.0 - b2) * p->g.cwiseProduct(p->g);
    Mat m_hat = m_[k] / (1.0 - b1t1);
    Mat update = b1 * m_hat + ((1.0 - b1) / (1.0 - b1t)) * p->g;
    Mat denom = (v_[k] / (1.0 - b2t)).cwiseSqrt().array() + cfg_.eps;
    p->v.array() -= cfg_.lr * update.array() / denom.array();
  }
}

double gradient_check(std::vector<Parameter*> params,
                      const std::function<double()>& loss_and_grads,
                      const std::function<double()>& loss_only, double h) {
  for (Parameter* p : params) p->zero_grad();
  loss_and_grads();
  double max_rel = 0.0;
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    for (Eigen::Index j = 0; j < p->v.cols(); ++j) {
      for (Eigen::Index i = 0; i < p->v.rows(); ++i) {
        double saved = p->v(i, j);
        p->v(i, j) = saved + h;
        double lp = loss_only();
        p->v(i, j) = saved - h;
        double lm = loss_only();
        p->v(i, j) = saved;
        double fd = (lp - lm) / (2.0 * h);
        double an = p->g(i, j);
        double rel = std::abs(an - fd) / (std::abs(an) + std::abs(fd) + 1e-12);
        if (std::abs(an - fd) < 1e-10) rel = 0.0;  // both effectively zero
        if (rel > max_rel) max_rel = rel;
      }
    }
  }
  return max_rel;
}

}  // namespace scriptqa
