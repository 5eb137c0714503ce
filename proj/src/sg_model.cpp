#include "scriptqa/sg_model.hpp"

#include <stdexcept>

namespace scriptqa {

SgModel::SgModel(const Config& cfg, std::uint64_t seed)
    : cfg_(cfg),
      W_in_("sg.W_in", cfg.hidden, cfg.prop_units),
      W_rec_("sg.W_rec", cfg.hidden, cfg.hidden),
      b_c_("sg.b_c", cfg.hidden, 1),
      W_cg_("sg.W_cg", cfg.hidden, cfg.hidden),
      b_g_("sg.b_g", cfg.hidden, 1),
      W_qe_("sg.W_qe", cfg.hidden, cfg.hidden + cfg.question_units),
      b_e_("sg.b_e", cfg.hidden, 1),
      W_out_("sg.W_out", cfg.prop_units, cfg.hidden),
      b_o_("sg.b_o", cfg.prop_units, 1) {
  Rng rng(seed);
  for (Parameter* p : params()) glorot_init(rng, *p);
}

Vec SgModel::forward(const std::vector<Vec>& props, const Vec& question,
                     std::vector<Vec>* combs, std::vector<Vec>* gestalts,
                     Vec* extraction) const {
  if (props.empty()) throw std::invalid_argument("sg: empty story prefix");
  Vec g = Vec::Zero(cfg_.hidden);
  for (const Vec& p : props) {
    Vec comb = sigmoid(W_in_.v * p + W_rec_.v * g + b_c_.v.col(0));
    g = sigmoid(W_cg_.v * comb + b_g_.v.col(0));
    if (combs) combs->push_back(std::move(comb));
    if (gestalts) gestalts->push_back(g);
  }
  Vec gq(cfg_.hidden + cfg_.question_units);
  gq << g, question;
  Vec e = sigmoid(W_qe_.v * gq + b_e_.v.col(0));
  if (extraction) *extraction = e;
  return sigmoid(W_out_.v * e + b_o_.v.col(0));
}

Vec SgModel::answer(const std::vector<Vec>& props, const Vec& question) const {
  return forward(props, question, nullptr, nullptr, nullptr);
}

double SgModel::loss(const std::vector<Vec>& props, const Vec& question,
                     const Vec& target) const {
  return bce_mean(answer(props, question), target);
}

double SgModel::accumulate_gradients(const std::vector<Vec>& props,
                                     const Vec& question, const Vec& target) {
  std::vector<Vec> combs, gestalts;
  Vec e;
  Vec y = forward(props, question, &combs, &gestalts, &e);
  double loss = bce_mean(y, target);

  const int T = static_cast<int>(props.size());
  Vec dy = bce_grad(y, target).cwiseProduct(dsigmoid_from_y(y));
  W_out_.g.noalias() += dy * e.transpose();
  b_o_.g.col(0) += dy;

  Vec de = (W_out_.v.transpose() * dy).cwiseProduct(dsigmoid_from_y(e));
  Vec gq(cfg_.hidden + cfg_.question_units);
  gq << gestalts[T - 1], question;
  W_qe_.g.noalias() += de * gq.transpose();
  b_e_.g.col(0) += de;

  Vec dg = (W_qe_.v.transpose() * de).head(cfg_.hidden);
  for (int t = T - 1; t >= 0; --t) {
    Vec db = dg.cwiseProduct(dsigmoid_from_y(gestalts[t]));
    W_cg_.g.noalias() += db * combs[t].transpose();
    b_g_.g.col(0) += db;
    Vec da = (W_cg_.v.transpose() * db).cwiseProduct(dsigmoid_from_y(combs[t]));
    W_in_.g.noalias() += da * props[t].transpose();
    b_c_.g.col(0) += da;
    if (t > 0) W_rec_.g.noalias() += da * gestalts[t - 1].transpose();
    dg.noalias() = W_rec_.v.transpose() * da;
  }
  return loss;
}

double SgModel::accumulate_story_gradients(const std::vector<Vec>& props,
                                           const Mat& questions,
                                           const Mat& targets) {
  if (props.empty()) throw std::invalid_argument("sg: empty story");
  if (questions.cols() == 0 || questions.cols() != targets.cols())
    throw std::invalid_argument("sg: question/target mismatch");
  const int T = static_cast<int>(props.size());
  const double scale = 1.0 / static_cast<double>(T);

  std::vector<Vec> combs, gestalts;
  combs.reserve(T);
  gestalts.reserve(T);
  Vec g = Vec::Zero(cfg_.hidden);
  for (const Vec& p : props) {
    Vec comb = sigmoid(W_in_.v * p + W_rec_.v * g + b_c_.v.col(0));
    g = sigmoid(W_cg_.v * comb + b_g_.v.col(0));
    combs.push_back(std::move(comb));
    gestalts.push_back(g);
  }

  Mat gq(cfg_.hidden + cfg_.question_units, questions.cols());
  gq.bottomRows(cfg_.question_units) = questions;
  double loss = 0.0;
  std::vector<Vec> dg_query(T);
  for (int t = 0; t < T; ++t) {
    gq.topRows(cfg_.hidden) = gestalts[t].replicate(1, questions.cols());
    Mat e = sigmoid((W_qe_.v * gq).colwise() + b_e_.v.col(0));
    Mat y = sigmoid((W_out_.v * e).colwise() + b_o_.v.col(0));
    loss += bce_mean(y, targets);

    Mat dy = bce_grad(y, targets).cwiseProduct(dsigmoid_from_y(y)) * scale;
    W_out_.g.noalias() += dy * e.transpose();
    b_o_.g.col(0) += dy.rowwise().sum();
    Mat de = (W_out_.v.transpose() * dy).cwiseProduct(dsigmoid_from_y(e));
    W_qe_.g.noalias() += de * gq.transpose();
    b_e_.g.col(0) += de.rowwise().sum();
    dg_query[t] = (W_qe_.v.transpose() * de).topRows(cfg_.hidden).rowwise().sum();
  }

  Vec dg = Vec::Zero(cfg_.hidden);
  for (int t = T - 1; t >= 0; --t) {
    dg += dg_query[t];
    Vec db = dg.cwiseProduct(dsigmoid_from_y(gestalts[t]));
    W_cg_.g.noalias() += db * combs[t].transpose();
    b_g_.g.col(0) += db;
    Vec da = (W_cg_.v.transpose() * db).cwiseProduct(dsigmoid_from_y(combs[t]));
    W_in_.g.noalias() += da * props[t].transpose();
    b_c_.g.col(0) += da;
    if (t > 0) W_rec_.g.noalias() += da * gestalts[t - 1].transpose();
    dg.noalias() = W_rec_.v.transpose() * da;
  }
  return loss * scale;
}

std::vector<Parameter*> SgModel::params() {
  return {&W_in_, &W_rec_, &b_c_, &W_cg_, &b_g_, &W_qe_, &b_e_, &W_out_, &b_o_};
}

}  // namespace scriptqa
