#include "scriptqa/seq2seq_model.hpp"

#include <stdexcept>

namespace scriptqa {

struct Seq2seqModel::Trace {
  int L = 0, B = 0;
  std::vector<Mat> x;                    // embedded inputs, emb x B per step
  std::vector<LstmCell::Cache> fwd_cache, bwd_cache;
  std::vector<Mat> A;                    // annotations, 2*enc_hidden x B
  std::vector<Mat> WA;                   // W_a * A_t, att x B
  std::vector<Mat> alpha;                // per decoder step, L x B
  std::vector<std::vector<Mat>> tanhs;   // per decoder step, L of att x B
};

Seq2seqModel::Seq2seqModel(const Config& cfg, const Embeddings* emb,
                           std::uint64_t seed)
    : cfg_(cfg), emb_(emb) {
  if (emb->dim != cfg.emb_dim)
    throw std::invalid_argument("seq2seq: embedding dimension mismatch");
  if (cfg.go_token < 0)
    throw std::invalid_argument("seq2seq: go_token not set");
  Rng rng(seed);
  enc_fwd_ = LstmCell("s2s.enc_fwd", cfg.emb_dim, cfg.enc_hidden, rng);
  enc_bwd_ = LstmCell("s2s.enc_bwd", cfg.emb_dim, cfg.enc_hidden, rng);
  int ctx = 2 * cfg.enc_hidden;
  dec_ = LstmCell("s2s.dec", cfg.emb_dim + ctx, cfg.dec_hidden, rng);
  W_s_ = Parameter("s2s.att_W_s", cfg.att_hidden, cfg.dec_hidden);
  W_a_ = Parameter("s2s.att_W_a", cfg.att_hidden, ctx);
  v_a_ = Parameter("s2s.att_v", cfg.att_hidden, 1);
  W_pr_ = Parameter("s2s.W_pr", cfg.vocab, cfg.dec_hidden);
  b_pr_ = Parameter("s2s.b_pr", cfg.vocab, 1);
  for (Parameter* p : {&W_s_, &W_a_, &v_a_, &W_pr_, &b_pr_}) {
    glorot_init(rng, *p);
  }
  b_pr_.v.setZero();
}

void Seq2seqModel::encode(const std::vector<std::vector<int>>& inputs,
                          Trace& tr) const {
  const int B = static_cast<int>(inputs.size());
  if (B == 0) throw std::invalid_argument("seq2seq: empty batch");
  const int L = static_cast<int>(inputs[0].size());
  for (const auto& seq : inputs) {
    if (static_cast<int>(seq.size()) != L)
      throw std::invalid_argument("seq2seq: ragged batch");
  }
  tr.L = L;
  tr.B = B;
  tr.x.resize(L);
  for (int t = 0; t < L; ++t) {
    Mat x(cfg_.emb_dim, B);
    for (int b = 0; b < B; ++b) x.col(b) = emb_->table.col(inputs[b][t]);
    tr.x[t] = std::move(x);
  }

  const int H = cfg_.enc_hidden;
  tr.fwd_cache.resize(L);
  tr.bwd_cache.resize(L);
  tr.A.assign(L, Mat(2 * H, B));
  Mat h = Mat::Zero(H, B), c = Mat::Zero(H, B), h2, c2;
  for (int t = 0; t < L; ++t) {
    enc_fwd_.forward(tr.x[t], h, c, h2, c2, tr.fwd_cache[t]);
    h = h2;
    c = c2;
    tr.A[t].topRows(H) = h;
  }
  h.setZero();
  c.setZero();
  for (int t = L - 1; t >= 0; --t) {
    enc_bwd_.forward(tr.x[t], h, c, h2, c2, tr.bwd_cache[t]);
    h = h2;
    c = c2;
    tr.A[t].bottomRows(H) = h;
  }
  tr.WA.resize(L);
  for (int t = 0; t < L; ++t) tr.WA[t] = W_a_.v * tr.A[t];
}

Mat Seq2seqModel::attend(const Mat& s_prev, Trace& tr, int step) const {
  const int L = tr.L, B = tr.B;
  if (!cfg_.use_attention) return tr.A[L - 1];
  Mat u = W_s_.v * s_prev;
  Mat scores(L, B);
  std::vector<Mat> tanhs(L);
  for (int t = 0; t < L; ++t) {
    tanhs[t] = tanh_m(tr.WA[t] + u);
    scores.row(t) = v_a_.v.col(0).transpose() * tanhs[t];
  }
  Mat alpha = softmax_cols(scores);
  Mat ctx = Mat::Zero(tr.A[0].rows(), B);
  for (int t = 0; t < L; ++t) {
    ctx.noalias() += tr.A[t] * alpha.row(t).asDiagonal();
  }
  if (static_cast<int>(tr.alpha.size()) <= step) {
    tr.alpha.resize(step + 1);
    tr.tanhs.resize(step + 1);
  }
  tr.alpha[step] = std::move(alpha);
  tr.tanhs[step] = std::move(tanhs);
  return ctx;
}

double Seq2seqModel::loss_batch(const std::vector<std::vector<int>>& inputs,
                                const std::vector<std::vector<int>>& targets)
    const {
  Trace tr;
  encode(inputs, tr);
  const int B = tr.B, K = cfg_.answer_len;
  Mat s = Mat::Zero(cfg_.dec_hidden, B), c = s, s2, c2;
  LstmCell::Cache cache;
  double loss = 0.0;
  for (int k = 0; k < K; ++k) {
    Mat prev(cfg_.emb_dim, B);
    for (int b = 0; b < B; ++b) {
      int tok = k == 0 ? cfg_.go_token : targets[b][k - 1];
      prev.col(b) = emb_->table.col(tok);
    }
    Mat ctx = attend(s, tr, k);
    Mat x(cfg_.emb_dim + ctx.rows(), B);
    x << prev, ctx;
    dec_.forward(x, s, c, s2, c2, cache);
    s = s2;
    c = c2;
    Mat logits = W_pr_.v * s;
    logits.colwise() += Vec(b_pr_.v.col(0));
    std::vector<int> tk(B);
    for (int b = 0; b < B; ++b) tk[b] = targets[b][k];
    loss += ce_mean_logits(logits, tk) / K;
  }
  return loss;
}

double Seq2seqModel::accumulate_gradients(
    const std::vector<std::vector<int>>& inputs,
    const std::vector<std::vector<int>>& targets) {
  Trace tr;
  encode(inputs, tr);
  const int B = tr.B, L = tr.L, K = cfg_.answer_len;
  const int ctx_dim = 2 * cfg_.enc_hidden;
  if (static_cast<int>(targets.size()) != B)
    throw std::invalid_argument("seq2seq: target batch mismatch");
  for (const auto& t : targets) {
    if (static_cast<int>(t.size()) != K)
      throw std::invalid_argument("seq2seq: target length mismatch");
  }

  // Teacher-forced forward with full caching.
  std::vector<Mat> s_list(K + 1), c_list(K + 1), logits_list(K);
  std::vector<LstmCell::Cache> dec_cache(K);
  s_list[0] = Mat::Zero(cfg_.dec_hidden, B);
  c_list[0] = Mat::Zero(cfg_.dec_hidden, B);
  double loss = 0.0;
  for (int k = 0; k < K; ++k) {
    Mat prev(cfg_.emb_dim, B);
    for (int b = 0; b < B; ++b) {
      int tok = k == 0 ? cfg_.go_token : targets[b][k - 1];
      prev.col(b) = emb_->table.col(tok);
    }
    Mat ctx = attend(s_list[k], tr, k);
    Mat x(cfg_.emb_dim + ctx_dim, B);
    x << prev, ctx;
    dec_.forward(x, s_list[k], c_list[k], s_list[k + 1], c_list[k + 1],
                 dec_cache[k]);
    Mat logits = W_pr_.v * s_list[k + 1];
    logits.colwise() += Vec(b_pr_.v.col(0));
    std::vector<int> tk(B);
    for (int b = 0; b < B; ++b) tk[b] = targets[b][k];
    loss += ce_mean_logits(logits, tk) / K;
    logits_list[k] = std::move(logits);
  }

  // Decoder and attention backward.
  std::vector<Mat> dA(L, Mat::Zero(ctx_dim, B));
  Mat dh_carry = Mat::Zero(cfg_.dec_hidden, B);
  Mat dc_carry = Mat::Zero(cfg_.dec_hidden, B);
  for (int k = K - 1; k >= 0; --k) {
    std::vector<int> tk(B);
    for (int b = 0; b < B; ++b) tk[b] = targets[b][k];
    Mat dlogits = ce_grad_logits(logits_list[k], tk) / K;
    W_pr_.g.noalias() += dlogits * s_list[k + 1].transpose();
    b_pr_.g.col(0) += dlogits.rowwise().sum();

    Mat dh = W_pr_.v.transpose() * dlogits + dh_carry;
    Mat dx, dh_prev, dc_prev;
    dec_.backward(dh, dc_carry, dec_cache[k], dx, dh_prev, dc_prev);
    dc_carry = dc_prev;

    // Split the input gradient; the embedding half is frozen.
    Mat dctx = dx.bottomRows(ctx_dim);

    if (!cfg_.use_attention) {
      dA[L - 1] += dctx;
      dh_carry = dh_prev;
      continue;
    }

    // Attention backward for this step (queried with the previous state).
    const Mat& alpha = tr.alpha[k];
    Mat dalpha(L, B);
    for (int t = 0; t < L; ++t) {
      dalpha.row(t) = (tr.A[t].cwiseProduct(dctx)).colwise().sum();
      dA[t].noalias() += dctx * alpha.row(t).asDiagonal();
    }
    Mat dscores(L, B);
    for (int b = 0; b < B; ++b) {
      double dot = alpha.col(b).dot(dalpha.col(b));
      dscores.col(b) =
          alpha.col(b).cwiseProduct(dalpha.col(b) - Vec::Constant(L, dot));
    }
    Mat sum_dpre = Mat::Zero(cfg_.att_hidden, B);
    for (int t = 0; t < L; ++t) {
      const Mat& th = tr.tanhs[k][t];
      v_a_.g.col(0).noalias() += th * dscores.row(t).transpose();
      Mat dpre =
          (v_a_.v.col(0) * dscores.row(t)).cwiseProduct(dtanh_from_y(th));
      W_a_.g.noalias() += dpre * tr.A[t].transpose();
      dA[t].noalias() += W_a_.v.transpose() * dpre;
      sum_dpre += dpre;
    }
    W_s_.g.noalias() += sum_dpre * s_list[k].transpose();
    dh_carry = dh_prev + W_s_.v.transpose() * sum_dpre;
  }

  // Encoder backward: forward direction in reverse time, backward
  // direction in forward time.
  const int H = cfg_.enc_hidden;
  Mat dhf = Mat::Zero(H, B), dcf = dhf, dhb = dhf, dcb = dhf;
  Mat dx, dh_prev, dc_prev;
  for (int t = L - 1; t >= 0; --t) {
    Mat dh = dA[t].topRows(H) + dhf;
    enc_fwd_.backward(dh, dcf, tr.fwd_cache[t], dx, dh_prev, dc_prev, false);
    dhf = dh_prev;
    dcf = dc_prev;
  }
  for (int t = 0; t < L; ++t) {
    Mat dh = dA[t].bottomRows(H) + dhb;
    enc_bwd_.backward(dh, dcb, tr.bwd_cache[t], dx, dh_prev, dc_prev, false);
    dhb = dh_prev;
    dcb = dc_prev;
  }
  return loss;
}

std::vector<std::vector<int>> Seq2seqModel::predict(
    const std::vector<std::vector<int>>& inputs) const {
  Trace tr;
  encode(inputs, tr);
  const int B = tr.B, K = cfg_.answer_len;
  Mat s = Mat::Zero(cfg_.dec_hidden, B), c = s, s2, c2;
  LstmCell::Cache cache;
  std::vector<std::vector<int>> out(B, std::vector<int>(K));
  std::vector<int> prev_tok(B, cfg_.go_token);
  for (int k = 0; k < K; ++k) {
    Mat prev(cfg_.emb_dim, B);
    for (int b = 0; b < B; ++b) prev.col(b) = emb_->table.col(prev_tok[b]);
    Mat ctx = attend(s, tr, k);
    Mat x(cfg_.emb_dim + ctx.rows(), B);
    x << prev, ctx;
    dec_.forward(x, s, c, s2, c2, cache);
    s = s2;
    c = c2;
    Mat logits = W_pr_.v * s;
    logits.colwise() += Vec(b_pr_.v.col(0));
    for (int b = 0; b < B; ++b) {
      int best = 0;
      for (int i = 1; i < cfg_.vocab; ++i) {
        if (logits(i, b) > logits(best, b)) best = i;
      }
      out[b][k] = best;
      prev_tok[b] = best;
    }
  }
  return out;
}

std::vector<Parameter*> Seq2seqModel::params() {
  std::vector<Parameter*> ps;
  for (Parameter* p : enc_fwd_.params()) ps.push_back(p);
  for (Parameter* p : enc_bwd_.params()) ps.push_back(p);
  for (Parameter* p : dec_.params()) ps.push_back(p);
  for (Parameter* p : {&W_s_, &W_a_, &v_a_, &W_pr_, &b_pr_}) ps.push_back(p);
  return ps;
}

}  // namespace scriptqa
