#pragma once

#include <cstdint>
#include <vector>

#include "scriptqa/encoding.hpp"
#include "scriptqa/nn.hpp"

namespace scriptqa {

// Sequence-to-sequence question answerer with additive attention. Frozen
// word embeddings feed a bidirectional LSTM encoder; a single-layer LSTM
// decoder emits the fixed-length answer, attending over the encoder
// annotations at every step:
//
//   score(s, a_i) = v^T tanh(W_s s + W_a a_i)
//   context       = sum_i softmax(score)_i a_i
//
// The decoder input is [embedding of previous token; context]; training is
// teacher-forced, decoding is greedy. The GO token both ends the encoder
// input and starts the decoder.
class Seq2seqModel {
 public:
  struct Config {
    int vocab = 105;
    int emb_dim = 300;
    int enc_hidden = 250;  // per direction
    int dec_hidden = 200;
    int att_hidden = 128;
    int answer_len = 8;
    int go_token = -1;
    // Ablation: replace the attention context with the final annotation at
    // every decoder step. Exploratory only.
    bool use_attention = true;
  };

  // The embedding table outlives the model and is never updated.
  Seq2seqModel(const Config& cfg, const Embeddings* emb, std::uint64_t seed);

  const Config& config() const { return cfg_; }

  // One teacher-forced batch; all inputs must share one length. Accumulates
  // parameter gradients, returns the mean cross-entropy per answer token.
  double accumulate_gradients(const std::vector<std::vector<int>>& inputs,
                              const std::vector<std::vector<int>>& targets);
  double loss_batch(const std::vector<std::vector<int>>& inputs,
                    const std::vector<std::vector<int>>& targets) const;
  // Greedy decode: answer_len tokens per input sequence.
  std::vector<std::vector<int>> predict(
      const std::vector<std::vector<int>>& inputs) const;

  std::vector<Parameter*> params();

 private:
  struct Trace;
  void encode(const std::vector<std::vector<int>>& inputs, Trace& tr) const;
  // Attention for one decoder step; returns the context matrix.
  Mat attend(const Mat& s_prev, Trace& tr, int step) const;

  Config cfg_;
  const Embeddings* emb_;
  LstmCell enc_fwd_, enc_bwd_, dec_;
  Parameter W_s_, W_a_, v_a_;
  Parameter W_pr_, b_pr_;
};

}  // namespace scriptqa
