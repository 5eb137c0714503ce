#pragma once

#include <cstdint>
#include <vector>

#include "scriptqa/nn.hpp"

namespace scriptqa {

// Recurrent gestalt question answerer. Each proposition vector passes
// through a combination layer into a recurrent gestalt layer; a query
// network reads the final gestalt together with a question vector and
// reconstructs the queried proposition. All layers are sigmoid.
//
//   comb_t  = sigma(W_in p_t + W_rec g_{t-1} + b_c)     g_0 = 0
//   g_t     = sigma(W_cg comb_t + b_g)
//   e       = sigma(W_qe [g_T; q] + b_e)
//   output  = sigma(W_out e + b_o)
//
// Training treats every story prefix as one example: read propositions
// 1..t, query the topic of proposition t, reconstruct proposition t, and
// take one optimizer step on the binary cross-entropy.
class SgModel {
 public:
  struct Config {
    int prop_units = 137;
    int question_units = 34;
    int hidden = 100;
  };

  SgModel(const Config& cfg, std::uint64_t seed);

  const Config& config() const { return cfg_; }

  // Output activations for a story prefix and question.
  Vec answer(const std::vector<Vec>& props, const Vec& question) const;
  double loss(const std::vector<Vec>& props, const Vec& question,
              const Vec& target) const;
  // Full backward through time; accumulates parameter gradients and
  // returns the loss. The caller owns zeroing and the optimizer step.
  double accumulate_gradients(const std::vector<Vec>& props,
                              const Vec& question, const Vec& target);
  // One training event per (prefix, question) pair: every prefix of the
  // story is queried with every question column against the matching
  // target column. Gradients of the mean event loss accumulate from a
  // single unroll; returns that mean.
  double accumulate_story_gradients(const std::vector<Vec>& props,
                                    const Mat& questions, const Mat& targets);

  std::vector<Parameter*> params();

 private:
  Vec forward(const std::vector<Vec>& props, const Vec& question,
              std::vector<Vec>* combs, std::vector<Vec>* gestalts,
              Vec* extraction) const;

  Config cfg_;
  Parameter W_in_, W_rec_, b_c_;
  Parameter W_cg_, b_g_;
  Parameter W_qe_, b_e_;
  Parameter W_out_, b_o_;
};

}  // namespace scriptqa
