#pragma once

#include <vector>

#include "scriptqa/nn.hpp"
#include "scriptqa/script.hpp"

namespace scriptqa {

// Localist proposition vector: one unit per (bank, concept) pair, both agent
// roles sharing the agents bank. Active units are 1, the rest 0.
Vec encode_prop(const ConceptInventory& inv, const Prop& p);

// One-hot over the topics bank.
Vec encode_question(const ConceptInventory& inv, int topic);

// Unit activations above 0.5 become concepts. Agent units are ranked by
// activation (ties by bank order) and fill agent1 then agent2; the other
// banks take their argmax. Decoding an encoded proposition therefore yields
// the same proposition with the agent pair in bank order.
Prop decode_prop(const ConceptInventory& inv, const Vec& y);

// Token stream for sequence models: 8 tokens per proposition in role order
// with NONE for unfilled roles, then Q, the topic, and GO.
std::vector<int> input_tokens(const ConceptInventory& inv, const Story& story,
                              int topic);
// The 8-token target for an answer proposition.
std::vector<int> answer_tokens(const ConceptInventory& inv, const Prop& p);
// Back from 8 predicted tokens to a proposition. NONE becomes an empty slot;
// a special token in a content position becomes the sentinel -2, which can
// never match a target concept.
Prop tokens_to_prop(const ConceptInventory& inv, const std::vector<int>& toks);

// Frozen word representations, one column per vocabulary entry plus a final
// all-zero PAD column.
struct Embeddings {
  Mat table;  // dim x (vocab_size + 1)
  int dim = 0;

  // Per-word unit-norm Gaussian vectors seeded from the word text, so the
  // table depends only on the vocabulary and the seed.
  static Embeddings deterministic(const ConceptInventory& inv, int dim,
                                  std::uint64_t seed);
  // Text file: one line per word, word then `dim` reals. Every vocabulary
  // entry must be covered; extra words are ignored.
  static Embeddings from_file(const std::string& path,
                              const ConceptInventory& inv, int dim);

  Vec col(int token) const { return table.col(token); }
  std::uint64_t checksum() const;  // FNV-1a over the raw table bytes
};

}  // namespace scriptqa
