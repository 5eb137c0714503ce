#include "scriptqa/encoding.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "scriptqa/rng.hpp"

namespace scriptqa {

Vec encode_prop(const ConceptInventory& inv, const Prop& p) {
  Vec v = Vec::Zero(inv.prop_units());
  for (int role = 0; role < kNumRoles; ++role) {
    int sid = p[role];
    if (sid < 0) continue;
    Bank bank = kRoleBank[role];
    v[inv.bank_offset(bank) + inv.bank_index(bank, sid)] = 1.0;
  }
  return v;
}

Vec encode_question(const ConceptInventory& inv, int topic) {
  Vec v = Vec::Zero(inv.question_units());
  v[inv.bank_index(Bank::Topics, topic)] = 1.0;
  return v;
}

Prop decode_prop(const ConceptInventory& inv, const Vec& y) {
  Prop p = empty_prop();
  // Agent units: everything above threshold, strongest first.
  std::vector<std::pair<double, int>> agents;
  int aoff = inv.bank_offset(Bank::Agents);
  for (int i = 0; i < inv.bank_size(Bank::Agents); ++i) {
    if (y[aoff + i] > 0.5) agents.push_back({y[aoff + i], i});
  }
  std::sort(agents.begin(), agents.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (agents.size() > 2) agents.resize(2);
  for (std::size_t k = 0; k < agents.size(); ++k) {
    p[k] = inv.bank_concept(Bank::Agents, agents[k].second);
  }
  // Remaining banks: argmax wins if it clears the threshold.
  for (int role = 2; role < kNumRoles; ++role) {
    Bank bank = kRoleBank[role];
    int off = inv.bank_offset(bank);
    int best = 0;
    for (int i = 1; i < inv.bank_size(bank); ++i) {
      if (y[off + i] > y[off + best]) best = i;
    }
    if (y[off + best] > 0.5) p[role] = inv.bank_concept(bank, best);
  }
  return p;
}

std::vector<int> input_tokens(const ConceptInventory& inv, const Story& story,
                              int topic) {
  std::vector<int> toks;
  toks.reserve(story.props.size() * kNumRoles + 3);
  for (const Prop& p : story.props) {
    for (int role = 0; role < kNumRoles; ++role) {
      toks.push_back(p[role] < 0 ? inv.vocab_none() : inv.vocab_of_sid(p[role]));
    }
  }
  toks.push_back(inv.vocab_q());
  toks.push_back(inv.vocab_of_sid(topic));
  toks.push_back(inv.vocab_go());
  return toks;
}

std::vector<int> answer_tokens(const ConceptInventory& inv, const Prop& p) {
  std::vector<int> toks(kNumRoles);
  for (int role = 0; role < kNumRoles; ++role) {
    toks[role] = p[role] < 0 ? inv.vocab_none() : inv.vocab_of_sid(p[role]);
  }
  return toks;
}

Prop tokens_to_prop(const ConceptInventory& inv, const std::vector<int>& toks) {
  Prop p = empty_prop();
  for (int role = 0; role < kNumRoles && role < (int)toks.size(); ++role) {
    int tok = toks[role];
    if (tok == inv.vocab_none()) {
      p[role] = -1;
    } else if (tok == inv.vocab_q() || tok == inv.vocab_go() ||
               tok == inv.pad_id()) {
      p[role] = -2;
    } else {
      p[role] = inv.sid_of_vocab(tok);
    }
  }
  return p;
}

Embeddings Embeddings::deterministic(const ConceptInventory& inv, int dim,
                                     std::uint64_t seed) {
  Embeddings e;
  e.dim = dim;
  e.table = Mat::Zero(dim, inv.vocab_size() + 1);
  for (int t = 0; t < inv.vocab_size(); ++t) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : inv.vocab_word(t)) {
      h ^= (unsigned char)c;
      h *= 1099511628211ull;
    }
    Rng rng(seed ^ h);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    e.table.col(t) = v / v.norm();
  }
  return e;  // PAD column stays zero
}

Embeddings Embeddings::from_file(const std::string& path,
                                 const ConceptInventory& inv, int dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embeddings file: " + path);
  std::map<std::string, Vec> by_word;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    Vec v(dim);
    for (int i = 0; i < dim; ++i) {
      if (!(ss >> v[i]))
        throw std::runtime_error("short embedding row for: " + word);
    }
    by_word[word] = std::move(v);
  }
  Embeddings e;
  e.dim = dim;
  e.table = Mat::Zero(dim, inv.vocab_size() + 1);
  for (int t = 0; t < inv.vocab_size(); ++t) {
    auto it = by_word.find(inv.vocab_word(t));
    if (it == by_word.end())
      throw std::runtime_error("embeddings file missing word: " +
                               inv.vocab_word(t));
    e.table.col(t) = it->second;
  }
  return e;
}

std::uint64_t Embeddings::checksum() const {
  std::uint64_t h = 1469598103934665603ull;
  const double* data = table.data();
  std::size_t n = (std::size_t)table.size() * sizeof(double);
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace scriptqa
