#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace scriptqa {

inline constexpr int kNumRoles = 8;
inline constexpr int kNumBanks = 7;
inline constexpr int kTopicRole = 2;

enum class Bank {
  Agents = 0,
  Topics,
  PatientsThemes,
  RecipientsDestinations,
  Locations,
  Manners,
  Attributes,
};

// Role order: agent1, agent2, topic, patientTheme, recipientDestination,
// location, manner, attribute. Both agent roles draw from the agents bank.
inline constexpr std::array<Bank, kNumRoles> kRoleBank = {
    Bank::Agents,    Bank::Agents,  Bank::Topics,  Bank::PatientsThemes,
    Bank::RecipientsDestinations,   Bank::Locations, Bank::Manners,
    Bank::Attributes,
};

extern const std::array<const char*, kNumRoles> kRoleNames;
extern const std::array<const char*, kNumBanks> kBankNames;

struct Person {
  int sid = -1;
  bool male = false;
  bool rich = false;
};

// Concept inventory: role banks (fixing the proposition vector layout),
// entity domains with properties, pronouns, aliases, and the vocabulary.
class ConceptInventory {
public:
  static ConceptInventory load(const std::string& path);
  static ConceptInventory parse(const std::string& text);

  // Interned concept strings.
  int id(std::string_view word) const;  // -1 if unknown
  const std::string& word(int sid) const { return words_[sid]; }
  int num_words() const { return static_cast<int>(words_.size()); }
  // Alias-aware lookup; throws on unknown tokens.
  int resolve(std::string_view token) const;

  // Bank layout.
  const std::vector<int>& bank(Bank b) const { return banks_[idx(b)]; }
  int bank_size(Bank b) const { return static_cast<int>(banks_[idx(b)].size()); }
  int bank_offset(Bank b) const { return offsets_[idx(b)]; }
  int prop_units() const { return prop_units_; }
  int question_units() const { return bank_size(Bank::Topics); }
  // Index within a bank, or -1 if the concept is not a member.
  int bank_index(Bank b, int sid) const;
  bool in_bank(Bank b, int sid) const { return bank_index(b, sid) >= 0; }
  int bank_concept(Bank b, int i) const { return banks_[idx(b)][i]; }

  // Entity domains.
  const std::vector<Person>& persons() const { return persons_; }
  const std::vector<int>& vehicles() const { return vehicles_; }
  bool is_person(int sid) const;
  bool is_vehicle(int sid) const;
  int pronoun(bool male) const { return male ? pronoun_male_ : pronoun_female_; }
  // Property names: male, female, rich, cheap.
  bool person_has(int sid, std::string_view property) const;

  // Vocabulary: deduplicated bank words in layout order, then alias words,
  // then NONE, Q, GO. PAD sits one past the end and is never a target.
  int vocab_size() const { return static_cast<int>(vocab_.size()); }
  const std::string& vocab_word(int v) const { return vocab_[v]; }
  int vocab_of_sid(int sid) const { return vocab_of_sid_[sid]; }
  // Concept behind a vocabulary entry, aliases resolved. Concept words only;
  // throws for NONE, Q, GO.
  int sid_of_vocab(int v) const { return resolve(vocab_[v]); }
  int vocab_id(std::string_view word) const;
  int vocab_none() const { return vocab_none_; }
  int vocab_q() const { return vocab_q_; }
  int vocab_go() const { return vocab_go_; }
  int pad_id() const { return vocab_size(); }

  // FNV-1a over bank layout and vocabulary; stamped into checkpoints.
  std::uint64_t layout_hash() const;

private:
  static int idx(Bank b) { return static_cast<int>(b); }
  int intern(const std::string& w);

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> word_id_;
  std::array<std::vector<int>, kNumBanks> banks_;
  std::array<std::unordered_map<int, int>, kNumBanks> bank_index_;
  std::array<int, kNumBanks> offsets_{};
  int prop_units_ = 0;
  std::vector<Person> persons_;
  std::vector<int> vehicles_;
  int pronoun_male_ = -1, pronoun_female_ = -1;
  std::unordered_map<std::string, std::string> aliases_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> vocab_id_;
  std::vector<int> vocab_of_sid_;
  int vocab_none_ = -1, vocab_q_ = -1, vocab_go_ = -1;
};

}  // namespace scriptqa
