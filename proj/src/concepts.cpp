#include "scriptqa/concepts.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scriptqa {

const std::array<const char*, kNumRoles> kRoleNames = {
    "agent1", "agent2", "topic", "patientTheme", "recipientDestination",
    "location", "manner", "attribute"};

const std::array<const char*, kNumBanks> kBankNames = {
    "agents", "topics", "patientsThemes", "recipientsDestinations",
    "locations", "manners", "attributes"};

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

int bank_by_name(const std::string& name) {
  for (int i = 0; i < kNumBanks; ++i) {
    if (name == kBankNames[i]) return i;
  }
  return -1;
}

}  // namespace

int ConceptInventory::intern(const std::string& w) {
  auto it = word_id_.find(w);
  if (it != word_id_.end()) return it->second;
  int id = static_cast<int>(words_.size());
  words_.push_back(w);
  word_id_.emplace(w, id);
  return id;
}

ConceptInventory ConceptInventory::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open concept inventory: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

ConceptInventory ConceptInventory::parse(const std::string& text) {
  ConceptInventory inv;
  std::istringstream in(text);
  std::string line;
  int bank = -1;
  while (std::getline(in, line)) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    auto parts = split_ws(line);
    if (parts.empty()) continue;
    const std::string& head = parts[0];
    if (head == "BANK") {
      bank = bank_by_name(parts.at(1));
      if (bank < 0) throw std::runtime_error("unknown bank: " + parts[1]);
    } else if (head == "PERSON") {
      bank = -1;
      Person p;
      p.sid = inv.intern(parts.at(1));
      p.male = parts.at(2) == "male";
      p.rich = parts.at(3) == "rich";
      inv.persons_.push_back(p);
    } else if (head == "VEHICLE") {
      bank = -1;
      inv.vehicles_.push_back(inv.intern(parts.at(1)));
    } else if (head == "PRONOUN") {
      bank = -1;
      int sid = inv.intern(parts.at(2));
      (parts.at(1) == "male" ? inv.pronoun_male_ : inv.pronoun_female_) = sid;
    } else if (head == "ALIAS") {
      bank = -1;
      inv.aliases_[parts.at(1)] = parts.at(2);
    } else if (bank >= 0 && parts.size() == 1) {
      int sid = inv.intern(head);
      auto& members = inv.banks_[bank];
      if (inv.bank_index_[bank].count(sid)) {
        throw std::runtime_error("duplicate bank entry: " + head);
      }
      inv.bank_index_[bank][sid] = static_cast<int>(members.size());
      members.push_back(sid);
    } else {
      throw std::runtime_error("bad inventory line: " + line);
    }
  }

  int off = 0;
  for (int b = 0; b < kNumBanks; ++b) {
    inv.offsets_[b] = off;
    off += static_cast<int>(inv.banks_[b].size());
  }
  inv.prop_units_ = off;

  inv.vocab_of_sid_.assign(inv.words_.size(), -1);
  auto add_vocab = [&inv](const std::string& w) {
    if (inv.vocab_id_.count(w)) return;
    inv.vocab_id_[w] = static_cast<int>(inv.vocab_.size());
    inv.vocab_.push_back(w);
  };
  for (int b = 0; b < kNumBanks; ++b) {
    for (int sid : inv.banks_[b]) add_vocab(inv.words_[sid]);
  }
  for (auto& [alias, target] : inv.aliases_) {
    if (inv.word_id_.find(target) == inv.word_id_.end() ||
        !inv.vocab_id_.count(target)) {
      throw std::runtime_error("alias target not a bank concept: " + target);
    }
  }
  // File order for alias words (re-scan text to keep it deterministic).
  {
    std::istringstream in2(text);
    std::string l2;
    while (std::getline(in2, l2)) {
      auto parts = split_ws(l2);
      if (parts.size() >= 2 && parts[0] == "ALIAS") add_vocab(parts[1]);
    }
  }
  add_vocab("NONE");
  add_vocab("Q");
  add_vocab("GO");
  inv.vocab_none_ = inv.vocab_id_.at("NONE");
  inv.vocab_q_ = inv.vocab_id_.at("Q");
  inv.vocab_go_ = inv.vocab_id_.at("GO");
  for (std::size_t sid = 0; sid < inv.words_.size(); ++sid) {
    auto it = inv.vocab_id_.find(inv.words_[sid]);
    if (it != inv.vocab_id_.end()) inv.vocab_of_sid_[sid] = it->second;
  }
  return inv;
}

int ConceptInventory::id(std::string_view word) const {
  auto it = word_id_.find(std::string(word));
  return it == word_id_.end() ? -1 : it->second;
}

int ConceptInventory::resolve(std::string_view token) const {
  std::string t(token);
  if (auto it = aliases_.find(t); it != aliases_.end()) t = it->second;
  int sid = id(t);
  if (sid < 0) throw std::runtime_error("unknown concept: " + std::string(token));
  return sid;
}

int ConceptInventory::bank_index(Bank b, int sid) const {
  const auto& m = bank_index_[idx(b)];
  auto it = m.find(sid);
  return it == m.end() ? -1 : it->second;
}

bool ConceptInventory::is_person(int sid) const {
  for (const auto& p : persons_) {
    if (p.sid == sid) return true;
  }
  return false;
}

bool ConceptInventory::is_vehicle(int sid) const {
  for (int v : vehicles_) {
    if (v == sid) return true;
  }
  return false;
}

bool ConceptInventory::person_has(int sid, std::string_view property) const {
  for (const auto& p : persons_) {
    if (p.sid != sid) continue;
    if (property == "male") return p.male;
    if (property == "female") return !p.male;
    if (property == "rich") return p.rich;
    if (property == "cheap") return !p.rich;
    throw std::runtime_error("unknown property: " + std::string(property));
  }
  return false;
}

int ConceptInventory::vocab_id(std::string_view word) const {
  auto it = vocab_id_.find(std::string(word));
  return it == vocab_id_.end() ? -1 : it->second;
}

std::uint64_t ConceptInventory::layout_hash() const {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (int b = 0; b < kNumBanks; ++b) {
    mix(kBankNames[b]);
    for (int sid : banks_[b]) mix(words_[sid]);
  }
  for (const auto& w : vocab_) mix(w);
  return h;
}

}  // namespace scriptqa
