#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "scriptqa/concepts.hpp"

namespace scriptqa {

// A proposition: one concept id per role, -1 for unfilled.
using Prop = std::array<int, kNumRoles>;

inline Prop empty_prop() {
  Prop p;
  p.fill(-1);
  return p;
}

struct Story {
  int script = -1;
  std::vector<Prop> props;
  bool operator==(const Story&) const = default;
};

struct QAItem {
  Story story;
  int topic = -1;
  Prop answer;
  bool operator==(const QAItem&) const = default;
};

enum class Condition { Unrestricted, Restricted, Violation };

struct SlotSpec {
  enum class Kind { Lit, Var, Pronoun, Choice };
  Kind kind = Kind::Lit;
  int lit = -1;                  // concept id
  int var = -1;                  // variable index
  std::vector<SlotSpec> items;   // choice alternatives
};

struct EmitNode {
  int topic = -1;
  std::array<std::optional<SlotSpec>, kNumRoles> slots;
};

struct BodyNode;
using Body = std::vector<BodyNode>;

struct OrBranch {
  double weight = 0.0;
  Body body;
};

struct BodyNode {
  enum class Type { Emit, Or, And, If };
  Type type = Type::Emit;
  EmitNode emit;                  // Emit
  std::vector<OrBranch> branches; // Or
  double p = 1.0;                 // And, If
  int var = -1;                   // If: variable index
  std::string property;           // If: male/female/rich/cheap
  Body body;                      // And, If
};

struct VarDecl {
  enum class Type { Person, Vehicle, Pick };
  Type type = Type::Person;
  std::string name;               // without the $ sigil
  int distinct_from = -1;         // Person: variable index or -1
  std::vector<int> pick_from;     // Pick: variable indices
};

struct Rule {
  int ant_topic = -1, cons_topic = -1;
  int ant_role = -1, cons_role = -1;
  std::vector<std::pair<int, int>> mapping;  // antecedent value -> consequent value
  int apply(int ant_value) const;
  // The other consequent value (mappings here are two-valued bijections).
  int flip(int cons_value) const;
};

class Script {
public:
  static Script parse_file(const std::string& path, const ConceptInventory& inv);
  static Script parse(const std::string& text, const ConceptInventory& inv);

  std::string name;
  std::vector<VarDecl> vars;
  std::vector<int> restricted_roles;     // role indices
  std::vector<int> restricted_concepts;  // concept ids
  Rule rule;
  Body body;

  int var_index(std::string_view name_with_sigil) const;
  bool is_restricted_concept(int sid) const;
};

struct ScriptSet {
  std::vector<Script> scripts;  // sorted by script name
  static ScriptSet load(const std::string& dir, const ConceptInventory& inv);
  const Script& by_name(std::string_view name) const;
  int index_of(std::string_view name) const;
};

// Canonical text forms, used for digests and on-disk corpora.
std::string serialize_prop(const ConceptInventory& inv, const Prop& p);
std::string serialize_story(const ConceptInventory& inv, const ScriptSet& set,
                            const Story& s);
std::string serialize_item(const ConceptInventory& inv, const ScriptSet& set,
                           const QAItem& item);
Story parse_story(const ConceptInventory& inv, const ScriptSet& set,
                  const std::string& line);
QAItem parse_item(const ConceptInventory& inv, const ScriptSet& set,
                  const std::string& line);

// Throws std::runtime_error when a story violates a structural invariant:
// unknown concepts, bank mismatches, repeated topics, a broken rule, or a
// restricted concept under Condition::Restricted.
void validate_story(const ConceptInventory& inv, const Script& sc,
                    const Story& story, Condition cond);

}  // namespace scriptqa
