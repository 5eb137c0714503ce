#include "scriptqa/script.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace scriptqa {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

int slot_key_role(const std::string& key) {
  if (key == "agent1") return 0;
  if (key == "agent2") return 1;
  if (key == "patient") return 3;
  if (key == "recipient") return 4;
  if (key == "location") return 5;
  if (key == "manner") return 6;
  if (key == "attribute") return 7;
  throw std::runtime_error("unknown slot key: " + key);
}

int indent_of(const std::string& line) {
  std::size_t n = 0;
  while (n < line.size() && line[n] == ' ') ++n;
  if (n % 2 != 0) throw std::runtime_error("odd indent: " + line);
  return static_cast<int>(n / 2);
}

}  // namespace

int Rule::apply(int ant_value) const {
  for (auto& [a, c] : mapping) {
    if (a == ant_value) return c;
  }
  throw std::runtime_error("rule has no mapping for antecedent value");
}

int Rule::flip(int cons_value) const {
  for (auto& [a, c] : mapping) {
    if (c != cons_value) return c;
  }
  throw std::runtime_error("rule flip: value not in range");
}

int Script::var_index(std::string_view ref) const {
  std::string_view name = ref;
  if (!name.empty() && name.front() == '$') name.remove_prefix(1);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].name == name) return static_cast<int>(i);
  }
  throw std::runtime_error("unknown variable: " + std::string(ref));
}

bool Script::is_restricted_concept(int sid) const {
  return std::find(restricted_concepts.begin(), restricted_concepts.end(),
                   sid) != restricted_concepts.end();
}

namespace {

class Parser {
public:
  Parser(const std::string& text, const ConceptInventory& inv) : inv_(inv) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    while (std::getline(in, line)) {
      std::string stripped = line;
      if (auto pos = stripped.find('#'); pos != std::string::npos) {
        stripped.resize(pos);
      }
      if (split_ws(stripped).empty()) continue;
      auto parts = split_ws(stripped);
      const std::string& head = parts[0];
      if (section != "BODY" &&
          (head == "SCRIPT" || head == "VARS" || head == "RESTRICT" ||
           head == "RULE" || head == "BODY")) {
        section = head;
        if (head == "SCRIPT") {
          sc_.name = parts.at(1);
        } else if (head == "RESTRICT") {
          parse_restrict(parts);
        } else if (head == "RULE") {
          parse_rule_header(stripped);
        }
        continue;
      }
      if (section == "VARS") {
        parse_var(parts);
      } else if (section == "RULE") {
        parse_rule_mapping(stripped);
      } else if (section == "BODY") {
        body_lines_.push_back(stripped);
      } else {
        throw std::runtime_error("stray line outside section: " + stripped);
      }
    }
    std::size_t i = 0;
    sc_.body = parse_seq(i, 0);
    if (i != body_lines_.size()) {
      throw std::runtime_error("unparsed body line: " + body_lines_[i]);
    }
  }

  Script take() { return std::move(sc_); }

private:
  void parse_var(const std::vector<std::string>& parts) {
    VarDecl v;
    if (parts[0] == "person") {
      v.type = VarDecl::Type::Person;
      v.name = strip_sigil(parts.at(1));
      if (parts.size() > 2) {
        if (parts.at(2) != "!=") throw std::runtime_error("bad person decl");
        sc_.vars.push_back(v);
        sc_.vars.back().distinct_from = sc_.var_index(parts.at(3));
        return;
      }
    } else if (parts[0] == "vehicle") {
      v.type = VarDecl::Type::Vehicle;
      v.name = strip_sigil(parts.at(1));
    } else if (parts[0] == "pick") {
      v.type = VarDecl::Type::Pick;
      v.name = strip_sigil(parts.at(1));
      if (parts.at(2) != "from") throw std::runtime_error("bad pick decl");
      sc_.vars.push_back(v);
      for (std::size_t i = 3; i < parts.size(); ++i) {
        sc_.vars.back().pick_from.push_back(sc_.var_index(parts[i]));
      }
      return;
    } else {
      throw std::runtime_error("unknown variable type: " + parts[0]);
    }
    sc_.vars.push_back(v);
  }

  void parse_restrict(const std::vector<std::string>& parts) {
    auto never = std::find(parts.begin(), parts.end(), "never");
    if (parts.at(1) != "roles" || never == parts.end()) {
      throw std::runtime_error("bad RESTRICT line");
    }
    for (auto it = parts.begin() + 2; it != never; ++it) {
      sc_.restricted_roles.push_back(slot_key_role(*it));
    }
    for (auto it = never + 1; it != parts.end(); ++it) {
      sc_.restricted_concepts.push_back(inv_.resolve(*it));
    }
  }

  void parse_rule_header(const std::string& line) {
    auto arrow = line.find("->");
    if (arrow == std::string::npos) throw std::runtime_error("bad RULE line");
    auto parse_side = [this](std::string side, int& topic, int& role) {
      auto dot = side.find('.');
      if (dot == std::string::npos) throw std::runtime_error("bad rule side");
      auto ws = [](std::string s) {
        std::string out;
        for (char c : s) {
          if (!std::isspace(static_cast<unsigned char>(c))) out += c;
        }
        return out;
      };
      topic = inv_.resolve(ws(side.substr(0, dot)));
      role = slot_key_role(ws(side.substr(dot + 1)));
    };
    parse_side(line.substr(4, arrow - 4), sc_.rule.ant_topic, sc_.rule.ant_role);
    parse_side(line.substr(arrow + 2), sc_.rule.cons_topic, sc_.rule.cons_role);
  }

  void parse_rule_mapping(const std::string& line) {
    auto arrow = line.find("->");
    if (arrow == std::string::npos) throw std::runtime_error("bad mapping: " + line);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    int a = inv_.resolve(trim(line.substr(0, arrow)));
    int c = inv_.resolve(trim(line.substr(arrow + 2)));
    sc_.rule.mapping.emplace_back(a, c);
  }

  static std::string strip_sigil(const std::string& s) {
    if (s.empty() || s.front() != '$') {
      throw std::runtime_error("variable name must start with $: " + s);
    }
    return s.substr(1);
  }

  SlotSpec parse_slotspec(const std::string& text) {
    SlotSpec spec;
    if (text.size() >= 2 && text.front() == '{' && text.back() == '}') {
      spec.kind = SlotSpec::Kind::Choice;
      std::string inner = text.substr(1, text.size() - 2);
      std::string item;
      std::istringstream ss(inner);
      while (std::getline(ss, item, '|')) {
        spec.items.push_back(parse_slotspec(item));
      }
      if (spec.items.size() < 2) throw std::runtime_error("bad choice: " + text);
      return spec;
    }
    if (text.starts_with("@pronoun(") && text.back() == ')') {
      spec.kind = SlotSpec::Kind::Pronoun;
      spec.var = sc_.var_index(text.substr(9, text.size() - 10));
      return spec;
    }
    if (text.front() == '$') {
      spec.kind = SlotSpec::Kind::Var;
      spec.var = sc_.var_index(text);
      return spec;
    }
    spec.kind = SlotSpec::Kind::Lit;
    spec.lit = inv_.resolve(text);
    return spec;
  }

  EmitNode parse_emit(const std::vector<std::string>& parts) {
    EmitNode e;
    e.topic = inv_.resolve(parts.at(1));
    if (!inv_.in_bank(Bank::Topics, e.topic)) {
      throw std::runtime_error("topic not in topics bank: " + parts[1]);
    }
    for (std::size_t i = 2; i < parts.size(); ++i) {
      auto eq = parts[i].find('=');
      if (eq == std::string::npos) throw std::runtime_error("bad slot: " + parts[i]);
      int role = slot_key_role(parts[i].substr(0, eq));
      e.slots[role] = parse_slotspec(parts[i].substr(eq + 1));
    }
    return e;
  }

  Body parse_seq(std::size_t& i, int depth) {
    Body nodes;
    while (i < body_lines_.size()) {
      int d = indent_of(body_lines_[i]);
      if (d < depth) break;
      if (d > depth) throw std::runtime_error("bad indent: " + body_lines_[i]);
      auto parts = split_ws(body_lines_[i]);
      BodyNode node;
      if (parts[0] == "EMIT") {
        node.type = BodyNode::Type::Emit;
        node.emit = parse_emit(parts);
        ++i;
      } else if (parts[0] == "AND") {
        node.type = BodyNode::Type::And;
        node.p = std::stod(parts.at(1));
        ++i;
        node.body = parse_seq(i, depth + 1);
      } else if (parts[0] == "IF") {
        if (parts.at(2) != "is") throw std::runtime_error("bad IF line");
        node.type = BodyNode::Type::If;
        node.var = sc_.var_index(parts.at(1));
        node.property = parts.at(3);
        node.p = std::stod(parts.at(4));
        ++i;
        node.body = parse_seq(i, depth + 1);
      } else if (parts[0] == "OR") {
        node.type = BodyNode::Type::Or;
        ++i;
        double total = 0.0;
        while (i < body_lines_.size() && indent_of(body_lines_[i]) == depth + 1) {
          std::string b = split_ws(body_lines_[i]).at(0);
          if (b.back() != ':') break;
          OrBranch branch;
          branch.weight = std::stod(b.substr(0, b.size() - 1));
          total += branch.weight;
          ++i;
          branch.body = parse_seq(i, depth + 2);
          node.branches.push_back(std::move(branch));
        }
        if (node.branches.size() < 2 || std::abs(total - 1.0) > 1e-9) {
          throw std::runtime_error("OR branch weights must sum to 1");
        }
      } else {
        throw std::runtime_error("unknown body node: " + body_lines_[i]);
      }
      nodes.push_back(std::move(node));
    }
    return nodes;
  }

  const ConceptInventory& inv_;
  Script sc_;
  std::vector<std::string> body_lines_;
};

}  // namespace

Script Script::parse(const std::string& text, const ConceptInventory& inv) {
  Parser p(text, inv);
  Script sc = p.take();
  if (sc.name.empty()) throw std::runtime_error("script has no name");
  if (sc.rule.mapping.empty()) throw std::runtime_error("script has no rule");
  return sc;
}

Script Script::parse_file(const std::string& path, const ConceptInventory& inv) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open script: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), inv);
}

ScriptSet ScriptSet::load(const std::string& dir, const ConceptInventory& inv) {
  namespace fs = std::filesystem;
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".script") {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  ScriptSet set;
  for (const auto& p : paths) set.scripts.push_back(Script::parse_file(p, inv));
  return set;
}

const Script& ScriptSet::by_name(std::string_view name) const {
  return scripts[index_of(name)];
}

int ScriptSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < scripts.size(); ++i) {
    if (scripts[i].name == name) return static_cast<int>(i);
  }
  throw std::runtime_error("unknown script: " + std::string(name));
}

std::string serialize_prop(const ConceptInventory& inv, const Prop& p) {
  std::string out;
  for (int r = 0; r < kNumRoles; ++r) {
    if (r) out += ',';
    out += p[r] < 0 ? "NONE" : inv.word(p[r]);
  }
  return out;
}

std::string serialize_story(const ConceptInventory& inv, const ScriptSet& set,
                            const Story& s) {
  std::string out = set.scripts[s.script].name;
  for (const auto& p : s.props) {
    out += '|';
    out += serialize_prop(inv, p);
  }
  return out;
}

std::string serialize_item(const ConceptInventory& inv, const ScriptSet& set,
                           const QAItem& item) {
  return serialize_story(inv, set, item.story) + "||" + inv.word(item.topic) +
         "||" + serialize_prop(inv, item.answer);
}

namespace {

Prop parse_prop_fields(const ConceptInventory& inv, const std::string& text) {
  Prop p = empty_prop();
  std::istringstream ss(text);
  std::string field;
  int r = 0;
  while (std::getline(ss, field, ',')) {
    if (r >= kNumRoles) throw std::runtime_error("too many fields: " + text);
    p[r++] = field == "NONE" ? -1 : inv.resolve(field);
  }
  if (r != kNumRoles) throw std::runtime_error("too few fields: " + text);
  return p;
}

}  // namespace

Story parse_story(const ConceptInventory& inv, const ScriptSet& set,
                  const std::string& line) {
  Story s;
  std::istringstream ss(line);
  std::string part;
  if (!std::getline(ss, part, '|')) throw std::runtime_error("empty story line");
  s.script = set.index_of(part);
  while (std::getline(ss, part, '|')) {
    s.props.push_back(parse_prop_fields(inv, part));
  }
  if (s.props.empty()) throw std::runtime_error("story has no propositions");
  return s;
}

QAItem parse_item(const ConceptInventory& inv, const ScriptSet& set,
                  const std::string& line) {
  auto sep = line.find("||");
  auto sep2 = line.find("||", sep + 2);
  if (sep == std::string::npos || sep2 == std::string::npos) {
    throw std::runtime_error("bad item line");
  }
  QAItem item;
  item.story = parse_story(inv, set, line.substr(0, sep));
  item.topic = inv.resolve(line.substr(sep + 2, sep2 - sep - 2));
  item.answer = parse_prop_fields(inv, line.substr(sep2 + 2));
  return item;
}

void validate_story(const ConceptInventory& inv, const Script& sc,
                    const Story& story, Condition cond) {
  std::set<int> topics;
  for (const auto& p : story.props) {
    if (p[kTopicRole] < 0) throw std::runtime_error("proposition without topic");
    if (!topics.insert(p[kTopicRole]).second) {
      throw std::runtime_error(sc.name + ": repeated topic " +
                               inv.word(p[kTopicRole]));
    }
    for (int r = 0; r < kNumRoles; ++r) {
      if (p[r] < 0) continue;
      if (!inv.in_bank(kRoleBank[r], p[r])) {
        throw std::runtime_error(sc.name + ": " + inv.word(p[r]) +
                                 " not in bank for role " + kRoleNames[r]);
      }
    }
  }
  const Rule& rule = sc.rule;
  const Prop* ant = nullptr;
  const Prop* cons = nullptr;
  for (const auto& p : story.props) {
    if (p[kTopicRole] == rule.ant_topic) ant = &p;
    if (p[kTopicRole] == rule.cons_topic) cons = &p;
  }
  if (ant == nullptr || cons == nullptr) {
    throw std::runtime_error(sc.name + ": rule propositions missing");
  }
  // The rule holds in every generated story; correlation-violation stories
  // are built downstream by flipping the consequent of a copy.
  if (rule.apply((*ant)[rule.ant_role]) != (*cons)[rule.cons_role]) {
    throw std::runtime_error(sc.name + ": deterministic rule broken");
  }
  if (cond == Condition::Restricted) {
    for (const auto& p : story.props) {
      for (int r = 0; r < kNumRoles; ++r) {
        if (p[r] >= 0 && sc.is_restricted_concept(p[r])) {
          throw std::runtime_error(sc.name + ": restricted concept present");
        }
      }
    }
  }
}

}  // namespace scriptqa
