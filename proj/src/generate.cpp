#include "scriptqa/generate.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace scriptqa {

namespace {

// Non-choice slot value under a binding.
int resolve_slot(const SlotSpec& spec, const Binding& binding,
                 const ConceptInventory& inv) {
  switch (spec.kind) {
    case SlotSpec::Kind::Lit:
      return spec.lit;
    case SlotSpec::Kind::Var:
      return binding[spec.var];
    case SlotSpec::Kind::Pronoun: {
      int person = binding[spec.var];
      for (const auto& p : inv.persons()) {
        if (p.sid == person) return inv.pronoun(p.male);
      }
      throw std::runtime_error("pronoun of non-person binding");
    }
    case SlotSpec::Kind::Choice:
      throw std::runtime_error("choice must be expanded by caller");
  }
  throw std::runtime_error("bad slot kind");
}

// Rule-forced value for an emit, or -1 when the rule does not bind it.
int forced_value(const Script& sc, const EmitNode& emit,
                 const std::vector<Prop>& so_far) {
  if (emit.topic != sc.rule.cons_topic) return -1;
  for (const auto& p : so_far) {
    if (p[kTopicRole] == sc.rule.ant_topic) {
      return sc.rule.apply(p[sc.rule.ant_role]);
    }
  }
  throw std::runtime_error(sc.name + ": rule consequent before antecedent");
}

bool predicate_holds(const ConceptInventory& inv, const Binding& binding,
                     const BodyNode& node) {
  return inv.person_has(binding[node.var], node.property);
}

}  // namespace

Domains domains_for(const Script& sc, const ConceptInventory& inv,
                    Condition cond) {
  Domains d;
  for (const auto& p : inv.persons()) d.persons.push_back(p.sid);
  d.vehicles = inv.vehicles();
  if (cond == Condition::Unrestricted) return d;

  auto apply = [&](std::vector<int>& domain) {
    bool targeted = std::any_of(domain.begin(), domain.end(), [&](int sid) {
      return sc.is_restricted_concept(sid);
    });
    if (cond == Condition::Restricted) {
      std::erase_if(domain, [&](int sid) { return sc.is_restricted_concept(sid); });
    } else if (targeted) {  // Violation: pin to the restricted concepts
      std::erase_if(domain, [&](int sid) { return !sc.is_restricted_concept(sid); });
    }
  };
  apply(d.persons);
  apply(d.vehicles);
  return d;
}

std::vector<Binding> enumerate_bindings(const Script& sc,
                                        const ConceptInventory& inv,
                                        Condition cond) {
  Domains dom = domains_for(sc, inv, cond);
  std::vector<Binding> out;
  Binding binding(sc.vars.size(), -1);

  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == sc.vars.size()) {
      out.push_back(binding);
      return;
    }
    const VarDecl& v = sc.vars[i];
    switch (v.type) {
      case VarDecl::Type::Person:
        for (int sid : dom.persons) {
          if (v.distinct_from >= 0 && binding[v.distinct_from] == sid) continue;
          binding[i] = sid;
          rec(i + 1);
        }
        break;
      case VarDecl::Type::Vehicle:
        for (int sid : dom.vehicles) {
          binding[i] = sid;
          rec(i + 1);
        }
        break;
      case VarDecl::Type::Pick:
        for (int ref : v.pick_from) {
          binding[i] = binding[ref];
          rec(i + 1);
        }
        break;
    }
    binding[i] = -1;
  };
  rec(0);
  return out;
}

namespace {

std::vector<Prop> expand_emit(const Script& sc, const ConceptInventory& inv,
                              const EmitNode& emit, const Binding& binding,
                              const std::vector<Prop>& so_far) {
  int forced = forced_value(sc, emit, so_far);
  std::vector<Prop> props(1, empty_prop());
  props[0][kTopicRole] = emit.topic;
  for (int r = 0; r < kNumRoles; ++r) {
    if (r == kTopicRole || !emit.slots[r].has_value()) continue;
    const SlotSpec& spec = *emit.slots[r];
    std::vector<int> values;
    if (spec.kind == SlotSpec::Kind::Choice) {
      if (forced >= 0 && r == sc.rule.cons_role) {
        values.push_back(forced);
      } else {
        for (const auto& item : spec.items) {
          values.push_back(resolve_slot(item, binding, inv));
        }
      }
    } else {
      int v = resolve_slot(spec, binding, inv);
      if (forced >= 0 && r == sc.rule.cons_role && v != forced) {
        throw std::runtime_error(sc.name + ": literal consequent breaks rule");
      }
      values.push_back(v);
    }
    std::vector<Prop> next;
    next.reserve(props.size() * values.size());
    for (const auto& p : props) {
      for (int v : values) {
        next.push_back(p);
        next.back()[r] = v;
      }
    }
    props = std::move(next);
  }
  return props;
}

std::vector<std::vector<Prop>> expand_seq(const Script& sc,
                                          const ConceptInventory& inv,
                                          const Body& body,
                                          const Binding& binding,
                                          std::vector<std::vector<Prop>> stories);

std::vector<std::vector<Prop>> expand_optional(
    const Script& sc, const ConceptInventory& inv, const Body& body, double p,
    const Binding& binding, std::vector<std::vector<Prop>> stories) {
  std::vector<std::vector<Prop>> out;
  if (p < 1.0) out = stories;
  if (p > 0.0) {
    auto included = expand_seq(sc, inv, body, binding, std::move(stories));
    out.insert(out.end(), included.begin(), included.end());
  }
  return out;
}

std::vector<std::vector<Prop>> expand_seq(const Script& sc,
                                          const ConceptInventory& inv,
                                          const Body& body,
                                          const Binding& binding,
                                          std::vector<std::vector<Prop>> stories) {
  for (const auto& node : body) {
    switch (node.type) {
      case BodyNode::Type::Emit: {
        std::vector<std::vector<Prop>> next;
        for (const auto& s : stories) {
          for (const auto& p : expand_emit(sc, inv, node.emit, binding, s)) {
            next.push_back(s);
            next.back().push_back(p);
          }
        }
        stories = std::move(next);
        break;
      }
      case BodyNode::Type::Or: {
        std::vector<std::vector<Prop>> next;
        for (const auto& branch : node.branches) {
          auto expanded = expand_seq(sc, inv, branch.body, binding, stories);
          next.insert(next.end(), expanded.begin(), expanded.end());
        }
        stories = std::move(next);
        break;
      }
      case BodyNode::Type::And:
        stories = expand_optional(sc, inv, node.body, node.p, binding,
                                  std::move(stories));
        break;
      case BodyNode::Type::If:
        if (predicate_holds(inv, binding, node)) {
          stories = expand_optional(sc, inv, node.body, node.p, binding,
                                    std::move(stories));
        }
        break;
    }
  }
  return stories;
}

}  // namespace

std::vector<Story> enumerate_stories(const Script& sc,
                                     const ConceptInventory& inv,
                                     const ScriptSet& set, Condition cond) {
  int script_id = set.index_of(sc.name);
  std::vector<Story> out;
  for (const auto& binding : enumerate_bindings(sc, inv, cond)) {
    for (auto& props :
         expand_seq(sc, inv, sc.body, binding, {std::vector<Prop>{}})) {
      Story s;
      s.script = script_id;
      s.props = std::move(props);
      validate_story(inv, sc, s, cond);
      out.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

void sample_seq(Rng& rng, const Script& sc, const ConceptInventory& inv,
                const Body& body, const Binding& binding,
                std::vector<Prop>& props) {
  for (const auto& node : body) {
    switch (node.type) {
      case BodyNode::Type::Emit: {
        int forced = forced_value(sc, node.emit, props);
        Prop p = empty_prop();
        p[kTopicRole] = node.emit.topic;
        for (int r = 0; r < kNumRoles; ++r) {
          if (r == kTopicRole || !node.emit.slots[r].has_value()) continue;
          const SlotSpec& spec = *node.emit.slots[r];
          if (spec.kind == SlotSpec::Kind::Choice) {
            if (forced >= 0 && r == sc.rule.cons_role) {
              p[r] = forced;
            } else {
              const SlotSpec& pick = spec.items[rng.index(spec.items.size())];
              p[r] = resolve_slot(pick, binding, inv);
            }
          } else {
            p[r] = resolve_slot(spec, binding, inv);
          }
        }
        props.push_back(p);
        break;
      }
      case BodyNode::Type::Or: {
        double x = rng.uniform();
        double acc = 0.0;
        const OrBranch* chosen = &node.branches.back();
        for (const auto& branch : node.branches) {
          acc += branch.weight;
          if (x < acc) {
            chosen = &branch;
            break;
          }
        }
        sample_seq(rng, sc, inv, chosen->body, binding, props);
        break;
      }
      case BodyNode::Type::And:
        if (rng.bernoulli(node.p)) {
          sample_seq(rng, sc, inv, node.body, binding, props);
        }
        break;
      case BodyNode::Type::If:
        if (predicate_holds(inv, binding, node) && rng.bernoulli(node.p)) {
          sample_seq(rng, sc, inv, node.body, binding, props);
        }
        break;
    }
  }
}

}  // namespace

Story sample_story(Rng& rng, const Script& sc, const ConceptInventory& inv,
                   const ScriptSet& set, Condition cond) {
  Domains dom = domains_for(sc, inv, cond);
  Binding binding(sc.vars.size(), -1);
  for (std::size_t i = 0; i < sc.vars.size(); ++i) {
    const VarDecl& v = sc.vars[i];
    switch (v.type) {
      case VarDecl::Type::Person: {
        int sid = dom.persons[rng.index(dom.persons.size())];
        while (v.distinct_from >= 0 && binding[v.distinct_from] == sid) {
          sid = dom.persons[rng.index(dom.persons.size())];
        }
        binding[i] = sid;
        break;
      }
      case VarDecl::Type::Vehicle:
        binding[i] = dom.vehicles[rng.index(dom.vehicles.size())];
        break;
      case VarDecl::Type::Pick:
        binding[i] = binding[v.pick_from[rng.index(v.pick_from.size())]];
        break;
    }
  }
  Story s;
  s.script = set.index_of(sc.name);
  sample_seq(rng, sc, inv, sc.body, binding, s.props);
  validate_story(inv, sc, s, cond);
  return s;
}

Story sample_story(Rng& rng, const ScriptSet& set, const ConceptInventory& inv,
                   Condition cond) {
  const Script& sc = set.scripts[rng.index(set.scripts.size())];
  return sample_story(rng, sc, inv, set, cond);
}

}  // namespace scriptqa
