#pragma once

#include <vector>

#include "scriptqa/rng.hpp"
#include "scriptqa/script.hpp"

namespace scriptqa {

// Variable binding: one concept id per declared variable.
using Binding = std::vector<int>;

// Sampling domains for a script's variables under a condition.
// Restricted removes the restricted concepts; Violation pins the domain the
// restriction targets to exactly the restricted concepts.
struct Domains {
  std::vector<int> persons;
  std::vector<int> vehicles;
};
Domains domains_for(const Script& sc, const ConceptInventory& inv,
                    Condition cond);

// All variable bindings, in deterministic order.
std::vector<Binding> enumerate_bindings(const Script& sc,
                                        const ConceptInventory& inv,
                                        Condition cond);

// Exhaustive story enumeration; every story is validated before return.
std::vector<Story> enumerate_stories(const Script& sc,
                                     const ConceptInventory& inv,
                                     const ScriptSet& set, Condition cond);

// One random story from one script (tree walk by branch weights).
Story sample_story(Rng& rng, const Script& sc, const ConceptInventory& inv,
                   const ScriptSet& set, Condition cond);

// One random story from a uniformly chosen script.
Story sample_story(Rng& rng, const ScriptSet& set, const ConceptInventory& inv,
                   Condition cond);

}  // namespace scriptqa
