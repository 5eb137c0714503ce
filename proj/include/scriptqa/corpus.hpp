#pragma once

#include <string>
#include <vector>

#include "scriptqa/generate.hpp"
#include "scriptqa/rng.hpp"
#include "scriptqa/script.hpp"

namespace scriptqa {

// Question-answer test set builders. All of them are deterministic given
// their inputs; the shuffled set additionally takes a seeded generator.

// One item per proposition: question is the topic, answer the proposition.
std::vector<QAItem> baseline_items(const std::vector<Story>& stories);

// Baseline items with the story propositions in a random order (fresh
// permutation per item; question and answer unchanged).
std::vector<QAItem> shuffled_items(const std::vector<Story>& stories, Rng& rng);

// One item per story: the rule consequent's value is flipped and the
// question asks about the consequent topic.
std::vector<QAItem> correlation_violation_items(const ScriptSet& set,
                                                const std::vector<Story>& stories);

// For violation-condition stories: one item per proposition that mentions a
// restricted concept.
std::vector<QAItem> concept_violation_items(const ScriptSet& set,
                                            const std::vector<Story>& stories);

// One item per story: the rule consequent proposition is removed from the
// story and asked about; the answer is the removed proposition.
std::vector<QAItem> inference_probe_items(const ScriptSet& set,
                                          const std::vector<Story>& stories);

// Full enumeration across all scripts for one condition.
std::vector<Story> enumerate_all(const ScriptSet& set,
                                 const ConceptInventory& inv, Condition cond);

// SHA-256 of sorted serialized lines, newline-terminated each; matches the
// reference enumerator's digests.
std::string corpus_digest(std::vector<std::string> lines);
std::string story_digest(const ConceptInventory& inv, const ScriptSet& set,
                         const std::vector<Story>& stories);
std::string item_digest(const ConceptInventory& inv, const ScriptSet& set,
                        const std::vector<QAItem>& items);

// Line-oriented corpus files.
void write_lines(const std::string& path, const std::vector<std::string>& lines);
std::vector<std::string> read_lines(const std::string& path);

}  // namespace scriptqa
