#include "scriptqa/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "scriptqa/sha256.hpp"

namespace scriptqa {

std::vector<QAItem> baseline_items(const std::vector<Story>& stories) {
  std::vector<QAItem> out;
  for (const auto& s : stories) {
    for (const auto& p : s.props) {
      out.push_back({s, p[kTopicRole], p});
    }
  }
  return out;
}

std::vector<QAItem> shuffled_items(const std::vector<Story>& stories, Rng& rng) {
  std::vector<QAItem> out;
  for (const auto& s : stories) {
    for (const auto& p : s.props) {
      QAItem item{s, p[kTopicRole], p};
      rng.shuffle(item.story.props);
      out.push_back(std::move(item));
    }
  }
  return out;
}

std::vector<QAItem> correlation_violation_items(
    const ScriptSet& set, const std::vector<Story>& stories) {
  std::vector<QAItem> out;
  for (const auto& s : stories) {
    const Rule& rule = set.scripts[s.script].rule;
    QAItem item;
    item.story = s;
    item.topic = rule.cons_topic;
    bool found = false;
    for (auto& p : item.story.props) {
      if (p[kTopicRole] == rule.cons_topic) {
        p[rule.cons_role] = rule.flip(p[rule.cons_role]);
        item.answer = p;
        found = true;
        break;
      }
    }
    if (!found) throw std::runtime_error("story lacks rule consequent");
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<QAItem> concept_violation_items(const ScriptSet& set,
                                            const std::vector<Story>& stories) {
  std::vector<QAItem> out;
  for (const auto& s : stories) {
    const Script& sc = set.scripts[s.script];
    for (const auto& p : s.props) {
      bool mentions = false;
      for (int r = 0; r < kNumRoles && !mentions; ++r) {
        mentions = p[r] >= 0 && sc.is_restricted_concept(p[r]);
      }
      if (mentions) out.push_back({s, p[kTopicRole], p});
    }
  }
  return out;
}

std::vector<QAItem> inference_probe_items(const ScriptSet& set,
                                          const std::vector<Story>& stories) {
  std::vector<QAItem> out;
  for (const auto& s : stories) {
    const Rule& rule = set.scripts[s.script].rule;
    QAItem item;
    item.story.script = s.script;
    item.topic = rule.cons_topic;
    bool found = false;
    for (const auto& p : s.props) {
      if (p[kTopicRole] == rule.cons_topic) {
        item.answer = p;
        found = true;
      } else {
        item.story.props.push_back(p);
      }
    }
    if (!found) throw std::runtime_error("story lacks rule consequent");
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<Story> enumerate_all(const ScriptSet& set,
                                 const ConceptInventory& inv, Condition cond) {
  std::vector<Story> out;
  for (const auto& sc : set.scripts) {
    auto stories = enumerate_stories(sc, inv, set, cond);
    out.insert(out.end(), std::make_move_iterator(stories.begin()),
               std::make_move_iterator(stories.end()));
  }
  return out;
}

std::string corpus_digest(std::vector<std::string> lines) {
  std::sort(lines.begin(), lines.end());
  Sha256 h;
  for (const auto& line : lines) {
    h.update(line);
    h.update("\n");
  }
  return h.hex();
}

std::string story_digest(const ConceptInventory& inv, const ScriptSet& set,
                         const std::vector<Story>& stories) {
  std::vector<std::string> lines;
  lines.reserve(stories.size());
  for (const auto& s : stories) lines.push_back(serialize_story(inv, set, s));
  return corpus_digest(std::move(lines));
}

std::string item_digest(const ConceptInventory& inv, const ScriptSet& set,
                        const std::vector<QAItem>& items) {
  std::vector<std::string> lines;
  lines.reserve(items.size());
  for (const auto& it : items) lines.push_back(serialize_item(inv, set, it));
  return corpus_digest(std::move(lines));
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace scriptqa
