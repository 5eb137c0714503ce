#include "scriptqa/harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace scriptqa {

int score_item(const Prop& predicted, const Prop& target) {
  return predicted == target ? 1 : 0;
}

void FillerStats::add(const std::string& script, const Prop& answer) {
  auto& roles = counts_[script];
  for (int r = 0; r < kNumRoles; ++r) {
    if (answer[r] >= 0) ++roles[r][answer[r]];
  }
}

long long FillerStats::count(const std::string& script, int role,
                             int sid) const {
  auto it = counts_.find(script);
  if (it == counts_.end()) return 0;
  auto jt = it->second[role].find(sid);
  return jt == it->second[role].end() ? 0 : jt->second;
}

std::vector<int> FillerStats::top_fillers(const std::string& script, int role,
                                          int k) const {
  auto it = counts_.find(script);
  if (it == counts_.end()) return {};
  std::vector<std::pair<long long, int>> ranked;
  for (const auto& [sid, n] : it->second[role]) ranked.push_back({n, sid});
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> out;
  for (int i = 0; i < k && i < (int)ranked.size(); ++i)
    out.push_back(ranked[i].second);
  return out;
}

std::string FillerStats::to_json(const ConceptInventory& inv) const {
  nlohmann::json j;
  for (const auto& [script, roles] : counts_) {
    for (int r = 0; r < kNumRoles; ++r) {
      if (roles[r].empty()) continue;
      nlohmann::json& slot = j[script][kRoleNames[r]];
      for (const auto& [sid, n] : roles[r]) slot[inv.word(sid)] = n;
    }
  }
  return j.dump(2);
}

FillerStats FillerStats::from_json(const std::string& text,
                                   const ConceptInventory& inv) {
  FillerStats out;
  nlohmann::json j = nlohmann::json::parse(text);
  for (auto& [script, roles] : j.items()) {
    for (int r = 0; r < kNumRoles; ++r) {
      if (!roles.contains(kRoleNames[r])) continue;
      for (auto& [word, n] : roles[kRoleNames[r]].items()) {
        out.counts_[script][r][inv.resolve(word)] = n.get<long long>();
      }
    }
  }
  return out;
}

namespace {

void check_finite(double loss) {
  if (!std::isfinite(loss)) throw NumericError("non-finite loss");
}

}  // namespace

TrainResult train_sg(SgModel& model, const ScriptSet& set,
                     const ConceptInventory& inv, const SgTrainConfig& cfg) {
  if (cfg.stories < 1) throw std::invalid_argument("train_sg: story count");
  Rng rng(cfg.seed);
  Nadam opt(model.params(), cfg.opt);
  TrainResult res;
  double window_loss = 0.0;
  long long window_examples = 0;
  for (long long n = 1; n <= cfg.stories; ++n) {
    Story story = sample_story(rng, set, inv, cfg.condition);
    const int k = static_cast<int>(story.props.size());
    std::vector<Vec> props;
    props.reserve(k);
    Mat questions(inv.question_units(), k);
    Mat targets(inv.prop_units(), k);
    for (int i = 0; i < k; ++i) {
      const Prop& p = story.props[i];
      props.push_back(encode_prop(inv, p));
      questions.col(i) = encode_question(inv, p[kTopicRole]);
      targets.col(i) = props.back();
      res.stats.add(set.scripts[story.script].name, p);
    }
    for (Parameter* par : model.params()) par->zero_grad();
    double loss = model.accumulate_story_gradients(props, questions, targets);
    check_finite(loss);
    opt.step();
    window_loss += loss;
    ++window_examples;
    if (n % cfg.log_every == 0 || n == cfg.stories) {
      res.log.push_back({n, window_loss / (double)window_examples});
      window_loss = 0.0;
      window_examples = 0;
    }
    if (cfg.checkpoint_every > 0 && cfg.on_checkpoint &&
        n % cfg.checkpoint_every == 0) {
      cfg.on_checkpoint(n);
    }
  }
  res.final_loss = res.log.empty() ? 0.0 : res.log.back().mean_loss;
  return res;
}

TrainResult train_seq2seq(Seq2seqModel& model, const ScriptSet& set,
                          const ConceptInventory& inv,
                          const Seq2seqTrainConfig& cfg) {
  if (cfg.items < 1) throw std::invalid_argument("train_seq2seq: item count");
  if (cfg.batch_size < 1)
    throw std::invalid_argument("train_seq2seq: batch size");
  Rng rng(cfg.seed);
  Nadam opt(model.params(), cfg.opt);
  TrainResult res;

  struct Bucket {
    std::vector<std::vector<int>> inputs, targets;
  };
  std::map<int, Bucket> buckets;
  double window_loss = 0.0;
  long long window_items = 0;

  auto flush = [&](Bucket& b) {
    for (Parameter* par : model.params()) par->zero_grad();
    double loss = model.accumulate_gradients(b.inputs, b.targets);
    check_finite(loss);
    opt.step();
    window_loss += loss * (double)b.inputs.size();
    window_items += (long long)b.inputs.size();
    b.inputs.clear();
    b.targets.clear();
  };

  for (long long n = 1; n <= cfg.items; ++n) {
    Story story = sample_story(rng, set, inv, cfg.condition);
    const Prop& answer = story.props[rng.index(story.props.size())];
    Bucket& b = buckets[(int)story.props.size()];
    b.inputs.push_back(input_tokens(inv, story, answer[kTopicRole]));
    b.targets.push_back(answer_tokens(inv, answer));
    res.stats.add(set.scripts[story.script].name, answer);
    if ((int)b.inputs.size() == cfg.batch_size) flush(b);
    if (n % cfg.log_every == 0 || n == cfg.items) {
      // Partial buckets train too, so the log always reflects every item.
      for (auto& [len, bucket] : buckets) {
        if (!bucket.inputs.empty()) flush(bucket);
      }
      res.log.push_back(
          {n, window_items ? window_loss / (double)window_items : 0.0});
      window_loss = 0.0;
      window_items = 0;
    }
    if (cfg.checkpoint_every > 0 && cfg.on_checkpoint &&
        n % cfg.checkpoint_every == 0) {
      cfg.on_checkpoint(n);
    }
  }
  res.final_loss = res.log.empty() ? 0.0 : res.log.back().mean_loss;
  return res;
}

std::vector<Prop> SgAnswerer::answer_batch(
    const std::vector<const QAItem*>& items) const {
  std::vector<Prop> out;
  out.reserve(items.size());
  for (const QAItem* it : items) {
    std::vector<Vec> props;
    props.reserve(it->story.props.size());
    for (const Prop& p : it->story.props) props.push_back(encode_prop(*inv_, p));
    Vec q = encode_question(*inv_, it->topic);
    out.push_back(decode_prop(*inv_, model_->answer(props, q)));
  }
  return out;
}

Prop SgAnswerer::target(const QAItem& item) const {
  return decode_prop(*inv_, encode_prop(*inv_, item.answer));
}

std::vector<Prop> Seq2seqAnswerer::answer_batch(
    const std::vector<const QAItem*>& items) const {
  // Group by token length so each model batch is rectangular.
  std::map<int, std::vector<std::size_t>> by_len;
  std::vector<std::vector<int>> tokens(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    tokens[i] = input_tokens(*inv_, items[i]->story, items[i]->topic);
    by_len[(int)tokens[i].size()].push_back(i);
  }
  std::vector<Prop> out(items.size(), empty_prop());
  for (auto& [len, idxs] : by_len) {
    for (std::size_t start = 0; start < idxs.size();
         start += (std::size_t)batch_cap_) {
      std::size_t stop = std::min(idxs.size(), start + (std::size_t)batch_cap_);
      std::vector<std::vector<int>> batch;
      batch.reserve(stop - start);
      for (std::size_t k = start; k < stop; ++k) batch.push_back(tokens[idxs[k]]);
      auto preds = model_->predict(batch);
      for (std::size_t k = start; k < stop; ++k) {
        out[idxs[k]] = tokens_to_prop(*inv_, preds[k - start]);
      }
    }
  }
  return out;
}

EvalResult evaluate(const Answerer& answerer, const std::string& test_name,
                    const std::vector<QAItem>& items, const ScriptSet& set,
                    const EvalOptions& opt) {
  if (items.empty()) throw std::invalid_argument("evaluate: empty item set");

  // Distinct canonical targets per (script, question) over the full set.
  std::map<std::pair<int, int>, std::set<Prop>> targets;
  for (const QAItem& it : items) {
    targets[{it.story.script, it.topic}].insert(answerer.target(it));
  }

  std::vector<const QAItem*> chosen;
  if (opt.max_items > 0 && (long long)items.size() > opt.max_items) {
    // Seeded partial Fisher-Yates over the index space.
    std::vector<std::size_t> idx(items.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(opt.seed);
    for (long long k = 0; k < opt.max_items; ++k) {
      std::size_t j = k + (std::size_t)rng.index(idx.size() - k);
      std::swap(idx[k], idx[j]);
      chosen.push_back(&items[idx[k]]);
    }
  } else {
    chosen.reserve(items.size());
    for (const QAItem& it : items) chosen.push_back(&it);
  }

  EvalResult res;
  res.model = answerer.name();
  res.test = test_name;
  res.seed = opt.seed;
  res.n = (long long)chosen.size();

  std::vector<Prop> preds = answerer.answer_batch(chosen);
  double chance_sum = 0.0;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    const QAItem& it = *chosen[i];
    Prop want = answerer.target(it);
    int verdict = score_item(preds[i], want);
    res.correct += verdict;
    auto& ps = res.per_script[set.scripts[it.story.script].name];
    ps.first += verdict;
    ps.second += 1;
    chance_sum +=
        1.0 / (double)targets.at({it.story.script, it.topic}).size();
    if (opt.keep_records) res.records.push_back({&it, preds[i], want, verdict});
  }
  res.accuracy = (double)res.correct / (double)res.n;
  res.chance = chance_sum / (double)res.n;
  return res;
}

}  // namespace scriptqa
