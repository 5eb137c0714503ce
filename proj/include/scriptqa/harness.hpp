#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scriptqa/corpus.hpp"
#include "scriptqa/encoding.hpp"
#include "scriptqa/generate.hpp"
#include "scriptqa/seq2seq_model.hpp"
#include "scriptqa/sg_model.hpp"

namespace scriptqa {

// 1 iff every role slot matches exactly, including emptiness.
int score_item(const Prop& predicted, const Prop& target);

// Per-(script, role) filler counts accumulated over training answers; the
// raw material for error-pattern analyses.
class FillerStats {
 public:
  void add(const std::string& script, const Prop& answer);
  long long count(const std::string& script, int role, int sid) const;
  // Concepts sorted by descending count (ties by sid) for one (script, role).
  std::vector<int> top_fillers(const std::string& script, int role,
                               int k) const;
  std::string to_json(const ConceptInventory& inv) const;
  static FillerStats from_json(const std::string& text,
                               const ConceptInventory& inv);

  const std::map<std::string, std::array<std::map<int, long long>, kNumRoles>>&
  raw() const {
    return counts_;
  }

 private:
  std::map<std::string, std::array<std::map<int, long long>, kNumRoles>>
      counts_;
};

struct TrainLogEntry {
  long long seen = 0;   // stories (gestalt) or items (seq2seq)
  double mean_loss = 0;
};

struct TrainResult {
  std::vector<TrainLogEntry> log;
  FillerStats stats;
  double final_loss = 0;
};

struct SgTrainConfig {
  long long stories = 200000;
  std::uint64_t seed = 1;
  Condition condition = Condition::Unrestricted;
  Nadam::Config opt;
  long long log_every = 10000;
  // Called every checkpoint_every stories (0 = never). Snapshots only; the
  // training trajectory does not depend on the cadence.
  long long checkpoint_every = 0;
  std::function<void(long long)> on_checkpoint;
};

// Streams sampled stories; every story prefix is one example and one
// optimizer step. Throws on non-finite loss.
TrainResult train_sg(SgModel& model, const ScriptSet& set,
                     const ConceptInventory& inv, const SgTrainConfig& cfg);

struct Seq2seqTrainConfig {
  long long items = 100000;
  std::uint64_t seed = 1;
  Condition condition = Condition::Unrestricted;
  int batch_size = 32;
  Nadam::Config opt;
  long long log_every = 10000;
  long long checkpoint_every = 0;
  std::function<void(long long)> on_checkpoint;
};

// Streams sampled stories, one question per story drawn uniformly over its
// propositions; batches bucket items of identical token length.
TrainResult train_seq2seq(Seq2seqModel& model, const ScriptSet& set,
                          const ConceptInventory& inv,
                          const Seq2seqTrainConfig& cfg);

// A model wrapped for evaluation. target() maps an item's answer into the
// model's comparable form (the gestalt decoder cannot express agent order,
// so its targets collapse to bank order).
struct Answerer {
  virtual ~Answerer() = default;
  virtual std::string name() const = 0;
  virtual std::vector<Prop> answer_batch(
      const std::vector<const QAItem*>& items) const = 0;
  virtual Prop target(const QAItem& item) const { return item.answer; }
};

class SgAnswerer : public Answerer {
 public:
  SgAnswerer(const SgModel* model, const ConceptInventory* inv)
      : model_(model), inv_(inv) {}
  std::string name() const override { return "gestalt"; }
  std::vector<Prop> answer_batch(
      const std::vector<const QAItem*>& items) const override;
  Prop target(const QAItem& item) const override;

 private:
  const SgModel* model_;
  const ConceptInventory* inv_;
};

class Seq2seqAnswerer : public Answerer {
 public:
  Seq2seqAnswerer(const Seq2seqModel* model, const ConceptInventory* inv,
                  int batch_cap = 64)
      : model_(model), inv_(inv), batch_cap_(batch_cap) {}
  std::string name() const override { return "seq2seq"; }
  std::vector<Prop> answer_batch(
      const std::vector<const QAItem*>& items) const override;

 private:
  const Seq2seqModel* model_;
  const ConceptInventory* inv_;
  int batch_cap_;
};

struct EvalRecord {
  const QAItem* item = nullptr;
  Prop predicted = empty_prop();
  Prop target = empty_prop();
  int verdict = 0;
};

struct EvalResult {
  std::string model, test;
  long long n = 0, correct = 0;
  double accuracy = 0;
  double chance = 0;
  std::uint64_t seed = 0;  // subsample seed used for this evaluation
  // Free-form provenance (training seed, condition, checkpoint, ...).
  std::map<std::string, std::string> info;
  // script -> (correct, n)
  std::map<std::string, std::pair<long long, long long>> per_script;
  std::vector<EvalRecord> records;
};

struct EvalOptions {
  long long max_items = 2000;  // 0 = no subsampling
  std::uint64_t seed = 1;
  bool keep_records = true;
};

// Scores the answerer on (a seeded subsample of) the item set. The chance
// reference is the expected accuracy of guessing uniformly over the distinct
// canonical targets per (script, question), measured on the full set and
// averaged over the evaluated items.
EvalResult evaluate(const Answerer& answerer, const std::string& test_name,
                    const std::vector<QAItem>& items, const ScriptSet& set,
                    const EvalOptions& opt);

}  // namespace scriptqa
