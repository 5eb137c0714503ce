// Command line front end: corpus generation, training, evaluation, the
// inference probe, and report emission.
//
// Exit codes: 0 success, 1 usage error, 2 validation failure, 3 numeric
// failure.

#include <cstdint>
#include <filesystem>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scriptqa/checkpoint.hpp"
#include "scriptqa/corpus.hpp"
#include "scriptqa/harness.hpp"
#include "scriptqa/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scriptqa;

namespace {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string condition_name(Condition c) {
  switch (c) {
    case Condition::Unrestricted: return "unrestricted";
    case Condition::Restricted: return "restricted";
    case Condition::Violation: return "violation";
  }
  return "?";
}

Condition parse_condition(const std::string& s) {
  if (s == "unrestricted") return Condition::Unrestricted;
  if (s == "restricted") return Condition::Restricted;
  if (s == "violation") return Condition::Violation;
  throw ValidationError("unknown condition: " + s);
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
  return buf;
}

struct Data {
  ConceptInventory inv;
  ScriptSet set;
};

Data load_data(const std::string& dir) {
  Data d;
  d.inv = ConceptInventory::load(dir + "/concepts.txt");
  d.set = ScriptSet::load(dir + "/scripts", d.inv);
  return d;
}

// Prediction slots can hold -2 when a sequence model emits a special token
// in a content position; keep that visible in the record log.
std::string prop_text(const ConceptInventory& inv, const Prop& p) {
  std::string out;
  for (int r = 0; r < kNumRoles; ++r) {
    if (r) out += ',';
    if (p[r] == -1) out += "NONE";
    else if (p[r] < -1) out += "<special>";
    else out += inv.word(p[r]);
  }
  return out;
}

// ---------------------------------------------------------------- gen ----

int run_gen(const std::string& data_dir, const std::string& out_dir,
            std::uint64_t seed) {
  Data d = load_data(data_dir);
  fs::create_directories(out_dir);
  json manifest;
  manifest["seed"] = seed;
  manifest["layout_hash"] = hex64(d.inv.layout_hash());

  auto write_stories = [&](const std::string& name,
                           const std::vector<Story>& stories) {
    std::vector<std::string> lines;
    lines.reserve(stories.size());
    for (const Story& s : stories) lines.push_back(serialize_story(d.inv, d.set, s));
    write_lines(out_dir + "/" + name + ".txt", lines);
    manifest["counts"][name] = stories.size();
    manifest["digests"][name] = corpus_digest(lines);
  };
  auto write_items = [&](const std::string& name,
                         const std::vector<QAItem>& items) {
    std::vector<std::string> lines;
    lines.reserve(items.size());
    for (const QAItem& it : items) lines.push_back(serialize_item(d.inv, d.set, it));
    write_lines(out_dir + "/" + name + ".qa", lines);
    manifest["counts"][name] = items.size();
    manifest["digests"][name] = corpus_digest(lines);
  };

  auto unrestricted = enumerate_all(d.set, d.inv, Condition::Unrestricted);
  auto restricted = enumerate_all(d.set, d.inv, Condition::Restricted);
  auto violation = enumerate_all(d.set, d.inv, Condition::Violation);
  write_stories("stories_unrestricted", unrestricted);
  write_stories("stories_restricted", restricted);
  write_stories("stories_violation", violation);

  write_items("baseline", baseline_items(unrestricted));
  Rng rng(seed);
  write_items("shuffled", shuffled_items(unrestricted, rng));
  write_items("correlation", correlation_violation_items(d.set, unrestricted));
  write_items("violation", concept_violation_items(d.set, violation));
  write_items("probe", inference_probe_items(d.set, unrestricted));

  write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote corpora and test sets to " << out_dir << "\n";
  return 0;
}

// -------------------------------------------------------------- train ----

void reject_unknown_keys(const json& cfg, const std::set<std::string>& ok) {
  for (const auto& [key, _] : cfg.items()) {
    if (!ok.count(key)) throw ValidationError("unknown config key: " + key);
  }
}

Nadam::Config optimizer_config(const json& cfg) {
  Nadam::Config opt;
  if (!cfg.contains("optimizer")) return opt;
  const json& o = cfg.at("optimizer");
  reject_unknown_keys(o, {"lr", "beta1", "beta2", "eps", "clip_norm"});
  opt.lr = o.value("lr", opt.lr);
  opt.beta1 = o.value("beta1", opt.beta1);
  opt.beta2 = o.value("beta2", opt.beta2);
  opt.eps = o.value("eps", opt.eps);
  opt.clip_norm = o.value("clip_norm", opt.clip_norm);
  return opt;
}

json train_log_json(const std::string& kind, Condition cond,
                    std::uint64_t seed, long long examples,
                    const TrainResult& res) {
  json j;
  j["model"] = kind;
  j["condition"] = condition_name(cond);
  j["seed"] = seed;
  j["examples"] = examples;
  j["final_loss"] = res.final_loss;
  j["log"] = json::array();
  for (const auto& e : res.log) {
    j["log"].push_back({{"seen", e.seen}, {"mean_loss", e.mean_loss}});
  }
  return j;
}

int run_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_dir, std::optional<std::uint64_t> seed_flag,
              std::optional<long long> examples_flag) {
  json cfg;
  try {
    cfg = json::parse(read_text_file(config_path));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config: ") + e.what());
  }
  if (!cfg.contains("model")) throw ValidationError("config needs \"model\"");
  std::string kind = cfg.at("model").get<std::string>();
  if (kind == "gestalt") kind = "sg";
  if (kind != "sg" && kind != "seq2seq")
    throw ValidationError("model must be sg, gestalt, or seq2seq");

  Condition cond = parse_condition(cfg.value("condition", "unrestricted"));
  if (cond == Condition::Violation)
    throw ValidationError("training condition must be unrestricted or restricted");
  std::uint64_t seed = seed_flag.value_or(cfg.value("seed", 1ull));
  long long examples =
      examples_flag.value_or(cfg.value("examples", kind == "sg" ? 200000ll : 100000ll));
  if (examples < 1) throw ValidationError("examples must be >= 1");
  long long log_every = cfg.value("log_every", 10000ll);
  if (log_every < 1) throw ValidationError("log_every must be >= 1");
  long long ckpt_every = cfg.value("checkpoint_every", 0ll);
  if (ckpt_every < 0) throw ValidationError("checkpoint_every must be >= 0");

  Data d = load_data(data_dir);
  fs::create_directories(out_dir);
  std::string stem = out_dir + "/" + kind + "_" + condition_name(cond) +
                     "_seed" + std::to_string(seed);

  json meta;
  meta["kind"] = kind;
  meta["condition"] = condition_name(cond);
  meta["seed"] = seed;
  meta["layout_hash"] = hex64(d.inv.layout_hash());

  TrainResult res;
  if (kind == "sg") {
    reject_unknown_keys(cfg, {"model", "condition", "examples", "seed", "hidden",
                              "log_every", "checkpoint_every", "optimizer"});
    SgModel::Config mc;
    mc.prop_units = d.inv.prop_units();
    mc.question_units = d.inv.question_units();
    mc.hidden = cfg.value("hidden", 100);
    if (mc.hidden < 1) throw ValidationError("hidden must be >= 1");
    SgModel model(mc, seed);
    meta["hidden"] = mc.hidden;
    meta["prop_units"] = mc.prop_units;
    meta["question_units"] = mc.question_units;

    SgTrainConfig tc;
    tc.stories = examples;
    tc.seed = seed;
    tc.condition = cond;
    tc.opt = optimizer_config(cfg);
    tc.log_every = log_every;
    tc.checkpoint_every = ckpt_every;
    tc.on_checkpoint = [&](long long n) {
      json m = meta;
      m["examples"] = n;
      save_checkpoint(stem + ".at" + std::to_string(n) + ".ckpt", m.dump(),
                      model.params());
    };
    res = train_sg(model, d.set, d.inv, tc);
    meta["examples"] = examples;
    save_checkpoint(stem + ".ckpt", meta.dump(), model.params());
  } else {
    reject_unknown_keys(cfg, {"model", "condition", "examples", "seed",
                              "batch_size", "enc_hidden", "dec_hidden",
                              "att_hidden", "emb_dim", "use_attention",
                              "embedding_seed", "embeddings_file", "log_every",
                              "checkpoint_every", "optimizer"});
    Seq2seqModel::Config mc;
    mc.vocab = d.inv.vocab_size();
    mc.emb_dim = cfg.value("emb_dim", 300);
    mc.enc_hidden = cfg.value("enc_hidden", 250);
    mc.dec_hidden = cfg.value("dec_hidden", 200);
    mc.att_hidden = cfg.value("att_hidden", 128);
    mc.go_token = d.inv.vocab_go();
    mc.use_attention = cfg.value("use_attention", true);
    if (mc.emb_dim < 1 || mc.enc_hidden < 1 || mc.dec_hidden < 1 ||
        mc.att_hidden < 1)
      throw ValidationError("model sizes must be >= 1");

    Embeddings emb;
    if (cfg.contains("embeddings_file")) {
      std::string path = cfg.at("embeddings_file").get<std::string>();
      emb = Embeddings::from_file(path, d.inv, mc.emb_dim);
      meta["embedding_source"] = {{"kind", "file"}, {"path", path}};
    } else {
      std::uint64_t emb_seed = cfg.value("embedding_seed", 1ull);
      emb = Embeddings::deterministic(d.inv, mc.emb_dim, emb_seed);
      meta["embedding_source"] = {{"kind", "deterministic"}, {"seed", emb_seed}};
    }
    meta["emb_checksum"] = std::to_string(emb.checksum());
    meta["vocab"] = mc.vocab;
    meta["emb_dim"] = mc.emb_dim;
    meta["enc_hidden"] = mc.enc_hidden;
    meta["dec_hidden"] = mc.dec_hidden;
    meta["att_hidden"] = mc.att_hidden;
    meta["answer_len"] = mc.answer_len;
    meta["go_token"] = mc.go_token;
    meta["use_attention"] = mc.use_attention;

    Seq2seqModel model(mc, &emb, seed);
    Seq2seqTrainConfig tc;
    tc.items = examples;
    tc.seed = seed;
    tc.condition = cond;
    tc.batch_size = cfg.value("batch_size", 32);
    tc.opt = optimizer_config(cfg);
    tc.log_every = log_every;
    tc.checkpoint_every = ckpt_every;
    tc.on_checkpoint = [&](long long n) {
      json m = meta;
      m["examples"] = n;
      save_checkpoint(stem + ".at" + std::to_string(n) + ".ckpt", m.dump(),
                      model.params());
    };
    res = train_seq2seq(model, d.set, d.inv, tc);
    meta["examples"] = examples;
    save_checkpoint(stem + ".ckpt", meta.dump(), model.params());
  }

  write_text_file(stem + ".train_log.json",
                  train_log_json(kind, cond, seed, examples, res).dump(2) + "\n");
  json stats;
  stats["model"] = kind;
  stats["condition"] = condition_name(cond);
  stats["seed"] = seed;
  stats["counts"] = json::parse(res.stats.to_json(d.inv));
  write_text_file(stem + ".stats.json", stats.dump(2) + "\n");
  std::cout << "trained " << kind << " (" << condition_name(cond) << ", seed "
            << seed << ", " << examples << " examples), final loss "
            << res.final_loss << "\n"
            << "checkpoint: " << stem << ".ckpt\n";
  return 0;
}

// --------------------------------------------------------------- eval ----

std::vector<QAItem> build_test_set(const std::string& test, const Data& d,
                                   std::uint64_t seed) {
  if (test == "violation") {
    return concept_violation_items(
        d.set, enumerate_all(d.set, d.inv, Condition::Violation));
  }
  auto stories = enumerate_all(d.set, d.inv, Condition::Unrestricted);
  if (test == "baseline") return baseline_items(stories);
  if (test == "shuffled") {
    Rng rng(seed);
    return shuffled_items(stories, rng);
  }
  if (test == "correlation") return correlation_violation_items(d.set, stories);
  if (test == "probe") return inference_probe_items(d.set, stories);
  throw ValidationError("unknown test: " + test);
}

int run_eval(const std::string& ckpt_path, const std::string& test,
             const std::string& data_dir, const std::string& out_path,
             long long max_items, std::uint64_t seed) {
  json meta;
  try {
    meta = json::parse(read_checkpoint_meta(ckpt_path));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad checkpoint metadata: ") + e.what());
  }
  Data d = load_data(data_dir);
  if (meta.value("layout_hash", "") != hex64(d.inv.layout_hash()))
    throw ValidationError("checkpoint layout/vocab does not match the data");

  std::string kind = meta.value("kind", "");
  std::unique_ptr<Answerer> answerer;
  std::unique_ptr<SgModel> sg;
  std::unique_ptr<Seq2seqModel> s2s;
  Embeddings emb;
  if (kind == "sg") {
    SgModel::Config mc;
    mc.prop_units = meta.at("prop_units").get<int>();
    mc.question_units = meta.at("question_units").get<int>();
    mc.hidden = meta.at("hidden").get<int>();
    if (mc.prop_units != d.inv.prop_units() ||
        mc.question_units != d.inv.question_units())
      throw ValidationError("checkpoint layout/vocab does not match the data");
    sg = std::make_unique<SgModel>(mc, 0);
    load_checkpoint(ckpt_path, sg->params());
    answerer = std::make_unique<SgAnswerer>(sg.get(), &d.inv);
  } else if (kind == "seq2seq") {
    Seq2seqModel::Config mc;
    mc.vocab = meta.at("vocab").get<int>();
    mc.emb_dim = meta.at("emb_dim").get<int>();
    mc.enc_hidden = meta.at("enc_hidden").get<int>();
    mc.dec_hidden = meta.at("dec_hidden").get<int>();
    mc.att_hidden = meta.at("att_hidden").get<int>();
    mc.answer_len = meta.at("answer_len").get<int>();
    mc.go_token = meta.at("go_token").get<int>();
    mc.use_attention = meta.value("use_attention", true);
    if (mc.vocab != d.inv.vocab_size() || mc.go_token != d.inv.vocab_go())
      throw ValidationError("checkpoint layout/vocab does not match the data");
    const json& src = meta.at("embedding_source");
    if (src.at("kind") == "file") {
      emb = Embeddings::from_file(src.at("path").get<std::string>(), d.inv,
                                  mc.emb_dim);
    } else {
      emb = Embeddings::deterministic(d.inv, mc.emb_dim,
                                      src.at("seed").get<std::uint64_t>());
    }
    if (std::to_string(emb.checksum()) != meta.value("emb_checksum", ""))
      throw ValidationError("embedding table does not match the checkpoint");
    s2s = std::make_unique<Seq2seqModel>(mc, &emb, 0);
    load_checkpoint(ckpt_path, s2s->params());
    answerer = std::make_unique<Seq2seqAnswerer>(s2s.get(), &d.inv);
  } else {
    throw ValidationError("checkpoint has unknown model kind");
  }

  std::vector<QAItem> items = build_test_set(test, d, seed);
  EvalOptions opt;
  opt.max_items = max_items;
  opt.seed = seed;
  opt.keep_records = true;
  EvalResult res = evaluate(*answerer, test, items, d.set, opt);
  res.info["checkpoint"] = fs::path(ckpt_path).filename().string();
  res.info["train_seed"] = std::to_string(meta.value("seed", 0ull));
  res.info["condition"] = meta.value("condition", "");
  res.info["examples"] = std::to_string(meta.value("examples", 0ll));
  res.info["test_set_size"] = std::to_string(items.size());

  if (!out_path.empty()) {
    if (fs::path(out_path).has_parent_path())
      fs::create_directories(fs::path(out_path).parent_path());
    // Item-level verdicts always persist next to the summary.
    std::string rec_path = out_path + ".records.jsonl";
    std::string rec;
    for (const EvalRecord& r : res.records) {
      json line;
      line["item"] = serialize_item(d.inv, d.set, *r.item);
      line["predicted"] = prop_text(d.inv, r.predicted);
      line["target"] = prop_text(d.inv, r.target);
      line["verdict"] = r.verdict;
      rec += line.dump() + "\n";
    }
    write_text_file(rec_path, rec);
    res.records.clear();
    write_text_file(out_path, results_to_json({res}) + "\n");
  }
  std::cout << res.model << " on " << test << ": accuracy " << res.accuracy
            << " (chance " << res.chance << ", n " << res.n << ")\n";
  return 0;
}

// ------------------------------------------------------------- report ----

int run_report(const std::string& out_dir,
               const std::vector<std::string>& inputs) {
  std::vector<EvalResult> all;
  for (const std::string& path : inputs) {
    std::vector<EvalResult> part;
    try {
      part = results_from_json(read_text_file(path));
    } catch (const json::exception& e) {
      throw ValidationError(path + ": " + e.what());
    }
    for (auto& r : part) all.push_back(std::move(r));
  }
  if (all.empty()) throw ValidationError("no results to report");
  fs::create_directories(out_dir);
  write_text_file(out_dir + "/report.json", results_to_json(all) + "\n");
  write_text_file(out_dir + "/report.csv", results_to_csv(all));
  write_text_file(out_dir + "/report.svg", results_to_svg(all));
  std::cout << "wrote report.json, report.csv, report.svg to " << out_dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // training allocates and frees small matrices constantly; without a
  // high trim threshold glibc hands pages back to the kernel each time
  mallopt(M_TRIM_THRESHOLD, 128 << 20);
  mallopt(M_MMAP_THRESHOLD, 128 << 20);
#endif
  CLI::App app{"role-filler story question answering test bench"};
  app.require_subcommand(1);

  std::string data_dir = "data";
  std::string out_dir = "out";
  std::string config_path, ckpt_path, test_name, out_path;
  std::uint64_t seed = 1;
  long long max_items = 2000;
  long long examples_value = 0;
  std::vector<std::string> report_inputs;

  CLI::App* gen = app.add_subcommand("gen", "write corpora and test sets");
  gen->add_option("--data", data_dir, "concepts/scripts directory");
  gen->add_option("--out", out_dir, "output directory");
  gen->add_option("--seed", seed, "shuffle seed");

  CLI::App* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", config_path, "JSON run configuration")
      ->required();
  train->add_option("--data", data_dir, "concepts/scripts directory");
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--seed", seed, "override the config seed");
  train->add_option("--examples", examples_value, "override the example count");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
  eval->add_option("--test", test_name,
                   "baseline|shuffled|correlation|violation|probe")
      ->required();
  eval->add_option("--data", data_dir, "concepts/scripts directory");
  eval->add_option("--out", out_path, "result JSON path");
  eval->add_option("--max-items", max_items, "evaluation subsample cap (0 = all)");
  eval->add_option("--seed", seed, "subsample/shuffle seed");

  CLI::App* probe = app.add_subcommand("probe", "run the inference probe");
  probe->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
  probe->add_option("--data", data_dir, "concepts/scripts directory");
  probe->add_option("--out", out_path, "result JSON path");
  probe->add_option("--max-items", max_items, "evaluation subsample cap (0 = all)");
  probe->add_option("--seed", seed, "subsample seed");

  CLI::App* report = app.add_subcommand("report", "combine results into reports");
  report->add_option("--out", out_dir, "output directory");
  report->add_option("inputs", report_inputs, "result JSON files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) return run_gen(data_dir, out_dir, seed);
    if (train->parsed())
      return run_train(config_path, data_dir, out_dir,
                       train->count("--seed")
                           ? std::optional<std::uint64_t>(seed)
                           : std::nullopt,
                       train->count("--examples")
                           ? std::optional<long long>(examples_value)
                           : std::nullopt);
    if (eval->parsed())
      return run_eval(ckpt_path, test_name, data_dir, out_path, max_items, seed);
    if (probe->parsed())
      return run_eval(ckpt_path, "probe", data_dir, out_path, max_items, seed);
    if (report->parsed()) return run_report(out_dir, report_inputs);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
