#include <set>

#include "doctest.h"
#include "scriptqa/encoding.hpp"
#include "scriptqa/generate.hpp"
#include "scriptqa/sg_model.hpp"
#include "test_data.hpp"

using namespace scriptqa;
using scriptqa::test::inventory;
using scriptqa::test::scripts;

namespace {

Vec random_binary_vec(Rng& rng, int n, double p_on) {
  Vec v = Vec::Zero(n);
  for (int i = 0; i < n; ++i) v[i] = rng.bernoulli(p_on) ? 1.0 : 0.0;
  return v;
}

}  // namespace

TEST_CASE("sg output shape and determinism") {
  SgModel::Config cfg;
  SgModel a(cfg, 101), b(cfg, 101), c(cfg, 102);
  const auto& inv = inventory();
  Rng rng(1);
  Story s = sample_story(rng, scripts(), inv, Condition::Unrestricted);
  std::vector<Vec> props;
  for (const Prop& p : s.props) props.push_back(encode_prop(inv, p));
  Vec q = encode_question(inv, s.props[0][kTopicRole]);

  Vec ya = a.answer(props, q);
  CHECK(ya.size() == 137);
  CHECK(ya.minCoeff() > 0.0);
  CHECK(ya.maxCoeff() < 1.0);
  CHECK((ya - b.answer(props, q)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ya - c.answer(props, q)).cwiseAbs().maxCoeff() > 0.0);
  CHECK_THROWS(a.answer({}, q));

  std::set<std::string> names;
  for (Parameter* p : a.params()) names.insert(p->name);
  CHECK(names.size() == a.params().size());
}

TEST_CASE("sg gradient check") {
  SgModel::Config cfg;
  cfg.prop_units = 9;
  cfg.question_units = 4;
  cfg.hidden = 6;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    SgModel model(cfg, seed);
    Rng rng(seed * 31 + 1);
    std::vector<Vec> props;
    for (int t = 0; t < 3; ++t)
      props.push_back(random_binary_vec(rng, cfg.prop_units, 0.3));
    Vec q = Vec::Zero(cfg.question_units);
    q[rng.index(cfg.question_units)] = 1.0;
    Vec target = random_binary_vec(rng, cfg.prop_units, 0.3);

    auto loss_and_grads = [&]() {
      return model.accumulate_gradients(props, q, target);
    };
    auto loss_only = [&]() { return model.loss(props, q, target); };
    double err = gradient_check(model.params(), loss_and_grads, loss_only);
    INFO("seed ", seed);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("sg single prefix gradient check") {
  SgModel::Config cfg;
  cfg.prop_units = 7;
  cfg.question_units = 3;
  cfg.hidden = 5;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    SgModel model(cfg, seed + 50);
    Rng rng(seed);
    std::vector<Vec> props = {random_binary_vec(rng, cfg.prop_units, 0.4)};
    Vec q = Vec::Zero(cfg.question_units);
    q[0] = 1.0;
    Vec target = props[0];
    double err = gradient_check(
        model.params(),
        [&]() { return model.accumulate_gradients(props, q, target); },
        [&]() { return model.loss(props, q, target); });
    CHECK(err < 1e-4);
  }
}

TEST_CASE("sg memorizes a handful of stories") {
  const auto& inv = inventory();
  SgModel model({inv.prop_units(), inv.question_units(), 100}, 7);
  Nadam opt(model.params());

  Rng rng(77);
  std::vector<Story> stories;
  for (int n = 0; n < 3; ++n)
    stories.push_back(sample_story(rng, scripts(), inv, Condition::Unrestricted));

  // Every prefix of every story is one training example.
  struct Example {
    std::vector<Vec> props;
    Vec q, target;
  };
  std::vector<Example> examples;
  for (const Story& s : stories) {
    std::vector<Vec> prefix;
    for (const Prop& p : s.props) {
      prefix.push_back(encode_prop(inv, p));
      examples.push_back(
          {prefix, encode_question(inv, p[kTopicRole]), encode_prop(inv, p)});
    }
  }

  double first = 0.0, last = 0.0;
  for (int epoch = 0; epoch < 120; ++epoch) {
    double total = 0.0;
    for (const Example& ex : examples) {
      for (Parameter* p : model.params()) p->zero_grad();
      total += model.accumulate_gradients(ex.props, ex.q, ex.target);
      opt.step();
    }
    if (epoch == 0) first = total;
    last = total;
  }
  CHECK(last < first * 0.05);

  int correct = 0;
  for (const Example& ex : examples) {
    Prop got = decode_prop(inv, model.answer(ex.props, ex.q));
    Prop want = decode_prop(inv, ex.target);
    correct += got == want;
  }
  CHECK(correct == (int)examples.size());
}

TEST_CASE("sg story gradients equal the mean of per-event gradients") {
  SgModel::Config cfg;
  cfg.prop_units = 9;
  cfg.question_units = 4;
  cfg.hidden = 6;
  for (std::uint64_t seed = 11; seed <= 13; ++seed) {
    SgModel batched(cfg, seed), reference(cfg, seed);
    Rng rng(seed * 17 + 3);
    const int T = 3, K = 4;
    std::vector<Vec> props;
    for (int t = 0; t < T; ++t)
      props.push_back(random_binary_vec(rng, cfg.prop_units, 0.3));
    Mat questions = Mat::Zero(cfg.question_units, K);
    Mat targets(cfg.prop_units, K);
    for (int k = 0; k < K; ++k) {
      questions(rng.index(cfg.question_units), k) = 1.0;
      targets.col(k) = random_binary_vec(rng, cfg.prop_units, 0.3);
    }

    for (Parameter* p : batched.params()) p->zero_grad();
    double loss = batched.accumulate_story_gradients(props, questions, targets);

    for (Parameter* p : reference.params()) p->zero_grad();
    double event_sum = 0.0;
    for (int t = 1; t <= T; ++t) {
      std::vector<Vec> prefix(props.begin(), props.begin() + t);
      for (int k = 0; k < K; ++k)
        event_sum +=
            reference.accumulate_gradients(prefix, questions.col(k), targets.col(k));
    }
    const double scale = 1.0 / (T * K);
    CHECK(loss == doctest::Approx(event_sum * scale).epsilon(1e-12));
    for (std::size_t i = 0; i < batched.params().size(); ++i) {
      double diff = (batched.params()[i]->g - reference.params()[i]->g * scale)
                        .cwiseAbs()
                        .maxCoeff();
      INFO("seed ", seed, " param ", batched.params()[i]->name);
      CHECK(diff < 1e-12);
    }
  }
}

TEST_CASE("sg story gradient check") {
  SgModel::Config cfg;
  cfg.prop_units = 7;
  cfg.question_units = 3;
  cfg.hidden = 5;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    SgModel model(cfg, seed + 90);
    Rng rng(seed * 7 + 2);
    const int T = 3, K = 3;
    std::vector<Vec> props;
    for (int t = 0; t < T; ++t)
      props.push_back(random_binary_vec(rng, cfg.prop_units, 0.4));
    Mat questions = Mat::Zero(cfg.question_units, K);
    Mat targets(cfg.prop_units, K);
    for (int k = 0; k < K; ++k) {
      questions(rng.index(cfg.question_units), k) = 1.0;
      targets.col(k) = random_binary_vec(rng, cfg.prop_units, 0.4);
    }
    auto loss_only = [&]() {
      double total = 0.0;
      for (int t = 1; t <= T; ++t) {
        std::vector<Vec> prefix(props.begin(), props.begin() + t);
        for (int k = 0; k < K; ++k)
          total += model.loss(prefix, questions.col(k), targets.col(k));
      }
      return total / (T * K);
    };
    double err = gradient_check(
        model.params(),
        [&]() {
          return model.accumulate_story_gradients(props, questions, targets);
        },
        loss_only);
    INFO("seed ", seed);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("sg story gradients reject malformed inputs") {
  SgModel::Config cfg;
  cfg.prop_units = 7;
  cfg.question_units = 3;
  cfg.hidden = 5;
  SgModel model(cfg, 4);
  Mat questions = Mat::Zero(cfg.question_units, 2);
  questions(0, 0) = questions(1, 1) = 1.0;
  Mat targets = Mat::Zero(cfg.prop_units, 2);
  Vec p = Vec::Zero(cfg.prop_units);
  CHECK_THROWS(model.accumulate_story_gradients({}, questions, targets));
  CHECK_THROWS(model.accumulate_story_gradients(
      {p}, questions, Mat::Zero(cfg.prop_units, 3)));
}
