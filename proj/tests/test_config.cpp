#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "wsg/config.hpp"

using wsg::RunConfig;

TEST_CASE("serialize/parse round trip preserves every field") {
  RunConfig c;
  c.M = 7;
  c.K = 3;
  c.d = 12;
  c.C_r = 2;
  c.vocab_size = 99;
  c.num_categories = 5;
  c.d_w = 8;
  c.d_e = 6;
  c.mlp_hidden = 24;
  c.tau = 0.55;
  c.lambda1 = 0.25;
  c.lambda2 = 0.5;
  c.lambda3 = 2.0;
  c.delta = 0.2;
  c.lr0 = 0.01;
  c.weight_decay = 1e-5;
  c.momentum = 0.8;
  c.grad_clip = -1.0;
  c.batch_size = 4;
  c.total_iters = 123;
  c.lr_milestones = {0.25, 0.5, 0.75};
  c.reg_warmup_fraction = 0.125;
  c.seed = 424242;
  c.train_corpus = "/tmp/a.jsonl";
  c.val_corpus = "/tmp/b.jsonl";
  c.relation_vocab = "/tmp/r.tsv";
  c.use_semantic_fusion = false;
  c.use_topk = false;
  c.use_regression = true;
  c.use_graph_and_relation = false;
  c.use_rank = false;
  c.use_rec = true;
  c.log_every = 7;
  c.val_every = 11;

  RunConfig back = wsg::parse_config(wsg::serialize_config(c));
  // Serialization is the canonical form: identical text means identical config.
  CHECK(wsg::serialize_config(back) == wsg::serialize_config(c));
  CHECK(back.M == 7);
  CHECK(back.K == 3);
  CHECK(back.grad_clip == -1.0);
  CHECK(back.lr_milestones == std::vector<double>{0.25, 0.5, 0.75});
  CHECK(back.seed == 424242);
  CHECK(back.train_corpus == "/tmp/a.jsonl");
  CHECK(back.use_semantic_fusion == false);
  CHECK(back.use_topk == false);
  CHECK(back.use_graph_and_relation == false);
  CHECK(back.total_iters == 123);
}

TEST_CASE("parser accepts comments and blanks, rejects junk with line numbers") {
  RunConfig c = wsg::parse_config("# comment\n\nM = 9\n  K =   2  # trailing\n");
  CHECK(c.M == 9);
  CHECK(c.K == 2);
  // Untouched keys keep their defaults.
  CHECK(c.d == RunConfig{}.d);

  CHECK_THROWS_WITH_AS((void)wsg::parse_config("M = 5\nbogus_key = 1\n"),
                       doctest::Contains("unknown key 'bogus_key', line 2"), std::runtime_error);
  CHECK_THROWS_WITH_AS((void)wsg::parse_config("M 5\n"),
                       doctest::Contains("expected 'key = value', line 1"), std::runtime_error);
  CHECK_THROWS_WITH_AS((void)wsg::parse_config("M = soup\n"),
                       doctest::Contains("bad integer value 'soup' for key 'M'"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS((void)wsg::parse_config("tau = maybe\n"),
                       doctest::Contains("bad numeric value 'maybe' for key 'tau'"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS((void)wsg::parse_config("use_topk = 2\n"),
                       doctest::Contains("bad boolean value"), std::runtime_error);
}

TEST_CASE("overrides mutate single keys and reject unknown ones") {
  RunConfig c;
  wsg::apply_override(c, "K=2");
  CHECK(c.K == 2);
  wsg::apply_override(c, "lr_milestones=0.1,0.9");
  CHECK(c.lr_milestones == std::vector<double>{0.1, 0.9});
  wsg::apply_override(c, "use_topk=false");
  CHECK(!c.use_topk);
  wsg::apply_override(c, "train_corpus=/x/y.jsonl");
  CHECK(c.train_corpus == "/x/y.jsonl");

  CHECK_THROWS_WITH_AS(wsg::apply_override(c, "nope=1"),
                       doctest::Contains("unknown key 'nope'"), std::runtime_error);
  CHECK_THROWS_WITH_AS(wsg::apply_override(c, "justakey"),
                       doctest::Contains("must look like key=value"), std::runtime_error);
}

TEST_CASE("validation enforces the structural invariants") {
  auto expect_bad = [](void (*tweak)(RunConfig&), const char* needle) {
    RunConfig c;
    tweak(c);
    CHECK_THROWS_WITH_AS(wsg::validate_config(c), doctest::Contains(needle),
                         std::runtime_error);
  };
  wsg::validate_config(RunConfig{});  // defaults are valid

  expect_bad([](RunConfig& c) { c.M = 0; }, "M must be positive");
  expect_bad([](RunConfig& c) { c.K = c.M + 1; }, "K must satisfy 1 <= K <= M");
  expect_bad([](RunConfig& c) { c.K = 0; }, "K must satisfy 1 <= K <= M");
  expect_bad([](RunConfig& c) { c.tau = 1.0; }, "tau must lie in (0,1)");
  expect_bad([](RunConfig& c) { c.tau = 0.0; }, "tau must lie in (0,1)");
  expect_bad([](RunConfig& c) { c.lambda1 = -0.5; }, "lambda weights must be >= 0");
  expect_bad([](RunConfig& c) { c.momentum = 1.0; }, "momentum must lie in [0,1)");
  expect_bad([](RunConfig& c) { c.lr0 = 0.0; }, "lr0 must be positive");
  expect_bad([](RunConfig& c) { c.total_iters = 0; }, "total_iters must be positive");
  expect_bad([](RunConfig& c) { c.lr_milestones = {0.5, 0.5}; },
             "lr_milestones must be strictly ascending");
  expect_bad([](RunConfig& c) { c.lr_milestones = {1.5}; }, "lr_milestones must lie in (0,1)");
  expect_bad([](RunConfig& c) { c.reg_warmup_fraction = 1.5; },
             "reg_warmup_fraction must lie in [0,1]");
  expect_bad([](RunConfig& c) { c.val_every = 0; }, "log/val cadence must be positive");

  // grad_clip <= 0 is legal: it means "no clipping".
  RunConfig ok;
  ok.grad_clip = 0.0;
  wsg::validate_config(ok);
  // C_r = 0 is legal: a corpus may carry no relation labels at all.
  ok.C_r = 0;
  wsg::validate_config(ok);
}

TEST_CASE("effective_k tracks the denoising switch") {
  RunConfig c;
  c.M = 20;
  c.K = 5;
  CHECK(c.effective_k() == 5);
  c.use_topk = false;
  CHECK(c.effective_k() == 20);
}

TEST_CASE("file save/load round trip") {
  RunConfig c;
  c.M = 33;
  c.seed = 9;
  const std::string path = "/tmp/wsg_config_test.config";
  wsg::save_config(path, c);
  RunConfig back = wsg::load_config(path);
  CHECK(wsg::serialize_config(back) == wsg::serialize_config(c));
  std::remove(path.c_str());
  CHECK_THROWS_WITH_AS((void)wsg::load_config("/tmp/definitely-not-here.config"),
                       doctest::Contains("cannot open config file"), std::runtime_error);
}
