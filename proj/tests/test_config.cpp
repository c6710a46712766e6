// Copyright 2026 The acpinn Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <string>

#include "acpinn/config.hpp"
#include "acpinn/errors.hpp"

using namespace acpinn;

TEST_CASE("defaults mirror the registry tables") {
  const ExperimentConfig c = default_config("ac1d-poly");
  CHECK(c.depth == 4);
  CHECK(c.width == 100);
  CHECK(c.n_r == 500);
  CHECK(c.n_b == 42);
  CHECK(c.n_i == 128);
  CHECK(c.n_e == 42);
  CHECK(c.weights.lambda_i == 100);
  CHECK(c.weights.lambda_e == 542);
  CHECK(c.tau == 0.1);
  CHECK(c.tol_s == 0.05);
  CHECK(c.dt == 0.1);
  CHECK(c.n_max == 20);
  CHECK(c.n_adam == 5000);
  CHECK(c.n_lbfgs == 5000);
  CHECK_FALSE(c.features.transfer_weights);
  CHECK(default_config("ac2d-poly").features.transfer_weights);
  CHECK(default_config("ac2d-log-degenerate").n_lbfgs == 20000);
  CHECK_THROWS_AS(default_config("ac4d"), ConfigError);
}

TEST_CASE("segment count covers the horizon") {
  ExperimentConfig c = default_config("ac1d-poly");
  CHECK(c.segment_count() == 10);
  CHECK(c.end_time() == doctest::Approx(1.0));
  CHECK(default_config("ac2d-advection").segment_count() == 12);
  CHECK(default_config("ac2d-poly").segment_count() == 40);
  c.features.adaptive_time = false;
  CHECK(c.segment_count() == 1);
  CHECK(c.end_time() == 1.0);
  c.features.adaptive_time = true;
  c.n_max = 1;
  CHECK(c.segment_count() == 1);
  CHECK(c.end_time() == doctest::Approx(0.1));
}

TEST_CASE("serialize and parse round trip for every benchmark") {
  for (const std::string& key : registry_keys()) {
    ExperimentConfig c = default_config(key);
    apply_desk_scale(c);
    c.seed = 77;
    c.features.adaptive_sampling = false;
    const std::string text = serialize_config(c);
    const ExperimentConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(back.snapshot_times == c.snapshot_times);
    CHECK(back.weights.lambda_e == c.weights.lambda_e);
    CHECK(back.seed == 77);
    CHECK_FALSE(back.features.adaptive_sampling);
  }
}

TEST_CASE("partial files keep the benchmark defaults") {
  const ExperimentConfig c = parse_config("[problem]\nkey = ac2d-poly\n[budget]\nn_adam = 12\n");
  CHECK(c.n_adam == 12);
  CHECK(c.n_r == 5000);
  CHECK(c.width == 128);
}

TEST_CASE("unknown keys and bad values are rejected by name") {
  try {
    parse_config("[problem]\nkey = ac1d-poly\n[network]\ndepthh = 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("network.depthh") != std::string::npos);
  }
  try {
    parse_config("[problem]\nkey = ac1d-poly\n[samples]\nn_r = many\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("samples.n_r") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[problem]\nkey = ac1d-poly\n[samples]\nn_r = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[problem]\nkey = ac1d-poly\n[sampler]\ntau = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[features]\nenergy_penalty = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[problem\nkey = x\n"), ConfigError);
}

TEST_CASE("command-line overrides") {
  ExperimentConfig c = default_config("ac1d-poly");
  apply_override(c, "n_adam=5");
  apply_override(c, "features.energy_penalty=false");
  apply_override(c, "run.snapshot_times=0, 0.5,1");
  CHECK(c.n_adam == 5);
  CHECK_FALSE(c.features.energy_penalty);
  CHECK(c.snapshot_times == std::vector<double>{0.0, 0.5, 1.0});
  CHECK_THROWS_AS(apply_override(c, "bogus=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "network.bogus=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "n_adam"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "n_adam=1.5"), ConfigError);
}

TEST_CASE("desk scale for the 1D benchmark") {
  ExperimentConfig c = default_config("ac1d-poly");
  apply_desk_scale(c);
  CHECK(c.depth == 4);
  CHECK(c.width == 64);
  CHECK(c.n_adam == 2000);
  CHECK(c.n_lbfgs == 2000);
  CHECK(c.dt == 0.1);
  CHECK(c.horizon == 1.0);
  CHECK(c.segment_count() == 10);
  CHECK(c.n_r == 500);
  CHECK(c.weights.lambda_e == 542);
}

TEST_CASE("resolved problems rebuild the random field from ic_seed") {
  ExperimentConfig c = default_config("ac2d-log-random");
  const ProblemSpec a = resolve_problem(c);
  c.ic_seed = 9;
  const ProblemSpec b = resolve_problem(c);
  const double x[2] = {1.0, 2.0};
  CHECK(a.ic.eval(x) != b.ic.eval(x));
}
