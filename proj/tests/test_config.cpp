#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "p2c/config.hpp"

#include <filesystem>
#include <fstream>
#include <string>

using namespace p2c;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = (fs::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST_CASE("defaults reproduce the documented hyperparameters") {
  const ExperimentConfig cfg;
  CHECK(cfg.trainer.gamma == 0.99);
  CHECK(cfg.trainer.clip_epsilon == 0.2);
  CHECK(cfg.trainer.kl_threshold == 0.016);
  CHECK(cfg.trainer.gae_lambda == 0.95);
  CHECK(cfg.trainer.horizon == 24);
  CHECK(cfg.trainer.epochs == 5);
  CHECK(cfg.trainer.minibatches == 4);
  CHECK(cfg.trainer.entropy_coef == 0.001);
  CHECK(cfg.trainer.value_coef == 1.0);
  CHECK(cfg.trainer.initial_lr == 3e-4);
  CHECK(cfg.trainer.env_count == 32);
  CHECK(cfg.trainer.total_env_steps == 2'000'000);
  CHECK(cfg.env.reward.lambda_succ == 10.0);
  CHECK(cfg.env.reward.lambda_fail == 5.0);
  CHECK(cfg.env.reward.lambda_app == 0.1);
  CHECK(cfg.env.reward.lambda_act == 0.01);
  CHECK(cfg.env.reward.r_time == -0.01);
  CHECK(cfg.env.clock.physics_dt == doctest::Approx(1.0 / 120.0));
  CHECK(cfg.env.clock.decimation == 4);
  CHECK(cfg.env.episode.max_timesteps == 90);
  CHECK(cfg.eval_episodes == 300);
  CHECK(cfg.env.camera.width == 640);
  CHECK(cfg.env.camera.height == 480);
}

TEST_CASE("the default camera is derived from the placement fields") {
  const ExperimentConfig cfg;
  CHECK((cfg.env.camera.position - Vec3(-0.5, 0.0, 2.2)).norm() < 1e-12);
  // The optical axis passes through the look-at point.
  const Vec3 pc = cfg.env.camera.world_to_camera(cfg.camera_look_at);
  CHECK(std::abs(pc.x()) < 1e-9);
  CHECK(std::abs(pc.y()) < 1e-9);
  CHECK(pc.z() > 1.0);
}

TEST_CASE("a minimal file containing only the variant loads the defaults") {
  const std::string path = write_temp("p2c_cfg_min.json", R"({"variant": "only-wh"})");
  const ExperimentConfig cfg = ExperimentConfig::load(path);
  CHECK(cfg.variant == Variant::OnlyWh);
  CHECK(cfg.env.variant == Variant::OnlyWh);
  CHECK(cfg.trainer.gamma == 0.99);
  const ExperimentConfig defaults;
  // Identical resolved settings apart from the variant itself.
  ExperimentConfig matched = defaults;
  matched.variant = Variant::OnlyWh;
  matched.env.variant = Variant::OnlyWh;
  CHECK(cfg.fingerprint() == matched.fingerprint());
  fs::remove(path);
}

TEST_CASE("a missing variant is a parse error that names the field") {
  const std::string path = write_temp("p2c_cfg_novar.json", R"({"seed": 3})");
  try {
    ExperimentConfig::load(path);
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("variant") != std::string::npos);
  }
  fs::remove(path);
}

TEST_CASE("unknown keys are rejected with their path") {
  const std::string path = write_temp(
      "p2c_cfg_unknown.json", R"({"variant": "proposed", "trainer": {"gama": 0.5}})");
  try {
    ExperimentConfig::load(path);
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("gama") != std::string::npos);
  }
  fs::remove(path);
}

TEST_CASE("unknown variant names are rejected") {
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"variant": "mappo-plus"})"), ConfigError);
  CHECK(variant_to_string(variant_from_string("sa-rl")) == "sa-rl");
  CHECK_THROWS_AS(variant_from_string("SA-RL"), ConfigError);
}

TEST_CASE("malformed JSON is a parse error, not a crash") {
  CHECK_THROWS_AS(ExperimentConfig::from_json_text("{variant: proposed"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/p2c.json"), ConfigError);
}

TEST_CASE("dotted overrides are applied and reflected in the frozen copy") {
  const std::string path = write_temp("p2c_cfg_ovr.json", R"({"variant": "proposed"})");
  const ExperimentConfig cfg = ExperimentConfig::load(
      path, {"trainer.gamma=0.5", "seed=42", "episode.capture_radius=0.11",
             "camera.hfov_deg=50"});
  CHECK(cfg.trainer.gamma == 0.5);
  CHECK(cfg.seed == 42);
  CHECK(cfg.env.episode.capture_radius == 0.11);
  CHECK(cfg.camera_hfov_deg == 50.0);
  // The override survives a save/load round trip.
  const std::string frozen = write_temp("p2c_cfg_frozen.json", "");
  cfg.save(frozen);
  const ExperimentConfig back = ExperimentConfig::load(frozen);
  CHECK(back.trainer.gamma == 0.5);
  CHECK(back.env.episode.capture_radius == 0.11);
  CHECK(back.fingerprint() == cfg.fingerprint());
  fs::remove(path);
  fs::remove(frozen);
}

TEST_CASE("overrides of unknown keys or bad values fail loudly") {
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(R"({"variant": "proposed"})", {"trainer.gama=0.5"}),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(R"({"variant": "proposed"})", {"no-equals-sign"}),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(R"({"variant": "proposed"})", {"trainer.gamma=-3"}),
      ConfigError);
}

TEST_CASE("validation rejects out-of-range settings") {
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(R"({"variant": "proposed"})", {"trainer.env_count=0"}),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(R"({"variant": "proposed"})",
                                       {"episode.max_timesteps=0"}),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(R"({"variant": "proposed"})",
                                       {"randomization.throw_speed.lo=5", "randomization.throw_speed.hi=2"}),
      ConfigError);
}

TEST_CASE("fingerprints are stable, seed-sensitive and variant-sensitive") {
  const ExperimentConfig a = ExperimentConfig::from_json_text(R"({"variant": "proposed"})");
  const ExperimentConfig b = ExperimentConfig::from_json_text(R"({"variant": "proposed"})");
  CHECK(a.fingerprint() == b.fingerprint());
  const ExperimentConfig c =
      ExperimentConfig::from_json_text(R"({"variant": "proposed", "seed": 1})");
  CHECK(a.fingerprint() != c.fingerprint());
  const ExperimentConfig d = ExperimentConfig::from_json_text(R"({"variant": "wo-pf"})");
  CHECK(a.fingerprint() != d.fingerprint());
  // fnv1a64 reference values pin the hash implementation.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}
