#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <pixel2catch.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct ConfigHandle {
  p2c_config* ptr = nullptr;
  ~ConfigHandle() { p2c_config_free(ptr); }
};

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { p2c_string_free(s); }
  std::string str() const { return s ? s : ""; }
};

double json_number(const std::string& text, const std::string& key) {
  const std::string needle = "\"" + key + "\"";
  const size_t at = text.find(needle);
  REQUIRE(at != std::string::npos);
  size_t colon = text.find(':', at);
  REQUIRE(colon != std::string::npos);
  return std::stod(text.substr(colon + 1));
}

}  // namespace

TEST_CASE("version and error strings are always available") {
  REQUIRE(p2c_version() != nullptr);
  CHECK(std::strlen(p2c_version()) > 0);
  REQUIRE(p2c_last_error() != nullptr);
  p2c_string_free(nullptr);  // must be a safe no-op
}

TEST_CASE("default configs exist for every variant and reject unknown names") {
  for (const char* v : {"proposed", "wo-pf", "only-center", "only-wh", "sa-rl"}) {
    ConfigHandle cfg;
    REQUIRE(p2c_config_default(v, &cfg.ptr) == P2C_OK);
    uint64_t fp = 0;
    CHECK(p2c_config_fingerprint(cfg.ptr, &fp) == P2C_OK);
    CHECK(fp != 0);
  }
  ConfigHandle bad;
  CHECK(p2c_config_default("mappo-plus", &bad.ptr) != P2C_OK);
  CHECK(std::strlen(p2c_last_error()) > 0);
  CHECK(p2c_config_default(nullptr, &bad.ptr) == P2C_ERR_INVALID_ARGUMENT);
  CHECK(p2c_config_default("proposed", nullptr) == P2C_ERR_INVALID_ARGUMENT);
}

TEST_CASE("config text round-trips and overrides apply") {
  ConfigHandle cfg;
  const char* overrides[] = {"trainer.gamma=0.5", "seed=7"};
  REQUIRE(p2c_config_from_text("{\"variant\": \"only-wh\"}", overrides, 2, &cfg.ptr) == P2C_OK);
  OwnedString text;
  REQUIRE(p2c_config_to_text(cfg.ptr, &text.s) == P2C_OK);
  CHECK(text.str().find("\"only-wh\"") != std::string::npos);
  CHECK(json_number(text.str(), "gamma") == 0.5);

  ConfigHandle back;
  REQUIRE(p2c_config_from_text(text.s, nullptr, 0, &back.ptr) == P2C_OK);
  uint64_t fa = 0, fb = 0;
  p2c_config_fingerprint(cfg.ptr, &fa);
  p2c_config_fingerprint(back.ptr, &fb);
  CHECK(fa == fb);
}

TEST_CASE("parse failures surface P2C_ERR_PARSE with a message") {
  ConfigHandle cfg;
  CHECK(p2c_config_from_text("{not json", nullptr, 0, &cfg.ptr) == P2C_ERR_PARSE);
  CHECK(std::strlen(p2c_last_error()) > 0);
  CHECK(p2c_config_from_text("{\"seed\": 1}", nullptr, 0, &cfg.ptr) == P2C_ERR_PARSE);
  CHECK(std::string(p2c_last_error()).find("variant") != std::string::npos);
  const char* bad_override[] = {"trainer.gama=1"};
  CHECK(p2c_config_from_text("{\"variant\": \"proposed\"}", bad_override, 1, &cfg.ptr) ==
        P2C_ERR_PARSE);
  CHECK(p2c_config_load("/nonexistent/p2c.json", nullptr, 0, &cfg.ptr) != P2C_OK);
}

TEST_CASE("variant and seed setters mutate the fingerprint") {
  ConfigHandle cfg;
  REQUIRE(p2c_config_default("proposed", &cfg.ptr) == P2C_OK);
  uint64_t before = 0, after = 0;
  p2c_config_fingerprint(cfg.ptr, &before);
  REQUIRE(p2c_config_set_seed(cfg.ptr, 99) == P2C_OK);
  p2c_config_fingerprint(cfg.ptr, &after);
  CHECK(before != after);
  REQUIRE(p2c_config_set_variant(cfg.ptr, "sa-rl") == P2C_OK);
  uint64_t final_fp = 0;
  p2c_config_fingerprint(cfg.ptr, &final_fp);
  CHECK(final_fp != after);
  CHECK(p2c_config_set_variant(cfg.ptr, "bogus") != P2C_OK);
}

TEST_CASE("the embedded environment steps with the documented contract") {
  ConfigHandle cfg;
  REQUIRE(p2c_config_default("proposed", &cfg.ptr) == P2C_OK);
  p2c_env* env = nullptr;
  REQUIRE(p2c_env_create(cfg.ptr, 11, &env) == P2C_OK);

  p2c_step_result r;
  REQUIRE(p2c_env_reset(env, &r) == P2C_OK);
  CHECK(r.done == 0);
  // Duplicate-frame reset: both halves of the arm observation agree.
  for (int i = 0; i < 25; ++i) CHECK(r.arm_obs[i] == r.arm_obs[25 + i]);

  double arm[P2C_ARM_ACTION_DIM] = {0, 0, 0, 0, 0, 0};
  double hand[P2C_HAND_ACTION_DIM] = {0};
  int steps = 0;
  do {
    REQUIRE(p2c_env_step(env, arm, hand, &r) == P2C_OK);
    ++steps;
    REQUIRE(steps <= 90);
    for (double v : r.critic_obs) REQUIRE(std::isfinite(v));
  } while (!r.done);
  // Stepping a finished episode is an error until the next reset.
  CHECK(p2c_env_step(env, arm, hand, &r) != P2C_OK);
  REQUIRE(p2c_env_reset(env, &r) == P2C_OK);
  CHECK(p2c_env_step(env, arm, hand, &r) == P2C_OK);

  CHECK(p2c_env_step(nullptr, arm, hand, &r) == P2C_ERR_INVALID_ARGUMENT);
  CHECK(p2c_env_create(cfg.ptr, 0, nullptr) == P2C_ERR_INVALID_ARGUMENT);
  p2c_env_free(env);
  p2c_env_free(nullptr);  // safe no-op
}

TEST_CASE("seeded environments are reproducible through the C API") {
  ConfigHandle cfg;
  REQUIRE(p2c_config_default("proposed", &cfg.ptr) == P2C_OK);
  p2c_env *a = nullptr, *b = nullptr;
  REQUIRE(p2c_env_create(cfg.ptr, 5, &a) == P2C_OK);
  REQUIRE(p2c_env_create(cfg.ptr, 5, &b) == P2C_OK);
  p2c_step_result ra, rb;
  p2c_env_reset(a, &ra);
  p2c_env_reset(b, &rb);
  double arm[P2C_ARM_ACTION_DIM] = {0.1, -0.1, 0.05, 0, 0, 0};
  double hand[P2C_HAND_ACTION_DIM] = {0.5};
  for (int t = 0; t < 5; ++t) {
    REQUIRE(p2c_env_step(a, arm, hand, &ra) == P2C_OK);
    REQUIRE(p2c_env_step(b, arm, hand, &rb) == P2C_OK);
    CHECK(ra.reward_arm == rb.reward_arm);
    CHECK(ra.reward_hand == rb.reward_hand);
    for (int i = 0; i < P2C_CRITIC_OBS_DIM; ++i) CHECK(ra.critic_obs[i] == rb.critic_obs[i]);
  }
  p2c_env_free(a);
  p2c_env_free(b);
}

TEST_CASE("untrained evaluation produces a coherent report") {
  ConfigHandle cfg;
  REQUIRE(p2c_config_default("proposed", &cfg.ptr) == P2C_OK);
  OwnedString json, table;
  REQUIRE(p2c_evaluate(cfg.ptr, nullptr, 20, 3, &json.s, &table.s) == P2C_OK);
  const std::string text = json.str();
  CHECK(json_number(text, "trials") == 20);
  const double sr = json_number(text, "success_rate_percent");
  const double tr = json_number(text, "tracking_rate_percent");
  CHECK(sr >= 0.0);
  CHECK(tr <= 100.0);
  CHECK(sr <= tr);  // success implies the palm reached the object
  CHECK(table.str().find("tracking rate") != std::string::npos);
  CHECK(p2c_evaluate(cfg.ptr, nullptr, 0, 3, &json.s, nullptr) != P2C_OK);
}

TEST_CASE("the oracle baseline clears the untrained policy by a wide margin") {
  ConfigHandle cfg;
  REQUIRE(p2c_config_default("proposed", &cfg.ptr) == P2C_OK);
  OwnedString json;
  REQUIRE(p2c_evaluate_oracle(cfg.ptr, 40, 3, &json.s, nullptr) == P2C_OK);
  CHECK(json_number(json.str(), "tracking_rate_percent") >= 75.0);
}

TEST_CASE("rollout traces are valid JSON lines") {
  ConfigHandle cfg;
  REQUIRE(p2c_config_default("proposed", &cfg.ptr) == P2C_OK);
  const std::string path = (fs::temp_directory_path() / "p2c_capi_trace.jsonl").string();
  int records = 0;
  REQUIRE(p2c_rollout(cfg.ptr, nullptr, 2, 13, path.c_str(), &records) == P2C_OK);
  CHECK(records > 0);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    CHECK(line.front() == '{');
    CHECK(line.back() == '}');
    CHECK(line.find("\"a_arm\"") != std::string::npos);
    CHECK(line.find("\"reward_hand\"") != std::string::npos);
  }
  CHECK(lines == records);
  fs::remove(path);
}

TEST_CASE("sysid recovers gain scales from an externally generated CSV") {
  // Independent PD rollout (unit inertia, k=100, d=20 scaled by 1.1/0.9)
  // written in plain code, so the fit is checked against non-library data.
  const double dt = 1.0 / 120.0;
  const double ks = 1.1 * 100.0, kd = 0.9 * 20.0;
  const std::string path = (fs::temp_directory_path() / "p2c_capi_sysid.csv").string();
  {
    std::ofstream out(path);
    out << "t,joint,target,measured\n";
    out.precision(17);
    double q = 0.0, qd = 0.0;
    for (int i = 0; i < 600; ++i) {
      const double t = i * dt;
      const double target = 0.6 * std::sin(2.0 * t + 0.5 * t * t);
      qd += (ks * (target - q) - kd * qd) * dt;
      q += qd * dt;
      out << (i + 1) * dt << ",0," << target << ',' << q << '\n';
    }
  }
  ConfigHandle cfg;
  REQUIRE(p2c_config_default("proposed", &cfg.ptr) == P2C_OK);
  OwnedString json;
  REQUIRE(p2c_sysid(cfg.ptr, path.c_str(), &json.s) == P2C_OK);
  const std::string text = json.str();
  CHECK(text.find("stiffness_scale") != std::string::npos);
  // First entry of each scale array is joint 0.
  const size_t ks_at = text.find("stiffness_scale");
  const size_t kd_at = text.find("damping_scale");
  const double ks_fit = std::stod(text.substr(text.find('[', ks_at) + 1));
  const double kd_fit = std::stod(text.substr(text.find('[', kd_at) + 1));
  CHECK(std::abs(ks_fit / 1.1 - 1.0) < 0.05);
  CHECK(std::abs(kd_fit / 0.9 - 1.0) < 0.05);
  CHECK(p2c_sysid(cfg.ptr, "/nonexistent.csv", &json.s) != P2C_OK);
  fs::remove(path);
}
