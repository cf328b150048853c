#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KLA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "kla_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("plan emits a complete document", "[cli]") {
  const fs::path out = fresh_dir("plan");
  REQUIRE(run_cli("plan --model iso_gauss --L 1 --dim 4 --eps 0.1 --gamma auto --h 0.05 --out " +
                  out.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(out / "plan.json"));
  CHECK(j["config"]["gamma"].get<double>() == 10.0);
  for (const char* key : {"rho", "c_reg", "r_u", "r", "epoch", "k", "horizon", "lambda"})
    REQUIRE(j["plan"].contains(key));
  REQUIRE(j.contains("certificates"));
  REQUIRE(j.contains("h_bar"));
  CHECK(j["plan"]["k"].get<int>() == 3);
}

TEST_CASE("plan with enforced certificates fails at a coarse step", "[cli]") {
  const fs::path out = fresh_dir("plan_cert");
  CHECK(run_cli("plan --model iso_gauss --L 1 --dim 2 --eps 0.1 --h 0.05 --require-certificates "
                "--out " +
                out.string()) == 1);
}

TEST_CASE("auto step size satisfies every certificate", "[cli]") {
  const fs::path out = fresh_dir("plan_auto");
  REQUIRE(run_cli("plan --model iso_gauss --L 1 --dim 2 --eps 0.1 --h auto "
                  "--require-certificates --out " +
                  out.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(out / "plan.json"));
  CHECK(j["certificates"]["all_ok"].get<bool>());
  CHECK(j["plan"]["h"].get<double>() == j["h_bar"].get<double>());
}

TEST_CASE("configuration errors exit with code 2", "[cli]") {
  CHECK(run_cli("plan --model banana --out /tmp/kla_cli_tests/bad") == 2);
  CHECK(run_cli("plan --model diag_gauss --out /tmp/kla_cli_tests/bad2") == 2);
  CHECK(run_cli("frobnicate") == 2);
}

TEST_CASE("config file values are applied and flags override them", "[cli]") {
  const fs::path out = fresh_dir("config");
  const fs::path cfg = out / "run.json";
  {
    std::ofstream f(cfg);
    f << R"({"model": "iso_gauss", "L": 4.0, "d": 8, "h": 0.02, "gamma": 25.0, "eps": 0.1})";
  }
  REQUIRE(run_cli("plan --config " + cfg.string() + " --out " + out.string()) == 0);
  auto j = nlohmann::json::parse(slurp(out / "plan.json"));
  CHECK(j["config"]["constants"]["d"].get<int>() == 8);
  CHECK(j["config"]["gamma"].get<double>() == 25.0);

  REQUIRE(run_cli("plan --config " + cfg.string() + " --dim 2 --out " + out.string()) == 0);
  j = nlohmann::json::parse(slurp(out / "plan.json"));
  CHECK(j["config"]["constants"]["d"].get<int>() == 2);
}

TEST_CASE("sample runs are byte-identical under a fixed seed", "[cli]") {
  const fs::path out1 = fresh_dir("sample1");
  const fs::path out2 = fresh_dir("sample2");
  const std::string args =
      "sample --model iso_gauss --L 1 --dim 3 --h 0.05 --gamma 10 --steps 2000 --burn-in 100 "
      "--seed 777 --out ";
  REQUIRE(run_cli(args + out1.string()) == 0);
  REQUIRE(run_cli(args + out2.string()) == 0);
  CHECK(slurp(out1 / "traces/chain.csv") == slurp(out2 / "traces/chain.csv"));
  CHECK(slurp(out1 / "reports/sample_summary.json") == slurp(out2 / "reports/sample_summary.json"));
  const std::string header = slurp(out1 / "traces/chain.csv").substr(0, 60);
  CHECK(header.rfind("step,x0,x1,x2,v0,v1,v2,accepted,delta_H", 0) == 0);
}

TEST_CASE("mix emits reports and deterministic traces", "[cli]") {
  const fs::path out1 = fresh_dir("mix1");
  const fs::path out2 = fresh_dir("mix2");
  const std::string args =
      "mix --model iso_gauss --L 1 --dim 1 --h 0.1 --gamma 10 --eps 0.3 --replicas 4 --seed 99 "
      "--threads 2 --trace 1 --trace-stride 5000 --out ";
  REQUIRE(run_cli(args + out1.string()) == 0);
  REQUIRE(run_cli(args + out2.string()) == 0);
  CHECK(slurp(out1 / "reports/mixing.json") == slurp(out2 / "reports/mixing.json"));
  CHECK(slurp(out1 / "traces/mixing.csv") == slurp(out2 / "traces/mixing.csv"));
  const auto j = nlohmann::json::parse(slurp(out1 / "reports/mixing.json"));
  CHECK(j["mixing"]["verdict"].get<bool>());
  const std::string head = slurp(out1 / "traces/mixing.csv").substr(0, 80);
  CHECK(head.rfind("replica,step,met,in_domain,rejected,delta_H,twisted_distance", 0) == 0);
}

TEST_CASE("verify exits nonzero only when tampered", "[cli]") {
  const fs::path out = fresh_dir("verify");
  REQUIRE(run_cli("verify --suite contraction --model iso_gauss --L 1 --dim 2 --h 0.05 "
                  "--gamma 10 --seed 5 --out " +
                  out.string()) == 0);
  CHECK(run_cli("verify --suite contraction --model iso_gauss --L 1 --dim 2 --h 0.05 --gamma 10 "
                "--seed 5 --tamper-contraction-c 200 --out " +
                out.string()) == 1);
}

TEST_CASE("emitted documents validate against the shipped schemas", "[cli]") {
  // structural validation: every required key exists and has the right type
  const fs::path out = fresh_dir("schema");
  REQUIRE(run_cli("plan --model iso_gauss --L 1 --dim 2 --eps 0.1 --h 0.05 --out " +
                  out.string()) == 0);
  const auto plan = nlohmann::json::parse(slurp(out / "plan.json"));
  const auto schema = nlohmann::json::parse(slurp(fs::path(KLA_SOURCE_DIR) / "schema/plan.schema.json"));

  const std::function<void(const nlohmann::json&, const nlohmann::json&)> validate =
      [&](const nlohmann::json& doc, const nlohmann::json& spec) {
        const std::string type = spec.at("type").get<std::string>();
        if (type == "object") {
          REQUIRE(doc.is_object());
          if (spec.contains("required"))
            for (const auto& key : spec["required"]) {
              INFO(key.get<std::string>());
              REQUIRE(doc.contains(key.get<std::string>()));
            }
          if (spec.contains("properties"))
            for (const auto& [key, sub] : spec["properties"].items())
              if (doc.contains(key)) validate(doc[key], sub);
        } else if (type == "number") {
          REQUIRE(doc.is_number());
        } else if (type == "integer") {
          REQUIRE(doc.is_number_integer());
        } else if (type == "boolean") {
          REQUIRE(doc.is_boolean());
        } else if (type == "string") {
          REQUIRE(doc.is_string());
        } else if (type == "array") {
          REQUIRE(doc.is_array());
          if (spec.contains("items"))
            for (const auto& item : doc) validate(item, spec["items"]);
        }
      };
  validate(plan, schema);
}
