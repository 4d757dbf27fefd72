#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "pgrates/cli.hpp"
#include "pgrates/suites.hpp"

using namespace pgrates;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("pgrates_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

json bandit_json(std::vector<double> rewards) {
  json j;
  j["rewards"] = std::move(rewards);
  return j;
}

json chain_mdp_json() {
  json j;
  j["num_states"] = 2;
  j["num_actions"] = 2;
  j["gamma"] = 0.5;
  j["rewards"] = {{0.1, 0.2}, {0.9, 0.8}};
  j["transitions"] = {{{1.0, 0.0}, {0.0, 1.0}}, {{0.0, 1.0}, {1.0, 0.0}}};
  return j;
}

long long count_lines(const std::string& text) {
  long long n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("config parsing: defaults and forms") {
  SUBCASE("bandit shorthand with defaults") {
    RunConfig cfg = run_config_from_json(bandit_json({1.0, 0.9, 0.1}));
    CHECK(cfg.is_bandit());
    CHECK(cfg.num_actions() == 3);
    CHECK(cfg.iterations == 10000);
    CHECK(cfg.method.kind == MethodKind::kPlain);
    CHECK_FALSE(cfg.method.eta.has_value());
    CHECK(cfg.init.kind == InitSpec::Kind::kUniform);
    CHECK_FALSE(cfg.record_every.has_value());
    CHECK_FALSE(cfg.mu.has_value());
    CHECK_FALSE(cfg.rho.has_value());
  }
  SUBCASE("nested mdp problem with method, init, and distributions") {
    json j;
    j["problem"] = chain_mdp_json();
    j["method"] = {{"kind", "entropy"}, {"tau", 0.2}, {"eta", "auto"}};
    j["init"] = {{"seed", 7}};
    j["mu"] = {0.25, 0.75};
    j["rho"] = {0.5, 0.5};
    j["iterations"] = 500;
    j["record_every"] = 10;
    j["name"] = "ignored";
    RunConfig cfg = run_config_from_json(j);
    CHECK_FALSE(cfg.is_bandit());
    CHECK(cfg.num_states() == 2);
    CHECK(cfg.method.kind == MethodKind::kEntropy);
    CHECK(cfg.method.tau == 0.2);
    CHECK_FALSE(cfg.method.eta.has_value());
    CHECK(cfg.init.kind == InitSpec::Kind::kRandom);
    CHECK(cfg.init.seed == 7);
    CHECK(cfg.mu->p(1) == 0.75);
    CHECK(cfg.iterations == 500);
    CHECK(cfg.record_every.has_value());
  }
  SUBCASE("probs init resolves to matching logits") {
    json j = bandit_json({1.0, 0.9, 0.1});
    j["init"] = {{"probs", {0.2, 0.3, 0.5}}};
    RunConfig cfg = run_config_from_json(j);
    VectorXd pi = softmax_vec(resolved_initial_logits(cfg).row(0).transpose());
    CHECK(std::abs(pi(0) - 0.2) <= 1e-12);
    CHECK(std::abs(pi(2) - 0.5) <= 1e-12);
  }
  SUBCASE("adaptive and explicit two-stage switch points") {
    json j = bandit_json({1.0, 0.9, 0.1});
    j["method"] = {{"kind", "two_stage"}, {"tau", 0.2}, {"t1", "adaptive"}};
    CHECK_FALSE(run_config_from_json(j).method.t1.has_value());
    j["method"]["t1"] = 25;
    CHECK(run_config_from_json(j).method.t1.value() == 25);
  }
  SUBCASE("rejections name the offending field") {
    json j = bandit_json({1.0, 0.5});
    j["frobnicate"] = 1;
    CHECK_THROWS_WITH_AS(run_config_from_json(j), "field 'frobnicate': unknown key",
                         InvalidInput);

    json nested;
    nested["problem"] = chain_mdp_json();
    nested["gamma"] = 0.9;  // problem keys may not leak to the top level
    CHECK_THROWS_WITH_AS(run_config_from_json(nested), "field 'gamma': unknown key",
                         InvalidInput);

    json bad_method = bandit_json({1.0, 0.5});
    bad_method["method"] = {{"kind", "plain"}, {"beta", 1.0}};
    CHECK_THROWS_AS(run_config_from_json(bad_method), InvalidInput);

    json bad_eta = bandit_json({1.0, 0.5});
    bad_eta["method"] = {{"kind", "plain"}, {"eta", "fast"}};
    CHECK_THROWS_AS(run_config_from_json(bad_eta), InvalidInput);

    json bad_init = bandit_json({1.0, 0.5});
    bad_init["init"] = "zeros";
    CHECK_THROWS_AS(run_config_from_json(bad_init), InvalidInput);
    bad_init["init"] = {{"seed", -1}};
    CHECK_THROWS_AS(run_config_from_json(bad_init), InvalidInput);
    bad_init["init"] = {{"seed", 1}, {"logits", {0.0, 0.0}}};
    CHECK_THROWS_AS(run_config_from_json(bad_init), InvalidInput);
    bad_init["init"] = {{"probs", {0.5, 0.25, 0.25}}};  // shape mismatch, K = 2
    CHECK_THROWS_AS(run_config_from_json(bad_init), InvalidInput);

    json bad_iter = bandit_json({1.0, 0.5});
    bad_iter["iterations"] = 2.5;
    CHECK_THROWS_AS(run_config_from_json(bad_iter), InvalidInput);

    CHECK_THROWS_WITH_AS(run_config_from_json(bandit_json({2.0, 0.5})),
                         "field 'rewards': rewards must lie in [0,1]", InvalidInput);
  }
}

TEST_CASE("config echo is a fixed point") {
  std::vector<json> configs;
  configs.push_back(bandit_json({1.0, 0.9, 0.1}));
  {
    json j = bandit_json({0.8, 0.2});
    j["method"] = {{"kind", "entropy"}, {"tau", 0.5}, {"eta", 1.5}};
    j["init"] = {{"probs", {0.4, 0.6}}};
    j["record_every"] = 7;
    configs.push_back(j);
  }
  {
    json j;
    j["problem"] = chain_mdp_json();
    j["method"] = {{"kind", "two_stage"}, {"tau", 0.2}, {"t1", "adaptive"}};
    j["mu"] = {0.25, 0.75};
    configs.push_back(j);
  }
  {
    json j = bandit_json({1.0, 0.9, 0.1});
    j["method"] = {{"kind", "decaying"}, {"alpha", 2.0}};
    j["init"] = {{"logits", {0.5, -0.5, 0.0}}};
    configs.push_back(j);
  }
  for (const json& j : configs) {
    const json echo = run_config_to_json(run_config_from_json(j));
    const json again = run_config_to_json(run_config_from_json(echo));
    CHECK(echo == again);
    CHECK(echo.contains("problem"));
  }
}

TEST_CASE("trace summaries") {
  SUBCASE("entropy runs fit an exponential") {
    json j = bandit_json({1.0, 0.9, 0.1});
    j["method"] = {{"kind", "entropy"}, {"tau", 0.2}};
    j["iterations"] = 200;
    RunTrace trace = run(run_config_from_json(j));
    json s = trace_summary_json(trace);
    CHECK(s["config"]["problem"]["rewards"].size() == 3);
    CHECK(s["initial_logits"].size() == 1);
    CHECK(s["final"]["t"] == 200);
    CHECK(s["final"]["tau_t"] == 0.2);
    CHECK(s["c_running"].get<double>() > 0.0);
    CHECK(s["rate_model"] == "exponential");
    CHECK(s["rate_fit"]["slope"].get<double>() < 0.0);
    CHECK_FALSE(s.contains("switch_iteration"));
  }
  SUBCASE("plain runs fit a power law") {
    json j = bandit_json({1.0, 0.9, 0.1});
    j["iterations"] = 2000;
    json s = trace_summary_json(run(run_config_from_json(j)));
    CHECK(s["rate_model"] == "power");
    CHECK(s["rate_fit"]["slope"].get<double>() < 0.0);
    CHECK(s["eta_effective"] == 0.4);
  }
  SUBCASE("two-stage summaries report the switch") {
    json j = bandit_json({1.0, 0.9, 0.1});
    j["method"] = {{"kind", "two_stage"}, {"tau", 0.2}, {"t1", 50}};
    j["iterations"] = 200;
    json s = trace_summary_json(run(run_config_from_json(j)));
    CHECK(s["switch_iteration"] == 51);
    CHECK(s["post_switch_opt_prob_inf"].get<double>() > 0.0);
  }
  SUBCASE("a one-step trace cannot support a fit") {
    json j = bandit_json({1.0, 0.9, 0.1});
    j["iterations"] = 1;
    json s = trace_summary_json(run(run_config_from_json(j)));
    CHECK(s["rate_fit"].is_null());
  }
}

TEST_CASE("cmd_run on a single config") {
  TempDir tmp;
  const fs::path cfg_path = tmp.path / "cfg.json";
  json j = bandit_json({1.0, 0.9, 0.1});
  j["method"] = {{"kind", "entropy"}, {"tau", 0.2}};
  j["iterations"] = 3000;
  write_text(cfg_path, j.dump());

  const fs::path out1 = tmp.path / "trace.csv";
  REQUIRE(cmd_run(cfg_path.string(), out1.string()) == kExitOk);
  const std::string csv1 = read_file(out1);
  CHECK(csv1.rfind("t,delta,soft_delta,opt_prob,min_prob,zeta_norm,grad_norm,tau_t\n",
                   0) == 0);
  CHECK(count_lines(csv1) == 3001);  // header + one row per iteration
  CHECK(csv1.find("\n1,") != std::string::npos);

  const json summary = json::parse(read_file(tmp.path / "trace.summary.json"));
  CHECK(summary["config"]["iterations"] == 3000);
  CHECK(summary["rate_model"] == "exponential");

  const fs::path out2 = tmp.path / "again.csv";
  REQUIRE(cmd_run(cfg_path.string(), out2.string()) == kExitOk);
  CHECK(read_file(out2) == csv1);  // reruns are byte-identical

  const fs::path odd = tmp.path / "trace.dat";
  REQUIRE(cmd_run(cfg_path.string(), odd.string()) == kExitOk);
  CHECK(fs::exists(tmp.path / "trace.dat.summary.json"));
}

TEST_CASE("cmd_run error paths exit with the config code") {
  TempDir tmp;
  const fs::path out = tmp.path / "out.csv";
  CHECK(cmd_run((tmp.path / "missing.json").string(), out.string()) == kExitConfig);

  const fs::path broken = tmp.path / "broken.json";
  write_text(broken, "{\"rewards\": [1.0,");
  CHECK(cmd_run(broken.string(), out.string()) == kExitConfig);

  const fs::path unknown = tmp.path / "unknown.json";
  write_text(unknown, R"({"rewards": [1.0, 0.5], "foo": 1})");
  CHECK(cmd_run(unknown.string(), out.string()) == kExitConfig);

  const fs::path ok = tmp.path / "ok.json";
  write_text(ok, R"({"rewards": [1.0, 0.5], "iterations": 10})");
  CHECK(cmd_run(ok.string(), "") == kExitConfig);  // single runs need --out
  CHECK(cmd_run(ok.string(), (tmp.path / "no_dir" / "x.csv").string()) == kExitConfig);
}

TEST_CASE("cmd_run manifests") {
  TempDir tmp;
  const fs::path out_dir = tmp.path / "outputs";
  json manifest;
  manifest["name"] = "demo";
  manifest["outputs"] = out_dir.string();
  json run_a = bandit_json({1.0, 0.9, 0.1});
  run_a["name"] = "a";
  run_a["iterations"] = 200;
  json run_b = bandit_json({0.7, 0.3});
  run_b["name"] = "b";
  run_b["method"] = {{"kind", "entropy"}, {"tau", 0.5}};
  run_b["iterations"] = 150;
  manifest["runs"] = {run_a, run_b};
  manifest["checks"] = {json{{"suite", "fixtures"}},
                        json{{"suite", "identities"}, {"trials", 5}, {"seed", 11}}};

  const fs::path path = tmp.path / "manifest.json";
  write_text(path, manifest.dump());
  REQUIRE(cmd_run(path.string(), "") == kExitOk);
  for (const char* name : {"a.csv", "a.summary.json", "b.csv", "b.summary.json"})
    CHECK(fs::exists(out_dir / name));

  const std::string checks = read_file(out_dir / "checks.jsonl");
  CHECK(count_lines(checks) > 0);
  std::istringstream lines(checks);
  std::string line;
  while (std::getline(lines, line)) {
    const json c = json::parse(line);
    CHECK(c["pass"] == true);
  }

  SUBCASE("the --out flag overrides the outputs field") {
    json no_out = manifest;
    no_out.erase("outputs");
    no_out.erase("checks");
    const fs::path p2 = tmp.path / "m2.json";
    write_text(p2, no_out.dump());
    CHECK(cmd_run(p2.string(), "") == kExitConfig);  // no directory anywhere
    const fs::path alt = tmp.path / "alt";
    REQUIRE(cmd_run(p2.string(), alt.string()) == kExitOk);
    CHECK(fs::exists(alt / "a.csv"));
    CHECK(read_file(alt / "a.csv") == read_file(out_dir / "a.csv"));
  }
  SUBCASE("validation failures") {
    json dup = manifest;
    dup["runs"][1]["name"] = "a";
    write_text(tmp.path / "dup.json", dup.dump());
    CHECK(cmd_run((tmp.path / "dup.json").string(), "") == kExitConfig);

    json bad_suite = manifest;
    bad_suite["checks"] = {json{{"suite", "nonsense"}}};
    write_text(tmp.path / "bad_suite.json", bad_suite.dump());
    CHECK(cmd_run((tmp.path / "bad_suite.json").string(), "") == kExitConfig);

    json bad_name = manifest;
    bad_name["runs"][0]["name"] = "a/b";
    write_text(tmp.path / "bad_name.json", bad_name.dump());
    CHECK(cmd_run((tmp.path / "bad_name.json").string(), "") == kExitConfig);
  }
}

TEST_CASE("manifest runs are identical across thread counts") {
  TempDir tmp;
  json manifest;
  json run_a = bandit_json({1.0, 0.9, 0.1});
  run_a["name"] = "a";
  run_a["iterations"] = 200;
  json run_b = bandit_json({0.6, 0.4});
  run_b["name"] = "b";
  run_b["iterations"] = 200;
  manifest["runs"] = {run_a, run_b};

  const fs::path path = tmp.path / "m.json";
  write_text(path, manifest.dump());

  ::setenv("PGRATES_THREADS", "1", 1);
  CHECK(effective_threads() == 1);
  REQUIRE(cmd_run(path.string(), (tmp.path / "serial").string()) == kExitOk);
  ::setenv("PGRATES_THREADS", "2", 1);
  CHECK(effective_threads() == 2);
  REQUIRE(cmd_run(path.string(), (tmp.path / "threaded").string()) == kExitOk);
  ::unsetenv("PGRATES_THREADS");
  CHECK(effective_threads() >= 1);

  for (const char* name : {"a.csv", "b.csv"})
    CHECK(read_file(tmp.path / "serial" / name) ==
          read_file(tmp.path / "threaded" / name));
}

TEST_CASE("cmd_verify streams JSON lines and a summary") {
  std::ostringstream out, err;
  REQUIRE(cmd_verify("fixtures", -1, 20200521, out, err) == kExitOk);
  CHECK(count_lines(out.str()) > 0);
  std::istringstream lines(out.str());
  std::string line;
  bool saw_nonconcavity = false;
  while (std::getline(lines, line)) {
    const json c = json::parse(line);
    CHECK(c["pass"] == true);
    if (c["name"] == "nonconcavity_gap") saw_nonconcavity = true;
  }
  CHECK(saw_nonconcavity);
  CHECK(err.str().find("fixtures: ") == 0);
  CHECK(err.str().find(" 0 failures") != std::string::npos);

  SUBCASE("zero trials short-circuits to a vacuous pass") {
    std::ostringstream out0, err0;
    CHECK(cmd_verify("lojasiewicz", 0, 1, out0, err0) == kExitOk);
    CHECK(out0.str().empty());
    CHECK(err0.str() == "lojasiewicz: 0 checks, 0 failures\n");
  }
  SUBCASE("unknown suites use the config exit code") {
    std::ostringstream out2, err2;
    CHECK(cmd_verify("nonsense", -1, 1, out2, err2) == kExitConfig);
  }
  SUBCASE("the degree suite inverts the expected failures") {
    std::ostringstream out3, err3;
    REQUIRE(cmd_verify("degree", 8, 20200521, out3, err3) == kExitOk);
    CHECK(out3.str().find("degree_plain_xi=0.1_expected_fail") != std::string::npos);
  }
}

TEST_CASE("figure presets") {
  SUBCASE("shapes, scales, and determinism") {
    const auto fig2 = figure_runs("fig2", "full");
    REQUIRE(fig2.size() == 1);
    CHECK(fig2[0].config.iterations == 300000);
    CHECK(fig2[0].config.num_actions() == 20);
    CHECK(fig2[0].config.method.eta.value() == 0.4);
    CHECK(figure_runs("fig2", "desk")[0].config.iterations == 30000);

    const auto fig3 = figure_runs("fig3", "desk");
    CHECK(fig3[0].config.method.kind == MethodKind::kEntropy);
    CHECK(fig3[0].config.method.tau == 0.2);
    CHECK(fig3[0].config.iterations == 5000);
    const auto fig2_again = figure_runs("fig2", "full");
    const VectorXd& r2 = std::get<VectorXd>(fig2[0].config.problem);
    CHECK((std::get<VectorXd>(fig2_again[0].config.problem) - r2).cwiseAbs().maxCoeff() ==
          0.0);
    // fig3 reuses the same frozen instance
    CHECK((std::get<VectorXd>(fig3[0].config.problem) - r2).cwiseAbs().maxCoeff() == 0.0);

    const auto fig4 = figure_runs("fig4", "desk");
    REQUIRE(fig4.size() == 2);
    CHECK(fig4[0].name == "fig4_plain");
    CHECK(fig4[1].name == "fig4_entropy");
    CHECK(fig4[0].config.iterations == 1000000);
    VectorXd pi = softmax_vec(fig4[0].config.init.theta.row(0).transpose());
    CHECK(std::abs(pi(0) - 0.01) <= 1e-12);
    CHECK(std::abs(pi(1) - 0.05) <= 1e-12);

    const auto fig5 = figure_runs("fig5", "full");
    REQUIRE(fig5.size() == 4);
    CHECK(fig5[0].config.method.kind == MethodKind::kDecaying);
    CHECK(fig5[3].config.method.alpha == 4.0);
    CHECK(fig5[0].config.iterations == 100000);
  }
  SUBCASE("unknown names are rejected") {
    CHECK_THROWS_AS(figure_runs("fig9", "full"), InvalidInput);
    CHECK_THROWS_AS(figure_runs("fig2", "huge"), InvalidInput);
  }
}

TEST_CASE("cmd_reproduce rebuilds fig5 at desk scale") {
  TempDir tmp;
  const fs::path dir = tmp.path / "fig5";
  REQUIRE(cmd_reproduce("fig5", "desk", dir.string()) == kExitOk);
  for (const char* name : {"fig5_alpha0.5.csv", "fig5_alpha1.csv", "fig5_alpha2.csv",
                           "fig5_alpha4.csv", "fig5.json"})
    CHECK(fs::exists(dir / name));

  const json report = json::parse(read_file(dir / "fig5.json"));
  CHECK(report["figure"] == "fig5");
  CHECK(report["scale"] == "desk");
  CHECK(report["seed"] == 20200525);
  CHECK(report["configs"].size() == 4);
  CHECK(report["fits"].size() == 4);
  for (const auto& [name, fit] : report["fits"].items()) {
    (void)name;
    CHECK(fit["slope"].is_number());
    CHECK(fit["model"] == "power");
  }
  CHECK_FALSE(report.contains("claims"));
}

TEST_CASE("run_cli argv handling") {
  SUBCASE("--help succeeds") {
    const char* argv[] = {"pgrates", "--help"};
    CHECK(run_cli(2, argv) == kExitOk);
  }
  SUBCASE("a subcommand is required") {
    const char* argv[] = {"pgrates"};
    CHECK(run_cli(1, argv) == kExitConfig);
  }
  SUBCASE("unknown subcommands fail") {
    const char* argv[] = {"pgrates", "solve"};
    CHECK(run_cli(2, argv) == kExitConfig);
  }
  SUBCASE("scale values are validated by the parser") {
    const char* argv[] = {"pgrates", "reproduce", "--figure", "fig5",
                          "--scale", "desktop", "--out", "unused"};
    CHECK(run_cli(8, argv) == kExitConfig);
  }
  SUBCASE("end-to-end run through argv") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    write_text(cfg, R"({"rewards": [1.0, 0.5], "iterations": 50})");
    const std::string cfg_s = cfg.string();
    const std::string out_s = (tmp.path / "out.csv").string();
    const char* argv[] = {"pgrates", "run", "--config", cfg_s.c_str(),
                          "--out", out_s.c_str()};
    CHECK(run_cli(6, argv) == kExitOk);
    CHECK(fs::exists(tmp.path / "out.csv"));
    CHECK(fs::exists(tmp.path / "out.summary.json"));
  }
}
