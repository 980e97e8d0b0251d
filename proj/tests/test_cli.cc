#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>

#include "core/dataset.h"
#include "core/digest.h"
#include "core/inference.h"
#include "core/pairgen.h"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "support/oracle.h"
#include "support/scenario.h"
#include "support/temp_dir.h"

using namespace entailre;

namespace {

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult Run(const std::string &args) {
  const std::string cmd = std::string(ENTAILRE_CLI) + " " + args + " 2>&1";
  RunResult r;
  FILE *pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Q(const std::filesystem::path &p) { return "'" + p.string() + "'"; }

// A fixture scenario written to disk: schema, labeled data, fixture table.
struct Workspace {
  explicit Workspace(std::uint64_t seed) : sc(testing::MakeScenario(seed)) {
    SaveSchemaAtomic(sc.schema, dir / "schema.yaml");
    SaveTacred(testing::ScenarioDataset(sc), dir / "data.json");
    std::ofstream out(dir / "fixture.jsonl");
    for (const auto &[key, score] : sc.table) {
      out << nlohmann::json{{"premise", key.first},
                            {"hypothesis", key.second},
                            {"entailment", score.entailment},
                            {"neutral", score.neutral},
                            {"contradiction", score.contradiction}}
                 .dump()
          << "\n";
    }
  }

  std::string Scoring() const {
    return "--backend " + Q("fixture:" + (dir / "fixture.jsonl").string());
  }
  std::string Classify(const std::string &out, const std::string &extra = "") {
    return "classify --schema " + Q(dir / "schema.yaml") + " --data " +
           Q(dir / "data.json") + " " + Scoring() + " --out " + Q(dir / out) +
           " " + extra;
  }

  testing::TempDir dir;
  testing::Scenario sc;
};

std::vector<nlohmann::json> JsonLines(const std::string &text) {
  std::vector<nlohmann::json> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    out.push_back(nlohmann::json::parse(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(Run("").code == 2);
  CHECK(Run("nonsense").code == 2);
  CHECK(Run("classify --data x.json --out y").code == 2);
  CHECK(Run("split --data x.json --fraction 0.1 --out y").code == 2);

  Workspace w(1);
  RunResult r = Run(w.Classify("p.jsonl", "--norel-mode sometimes"));
  CHECK(r.code == 2);
  r = Run("split --data " + Q(w.dir / "data.json") +
          " --fraction 1.5 --seed 1 --out " + Q(w.dir / "s.json"));
  CHECK(r.code == 2);
  CHECK(r.output.rfind("error: ", 0) == 0);
  CHECK(std::count(r.output.begin(), r.output.end(), '\n') == 1);
  CHECK(Run("--help").code == 0);
}

TEST_CASE("runtime errors exit with 1 and one line") {
  Workspace w(2);
  RunResult r = Run("classify --schema /nonexistent.yaml --data " +
                    Q(w.dir / "data.json") + " " + w.Scoring() + " --out " +
                    Q(w.dir / "p.jsonl"));
  CHECK(r.code == 1);
  CHECK(r.output.rfind("error: ", 0) == 0);
  CHECK(r.output.find("/nonexistent.yaml") != std::string::npos);
  CHECK(std::count(r.output.begin(), r.output.end(), '\n') == 1);

  testing::WriteFile(w.dir / "empty.jsonl", "");
  r = Run("classify --schema " + Q(w.dir / "schema.yaml") + " --data " +
          Q(w.dir / "data.json") + " --strict-fixture --backend " +
          Q("fixture:" + (w.dir / "empty.jsonl").string()) + " --out " +
          Q(w.dir / "p.jsonl"));
  CHECK(r.code == 1);
  CHECK(r.output.rfind("error: ", 0) == 0);
  CHECK_FALSE(std::filesystem::exists(w.dir / "p.jsonl.manifest.json"));
}

TEST_CASE("classify matches the in-process engine") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    Workspace w(seed);
    for (const char *mode : {"threshold", "template"}) {
      const RunResult r = Run(w.Classify("p.jsonl", std::string("--verbose --norel-mode ") + mode));
      REQUIRE(r.code == 0);
      InferenceConfig config;
      config.backend = w.sc.backend;
      config.norel_mode = std::string(mode) == "template"
                              ? NoRelationMode::kTemplate
                              : NoRelationMode::kThreshold;
      const Dataset d = testing::ScenarioDataset(w.sc);
      const auto expected = ClassifyBatch(d.examples(), w.sc.schema, config);
      const auto lines = JsonLines(testing::ReadFile(w.dir / "p.jsonl"));
      REQUIRE(lines.size() == expected.size());
      for (std::size_t i = 0; i < lines.size(); ++i) {
        CHECK(lines[i] == PredictionToJson(expected[i], true));
        const Prediction o = testing::OracleClassify(
            d.examples()[i], w.sc.schema, w.sc.table, config.norel_mode, 0.5);
        CHECK(lines[i]["label"] == o.label);
        CHECK(lines[i]["score"].get<double>() == o.score);
      }
    }
  }
}

TEST_CASE("outputs are identical across runs and worker counts") {
  Workspace w(10);
  REQUIRE(w.sc.schema.relations().size() >= 2);
  REQUIRE(Run(w.Classify("w1.jsonl", "--workers 1 --verbose")).code == 0);
  REQUIRE(Run(w.Classify("w4.jsonl", "--workers 4 --batch-size 3 --verbose")).code == 0);
  REQUIRE(Run(w.Classify("w1b.jsonl", "--workers 1 --verbose")).code == 0);
  const std::string base = testing::ReadFile(w.dir / "w1.jsonl");
  CHECK(testing::ReadFile(w.dir / "w4.jsonl") == base);
  CHECK(testing::ReadFile(w.dir / "w1b.jsonl") == base);

  const std::string pairs = "pairs --schema " + Q(w.dir / "schema.yaml") +
                            " --data " + Q(w.dir / "data.json") +
                            " --seed 9 --norel --out ";
  REQUIRE(Run(pairs + Q(w.dir / "a.jsonl") + " --workers 1").code == 0);
  REQUIRE(Run(pairs + Q(w.dir / "b.jsonl") + " --workers 5").code == 0);
  CHECK(testing::ReadFile(w.dir / "a.jsonl") == testing::ReadFile(w.dir / "b.jsonl"));

  const std::string split = "split --data " + Q(w.dir / "data.json") +
                            " --fraction 0.3 --seed 4 --out ";
  REQUIRE(Run(split + Q(w.dir / "s1.json")).code == 0);
  REQUIRE(Run(split + Q(w.dir / "s2.json")).code == 0);
  CHECK(testing::ReadFile(w.dir / "s1.json") == testing::ReadFile(w.dir / "s2.json"));
}

TEST_CASE("manifests record inputs, config and seed") {
  Workspace w(7);
  const std::string split = "split --data " + Q(w.dir / "data.json") +
                            " --fraction 0.5 --seed 11 --out " +
                            Q(w.dir / "s.json") + " --rest " + Q(w.dir / "r.json");
  REQUIRE(Run(split).code == 0);
  const auto m = nlohmann::json::parse(
      testing::ReadFile(w.dir / "s.json.manifest.json"));
  CHECK(m["subcommand"] == "split");
  CHECK(m["seed"] == 11);
  CHECK(m["inputs"]["data"]["sha256"] == FileSha256Hex(w.dir / "data.json"));
  CHECK(m["output"] == (w.dir / "s.json").string());
  CHECK(m["argv"].size() > 5);
  CHECK(m["library_version"].is_string());
  CHECK(m["timestamp"].get<std::string>().back() == 'Z');

  // Selected and rest partition the input.
  const Dataset all = LoadTacred(w.dir / "data.json");
  const Dataset s = LoadTacred(w.dir / "s.json");
  const Dataset r = LoadTacred(w.dir / "r.json");
  CHECK(s.size() + r.size() == all.size());
  CHECK(s == StratifiedSplit(all, 0.5, 11).selected);
  CHECK(r == StratifiedSplit(all, 0.5, 11).rest);

  REQUIRE(Run(w.Classify("p.jsonl", "--threshold 0.625")).code == 0);
  const auto cm = nlohmann::json::parse(
      testing::ReadFile(w.dir / "p.jsonl.manifest.json"));
  CHECK(cm["config"]["scoring"]["threshold"] == 0.625);
  CHECK(cm["inputs"]["schema"]["sha256"] == FileSha256Hex(w.dir / "schema.yaml"));
}

TEST_CASE("split can strip labels from the remainder") {
  Workspace w(8);
  REQUIRE(Run("split --data " + Q(w.dir / "data.json") +
              " --fraction 0.2 --seed 1 --strip-labels --out " +
              Q(w.dir / "l.json") + " --rest " + Q(w.dir / "u.json"))
              .code == 0);
  const Dataset l = LoadTacred(w.dir / "l.json");
  const Dataset u = LoadTacred(w.dir / "u.json");
  CHECK(l.unlabeled_count() == 0);
  CHECK(u.unlabeled_count() == u.size());
  CHECK(u.size() > 0);
}

TEST_CASE("tune and eval") {
  Workspace w(9);
  REQUIRE(Run(w.Classify("p.jsonl", "--verbose")).code == 0);
  const std::string tune = "tune --schema " + Q(w.dir / "schema.yaml") +
                           " --data " + Q(w.dir / "data.json") +
                           " --predictions " + Q(w.dir / "p.jsonl");
  RunResult r = Run(tune + " --out " + Q(w.dir / "t.json"));
  REQUIRE(r.code == 0);
  const auto t = nlohmann::json::parse(testing::ReadFile(w.dir / "t.json"));

  InferenceConfig config;
  config.backend = w.sc.backend;
  const Dataset d = testing::ScenarioDataset(w.sc);
  const auto preds = ClassifyBatch(d.examples(), w.sc.schema, config);
  const auto [best_t, best_f1] = testing::OracleTune(DevScoresOf(preds, d));
  CHECK(t["threshold"].get<double>() == best_t);
  CHECK(t["dev_f1"].get<double>() == doctest::Approx(best_f1));

  // Tuning runs the backend itself when no predictions are given.
  r = Run("tune --schema " + Q(w.dir / "schema.yaml") + " --data " +
          Q(w.dir / "data.json") + " " + w.Scoring() +
          " --curve-fractions 0.5 1.0 --runs 3 --seed 2");
  REQUIRE(r.code == 0);
  const auto t2 = nlohmann::json::parse(r.output);
  CHECK(t2["threshold"] == t["threshold"]);
  CHECK(t2["curve"].size() == 2);

  // Terse predictions cannot be tuned.
  REQUIRE(Run(w.Classify("terse.jsonl")).code == 0);
  r = Run("tune --data " + Q(w.dir / "data.json") + " --predictions " +
          Q(w.dir / "terse.jsonl"));
  CHECK(r.code != 0);
  CHECK(r.output.find("verbose") != std::string::npos);

  r = Run("eval --gold " + Q(w.dir / "data.json") + " --pred " +
          Q(w.dir / "p.jsonl") + " --format json --confusion " +
          Q(w.dir / "c.csv"));
  REQUIRE(r.code == 0);
  const auto report = nlohmann::json::parse(r.output);
  std::vector<std::string> gold, pred;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    gold.push_back(*d.examples()[i].gold);
    pred.push_back(preds[i].label);
  }
  const Prf o = testing::OraclePrf(gold, pred, "no_relation");
  CHECK(report["f1"].get<double>() == doctest::Approx(o.f1));
  CHECK(report["precision"].get<double>() == doctest::Approx(o.precision));
  CHECK(testing::ReadFile(w.dir / "c.csv").rfind("gold\\pred,", 0) == 0);

  r = Run("eval --gold " + Q(w.dir / "data.json") + " --pred " +
          Q(w.dir / "p.jsonl") + " --pred " + Q(w.dir / "terse.jsonl"));
  REQUIRE(r.code == 0);
  CHECK(r.output.find("mean") != std::string::npos);

  SaveTacred(StratifiedSplit(d, 0.5, 1).selected, w.dir / "half.json");
  r = Run("eval --gold " + Q(w.dir / "half.json") + " --pred " +
          Q(w.dir / "p.jsonl"));
  CHECK(r.code != 0);
}

TEST_CASE("pairs and silver") {
  Workspace w(10);
  REQUIRE(w.sc.schema.relations().size() >= 2);
  RunResult r = Run("pairs --schema " + Q(w.dir / "schema.yaml") + " --data " +
                    Q(w.dir / "data.json") + " --seed 3 --out " +
                    Q(w.dir / "pairs.jsonl"));
  REQUIRE(r.code == 0);
  const Dataset d = testing::ScenarioDataset(w.sc);
  std::ostringstream expected;
  WritePairs(GeneratePairs(d, w.sc.schema, 3, false), expected);
  CHECK(testing::ReadFile(w.dir / "pairs.jsonl") == expected.str());

  r = Run("silver --schema " + Q(w.dir / "schema.yaml") + " --data " +
          Q(w.dir / "data.json") + " " + w.Scoring() + " --out " +
          Q(w.dir / "silver.json") + " --report " + Q(w.dir / "report.json"));
  REQUIRE(r.code == 0);
  InferenceConfig config;
  config.backend = w.sc.backend;
  const Dataset silver = LoadTacred(w.dir / "silver.json");
  CHECK(silver == AnnotateSilver(StripLabels(d), w.sc.schema, config, nullptr));
  const auto report =
      nlohmann::json::parse(testing::ReadFile(w.dir / "report.json"));
  CHECK(report["total"] == d.size());
}

TEST_CASE("serve answers requests and stops on SIGTERM") {
  Workspace w(11);
  int out[2];
  REQUIRE(::pipe(out) == 0);
  const pid_t pid = ::fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    ::dup2(out[1], STDOUT_FILENO);
    ::close(out[0]);
    const std::string schema = (w.dir / "schema.yaml").string();
    const std::string backend = "fixture:" + (w.dir / "fixture.jsonl").string();
    ::execl(ENTAILRE_CLI, ENTAILRE_CLI, "serve", "--schema", schema.c_str(),
            "--backend", backend.c_str(), "--port", "0", nullptr);
    ::_exit(127);
  }
  ::close(out[1]);
  std::string banner;
  char c;
  while (::read(out[0], &c, 1) == 1 && c != '\n') banner += c;
  ::close(out[0]);
  REQUIRE(banner.rfind("listening on http://127.0.0.1:", 0) == 0);
  const int port = std::stoi(banner.substr(banner.rfind(':') + 1));

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/schema");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(ParseSchema(res->body) == w.sc.schema);

  // /classify-one agrees with classify on the same example.
  const Dataset d = testing::ScenarioDataset(w.sc);
  InferenceConfig config;
  config.backend = w.sc.backend;
  const RelationExample &e = d.examples().front();
  res = client.Post("/classify-one", ExampleToTacred(e, "no_relation").dump(),
                    "application/json");
  REQUIRE(res);
  CHECK(nlohmann::json::parse(res->body) ==
        PredictionToJson(Classify(e, w.sc.schema, config), true));

  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
}
