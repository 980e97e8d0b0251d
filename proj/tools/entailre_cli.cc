// Command-line front end for libentailre.

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "entailre/entailre.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr const char *kEndpointEnv = "ENTAILRE_NLI_ENDPOINT";

// Failure of a library call or of the command's own checks.
struct CommandError : std::runtime_error {
  CommandError(const std::string &msg, int code = kExitRuntime)
      : std::runtime_error(msg), exit_code(code) {}
  int exit_code;
};

void Check(ere_status status, const std::string &what) {
  if (status == ERE_OK) return;
  const int code = status == ERE_INVALID_ARGUMENT ? kExitUsage : kExitRuntime;
  throw CommandError(what + ": " + ere_last_error(), code);
}

template <typename T, void (*Free)(T *)>
struct Deleter {
  void operator()(T *p) const { Free(p); }
};
using Schema = std::unique_ptr<ere_schema, Deleter<ere_schema, ere_schema_free>>;
using Backend =
    std::unique_ptr<ere_backend, Deleter<ere_backend, ere_backend_free>>;
using Data = std::unique_ptr<ere_dataset, Deleter<ere_dataset, ere_dataset_free>>;
using Predictions =
    std::unique_ptr<ere_predictions,
                    Deleter<ere_predictions, ere_predictions_free>>;
using Report = std::unique_ptr<ere_report, Deleter<ere_report, ere_report_free>>;

std::string TakeString(char *s) {
  std::string out(s ? s : "");
  ere_string_free(s);
  return out;
}

// Options shared by the commands that score pairs.
struct ScoringOptions {
  std::string backend_uri;
  bool strict_fixture = false;
  unsigned timeout_ms = 30000;
  std::size_t remote_batch = 32;
  unsigned concurrency = 1;
  std::string norel_mode = "threshold";
  double threshold = 0.5;
  std::size_t batch_size = 64;
  unsigned workers = 1;
  bool skip_failures = false;

  void Add(CLI::App *cmd) {
    cmd->add_option("--backend", backend_uri,
                    "fixture:<path>, lexical: or remote:<address>; defaults "
                    "to remote:$ENTAILRE_NLI_ENDPOINT");
    cmd->add_flag("--strict-fixture", strict_fixture,
                  "fail on pairs missing from a fixture table");
    cmd->add_option("--timeout-ms", timeout_ms, "remote request timeout")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--remote-batch", remote_batch, "pairs per remote request")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--concurrency", concurrency,
                    "concurrent remote requests")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--norel-mode", norel_mode, "threshold or template")
        ->check(CLI::IsMember({"threshold", "template"}));
    cmd->add_option("--threshold", threshold, "no-relation threshold")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--batch-size", batch_size, "pairs per scoring call")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--workers", workers, "scoring threads")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--skip-failures", skip_failures,
                  "record failed examples instead of aborting");
  }

  std::string ResolvedUri() const {
    if (!backend_uri.empty()) return backend_uri;
    if (const char *endpoint = std::getenv(kEndpointEnv); endpoint && *endpoint) {
      return std::string("remote:") + endpoint;
    }
    throw CommandError(
        std::string("no backend given (use --backend or set ") + kEndpointEnv +
            ")",
        kExitUsage);
  }

  Backend Open() const {
    ere_backend_options opts;
    ere_backend_options_init(&opts);
    opts.batch_size = remote_batch;
    opts.timeout_ms = timeout_ms;
    opts.concurrency = concurrency;
    opts.strict_fixture = strict_fixture;
    ere_backend *raw = nullptr;
    const std::string uri = ResolvedUri();
    Check(ere_backend_open(uri.c_str(), &opts, &raw), "opening backend " + uri);
    return Backend(raw);
  }

  ere_inference_config Config() const {
    ere_inference_config c;
    ere_inference_config_init(&c);
    c.norel_mode =
        norel_mode == "template" ? ERE_NOREL_TEMPLATE : ERE_NOREL_THRESHOLD;
    c.threshold = threshold;
    c.batch_size = batch_size;
    c.workers = workers;
    c.skip_failures = skip_failures;
    return c;
  }

  json ToJson(const Backend &backend) const {
    const char *desc = "";
    ere_backend_describe(backend.get(), &desc);
    return {{"backend", desc},
            {"norel_mode", norel_mode},
            {"threshold", threshold},
            {"batch_size", batch_size},
            {"workers", workers},
            {"skip_failures", skip_failures},
            {"strict_fixture", strict_fixture},
            {"timeout_ms", timeout_ms},
            {"remote_batch", remote_batch},
            {"concurrency", concurrency}};
  }
};

Schema LoadSchema(const std::string &path) {
  ere_schema *raw = nullptr;
  Check(ere_schema_load(path.c_str(), &raw), "loading schema " + path);
  return Schema(raw);
}

Data LoadData(const std::string &path, const char *negative_label = nullptr) {
  ere_dataset *raw = nullptr;
  Check(ere_dataset_load(path.c_str(), negative_label, &raw),
        "loading dataset " + path);
  return Data(raw);
}

Predictions ReadPredictions(const std::string &path) {
  ere_predictions *raw = nullptr;
  Check(ere_predictions_read(path.c_str(), &raw), "reading predictions " + path);
  return Predictions(raw);
}

const char *NegativeLabel(const Schema &schema) {
  const char *label = nullptr;
  Check(ere_schema_negative_label(schema.get(), &label), "schema");
  return label;
}

std::string Sha256(const std::string &path) {
  char hex[65];
  Check(ere_file_sha256(path.c_str(), hex), "hashing " + path);
  return hex;
}

std::string UtcTimestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void WriteText(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw CommandError("cannot write " + path);
}

// Records how an output file was produced, next to it.
class Manifest {
 public:
  Manifest(std::string command, int argc, char **argv)
      : doc_({{"subcommand", std::move(command)}}) {
    doc_["argv"] = std::vector<std::string>(argv, argv + argc);
    doc_["config"] = json::object();
    doc_["inputs"] = json::object();
    doc_["library_version"] = ere_version();
  }

  void Config(const std::string &key, json value) {
    doc_["config"][key] = std::move(value);
  }
  void Input(const std::string &role, const std::string &path) {
    doc_["inputs"][role] = {{"path", path}, {"sha256", Sha256(path)}};
  }
  void Seed(std::uint64_t seed) { doc_["seed"] = seed; }

  void WriteFor(const std::string &output) {
    doc_["output"] = output;
    doc_["timestamp"] = UtcTimestamp();
    WriteText(output + ".manifest.json", doc_.dump(2) + "\n");
  }

 private:
  json doc_;
};

int RunClassify(const std::string &schema_path, const std::string &data_path,
                const std::string &out_path, bool verbose,
                const ScoringOptions &scoring, Manifest &manifest) {
  const Schema schema = LoadSchema(schema_path);
  const Data data = LoadData(data_path, NegativeLabel(schema));
  const Backend backend = scoring.Open();
  const ere_inference_config config = scoring.Config();
  ere_predictions *raw = nullptr;
  Check(ere_classify(schema.get(), data.get(), backend.get(), &config, &raw),
        "classify");
  const Predictions preds(raw);
  Check(ere_predictions_write(preds.get(), out_path.c_str(), verbose),
        "writing " + out_path);
  std::size_t n = 0, failures = 0;
  ere_predictions_size(preds.get(), &n);
  ere_predictions_failures(preds.get(), &failures);

  manifest.Input("schema", schema_path);
  manifest.Input("data", data_path);
  manifest.Config("scoring", scoring.ToJson(backend));
  manifest.Config("verbose", verbose);
  manifest.WriteFor(out_path);
  std::cerr << "classified " << n << " examples";
  if (failures) std::cerr << " (" << failures << " failed)";
  std::cerr << " -> " << out_path << "\n";
  return 0;
}

struct TuneArgs {
  std::string schema_path;
  std::string dev_path;
  std::string predictions_path;
  std::string eval_path;
  std::string eval_predictions_path;
  std::vector<double> fractions;
  std::size_t runs = 10;
  std::uint64_t seed = 0;
  std::string out_path;
};

Predictions PredictionsFor(const TuneArgs &args, const std::string &data_path,
                           const std::string &predictions_path,
                           const Data &data, const ScoringOptions &scoring,
                           Manifest &manifest, const std::string &role) {
  if (!predictions_path.empty()) {
    manifest.Input(role + "_predictions", predictions_path);
    return ReadPredictions(predictions_path);
  }
  if (args.schema_path.empty()) {
    throw CommandError("--schema is required to classify " + data_path,
                       kExitUsage);
  }
  const Schema schema = LoadSchema(args.schema_path);
  const Backend backend = scoring.Open();
  const ere_inference_config config = scoring.Config();
  ere_predictions *raw = nullptr;
  Check(ere_classify(schema.get(), data.get(), backend.get(), &config, &raw),
        "classify " + data_path);
  manifest.Config("scoring", scoring.ToJson(backend));
  return Predictions(raw);
}

int RunTune(const TuneArgs &args, const ScoringOptions &scoring,
            Manifest &manifest) {
  const char *negative = nullptr;
  Schema schema;
  if (!args.schema_path.empty()) {
    schema = LoadSchema(args.schema_path);
    negative = NegativeLabel(schema);
    manifest.Input("schema", args.schema_path);
  }
  const Data dev = LoadData(args.dev_path, negative);
  manifest.Input("dev", args.dev_path);
  const Predictions dev_preds =
      PredictionsFor(args, args.dev_path, args.predictions_path, dev, scoring,
                     manifest, "dev");

  json out;
  double threshold = 0.0, f1 = 0.0;
  Check(ere_tune_threshold(dev_preds.get(), dev.get(), &threshold, &f1),
        "tune");
  out["threshold"] = threshold;
  out["dev_f1"] = f1;

  if (!args.fractions.empty()) {
    Data eval;
    Predictions eval_preds;
    if (!args.eval_path.empty()) {
      eval = LoadData(args.eval_path, negative);
      manifest.Input("eval", args.eval_path);
      eval_preds = PredictionsFor(args, args.eval_path,
                                  args.eval_predictions_path, eval, scoring,
                                  manifest, "eval");
    }
    char *curve = nullptr;
    Check(ere_threshold_curve(dev_preds.get(), dev.get(), eval_preds.get(),
                              eval.get(), args.fractions.data(),
                              args.fractions.size(), args.runs, args.seed,
                              &curve),
          "threshold curve");
    out["curve"] = json::parse(TakeString(curve));
    manifest.Seed(args.seed);
    manifest.Config("fractions", args.fractions);
    manifest.Config("runs", args.runs);
  }

  const std::string text = out.dump(2) + "\n";
  if (args.out_path.empty()) {
    std::cout << text;
  } else {
    WriteText(args.out_path, text);
    manifest.WriteFor(args.out_path);
  }
  return 0;
}

struct EvalArgs {
  std::string gold_path;
  std::vector<std::string> pred_paths;
  std::string negative_label = "no_relation";
  std::string format = "text";
  std::string confusion_path;
  std::string out_path;
};

int RunEval(const EvalArgs &args, Manifest &manifest) {
  const Data gold = LoadData(args.gold_path, args.negative_label.c_str());
  manifest.Input("gold", args.gold_path);
  manifest.Config("negative_label", args.negative_label);

  std::vector<ere_metrics> runs;
  std::string text;
  json docs = json::array();
  for (std::size_t i = 0; i < args.pred_paths.size(); ++i) {
    const std::string &path = args.pred_paths[i];
    const Predictions preds = ReadPredictions(path);
    manifest.Input("pred" + std::to_string(i), path);
    ere_report *raw = nullptr;
    Check(ere_evaluate(gold.get(), preds.get(), &raw), "evaluating " + path);
    const Report report(raw);
    ere_metrics m;
    Check(ere_report_metrics(report.get(), &m), "metrics");
    runs.push_back(m);

    char *s = nullptr;
    if (args.format == "json") {
      Check(ere_report_json(report.get(), &s), "report");
      json doc = json::parse(TakeString(s));
      doc["predictions"] = path;
      docs.push_back(std::move(doc));
    } else {
      Check(ere_report_text(report.get(), &s), "report");
      if (args.pred_paths.size() > 1) text += "== " + path + "\n";
      text += TakeString(s);
    }
    if (!args.confusion_path.empty()) {
      Check(ere_report_confusion_csv(report.get(), &s), "confusion");
      std::string target = args.confusion_path;
      if (args.pred_paths.size() > 1) target += "." + std::to_string(i);
      WriteText(target, TakeString(s));
    }
  }

  if (runs.size() > 1) {
    json summary;
    auto summarize = [&](const char *name, double ere_metrics::*field) {
      std::vector<double> values;
      for (const ere_metrics &m : runs) values.push_back(m.*field);
      double mean = 0, median = 0, stddev = 0;
      Check(ere_summarize(values.data(), values.size(), &mean, &median,
                          &stddev),
            "summary");
      summary[name] = {{"mean", mean}, {"median", median}, {"stddev", stddev}};
      char line[160];
      std::snprintf(line, sizeof line,
                    "%-10s mean %.4f  median %.4f  stddev %.4f\n", name, mean,
                    median, stddev);
      text += line;
    };
    text += "== summary over " + std::to_string(runs.size()) + " runs\n";
    summarize("precision", &ere_metrics::precision);
    summarize("recall", &ere_metrics::recall);
    summarize("f1", &ere_metrics::f1);
    summarize("p_metric", &ere_metrics::p_metric);
    summarize("pvsn", &ere_metrics::pvsn_metric);
    if (args.format == "json") {
      docs = json{{"runs", docs}, {"summary", summary}};
    }
  } else if (args.format == "json") {
    docs = docs.at(0);
  }

  const std::string out = args.format == "json" ? docs.dump(2) + "\n" : text;
  if (args.out_path.empty()) {
    std::cout << out;
  } else {
    WriteText(args.out_path, out);
    manifest.WriteFor(args.out_path);
  }
  return 0;
}

struct SplitArgs {
  std::string data_path;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string rest_path;
  bool strip_labels = false;
};

int RunSplit(const SplitArgs &args, Manifest &manifest) {
  const Data data = LoadData(args.data_path);
  ere_dataset *selected_raw = nullptr, *rest_raw = nullptr;
  Check(ere_dataset_split(data.get(), args.fraction, args.seed, &selected_raw,
                          args.rest_path.empty() ? nullptr : &rest_raw),
        "split");
  Data selected(selected_raw), rest(rest_raw);
  if (args.strip_labels && rest) {
    ere_dataset *stripped = nullptr;
    Check(ere_dataset_strip_labels(rest.get(), &stripped), "strip labels");
    rest.reset(stripped);
  }
  Check(ere_dataset_save(selected.get(), args.out_path.c_str()),
        "writing " + args.out_path);
  manifest.Input("data", args.data_path);
  manifest.Seed(args.seed);
  manifest.Config("fraction", args.fraction);
  manifest.Config("strip_labels", args.strip_labels);
  if (rest) {
    Check(ere_dataset_save(rest.get(), args.rest_path.c_str()),
          "writing " + args.rest_path);
    manifest.Config("rest", args.rest_path);
    manifest.WriteFor(args.rest_path);
  }
  manifest.WriteFor(args.out_path);

  std::size_t n = 0;
  ere_dataset_size(selected.get(), &n);
  std::cerr << "selected " << n << " examples -> " << args.out_path << "\n";
  return 0;
}

struct PairsArgs {
  std::string schema_path;
  std::string data_path;
  std::uint64_t seed = 0;
  bool norel = false;
  unsigned workers = 1;
  std::string out_path;
};

int RunPairs(const PairsArgs &args, Manifest &manifest) {
  const Schema schema = LoadSchema(args.schema_path);
  const Data data = LoadData(args.data_path, NegativeLabel(schema));
  std::size_t count = 0;
  Check(ere_generate_pairs(data.get(), schema.get(), args.seed, args.norel,
                           args.workers, args.out_path.c_str(), &count),
        "pairs");
  manifest.Input("schema", args.schema_path);
  manifest.Input("data", args.data_path);
  manifest.Seed(args.seed);
  manifest.Config("norel", args.norel);
  manifest.Config("workers", args.workers);
  manifest.WriteFor(args.out_path);
  std::cerr << "wrote " << count << " pairs -> " << args.out_path << "\n";
  return 0;
}

int RunSilver(const std::string &schema_path, const std::string &data_path,
              const std::string &out_path, const std::string &report_path,
              const ScoringOptions &scoring, Manifest &manifest) {
  const Schema schema = LoadSchema(schema_path);
  const Data data = LoadData(data_path, NegativeLabel(schema));
  const Backend backend = scoring.Open();
  const ere_inference_config config = scoring.Config();
  ere_dataset *raw = nullptr;
  char *report = nullptr;
  Check(ere_annotate_silver(data.get(), schema.get(), backend.get(), &config,
                            &raw, &report),
        "silver");
  const Data silver(raw);
  const std::string report_text = TakeString(report) + "\n";
  Check(ere_dataset_save(silver.get(), out_path.c_str()), "writing " + out_path);
  if (report_path.empty()) {
    std::cout << report_text;
  } else {
    WriteText(report_path, report_text);
  }
  manifest.Input("schema", schema_path);
  manifest.Input("data", data_path);
  manifest.Config("scoring", scoring.ToJson(backend));
  manifest.WriteFor(out_path);
  return 0;
}

int RunServe(const std::string &schema_path, const std::string &host, int port,
             const ScoringOptions &scoring) {
  const Backend backend = scoring.Open();
  const ere_inference_config config = scoring.Config();
  // Block the stop signals before the server threads start so that they
  // inherit the mask and only sigwait below sees them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
  ere_service *raw = nullptr;
  Check(ere_service_start(schema_path.c_str(), backend.get(), &config,
                          host.c_str(), port, &raw),
        "starting service");
  std::unique_ptr<ere_service, Deleter<ere_service, ere_service_free>> service(
      raw);
  int bound = 0;
  ere_service_port(service.get(), &bound);
  std::cout << "listening on http://" << host << ":" << bound << std::endl;
  int signal = 0;
  sigwait(&stop_signals, &signal);
  Check(ere_service_stop(service.get()), "stopping service");
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Relation extraction by textual entailment"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ere_version()));

  ScoringOptions scoring;

  std::string schema_path, data_path, out_path;
  bool verbose = false;
  auto *classify = app.add_subcommand("classify", "label a dataset");
  classify->add_option("--schema", schema_path, "schema file")->required();
  classify->add_option("--data", data_path, "TACRED-format dataset")->required();
  classify->add_option("--out", out_path, "predictions (JSON lines)")
      ->required();
  classify->add_flag("--verbose", verbose,
                     "include per-relation scores in the output");
  scoring.Add(classify);

  TuneArgs tune_args;
  auto *tune = app.add_subcommand("tune", "pick the no-relation threshold");
  tune->add_option("--schema", tune_args.schema_path, "schema file");
  tune->add_option("--data", tune_args.dev_path, "labeled development set")
      ->required();
  tune->add_option("--predictions", tune_args.predictions_path,
                   "verbose predictions for --data instead of classifying");
  tune->add_option("--curve-fractions", tune_args.fractions,
                   "development fractions for a threshold curve")
      ->check(CLI::Range(0.0, 1.0));
  tune->add_option("--runs", tune_args.runs, "samples per fraction")
      ->check(CLI::PositiveNumber);
  tune->add_option("--seed", tune_args.seed, "sampling seed");
  tune->add_option("--eval-data", tune_args.eval_path,
                   "set on which curve thresholds are measured");
  tune->add_option("--eval-predictions", tune_args.eval_predictions_path,
                   "verbose predictions for --eval-data");
  tune->add_option("--out", tune_args.out_path, "result JSON (default stdout)");
  scoring.Add(tune);

  EvalArgs eval_args;
  auto *eval = app.add_subcommand("eval", "score predictions against gold");
  eval->add_option("--gold", eval_args.gold_path, "labeled dataset")->required();
  eval->add_option("--pred", eval_args.pred_paths,
                   "prediction files; several give a summary")
      ->required();
  eval->add_option("--negative-label", eval_args.negative_label,
                   "label of the negative class");
  eval->add_option("--format", eval_args.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  eval->add_option("--confusion", eval_args.confusion_path,
                   "write the row-normalized confusion matrix as CSV");
  eval->add_option("--out", eval_args.out_path, "report file (default stdout)");

  SplitArgs split_args;
  auto *split = app.add_subcommand("split", "stratified sample of a dataset");
  split->add_option("--data", split_args.data_path, "dataset")->required();
  split->add_option("--fraction", split_args.fraction, "fraction to keep")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  split->add_option("--seed", split_args.seed, "sampling seed")->required();
  split->add_option("--out", split_args.out_path, "selected examples")
      ->required();
  split->add_option("--rest", split_args.rest_path, "remaining examples");
  split->add_flag("--strip-labels", split_args.strip_labels,
                  "drop gold labels from the --rest output");

  PairsArgs pairs_args;
  auto *pairs = app.add_subcommand("pairs", "compile entailment training pairs");
  pairs->add_option("--schema", pairs_args.schema_path, "schema file")
      ->required();
  pairs->add_option("--data", pairs_args.data_path, "labeled dataset")
      ->required();
  pairs->add_option("--seed", pairs_args.seed, "sampling seed")->required();
  pairs->add_flag("--norel", pairs_args.norel,
                  "add pairs for the no-relation template");
  pairs->add_option("--workers", pairs_args.workers, "threads")
      ->check(CLI::PositiveNumber);
  pairs->add_option("--out", pairs_args.out_path, "pairs (JSON lines)")
      ->required();

  std::string silver_schema, silver_data, silver_out, silver_report;
  auto *silver = app.add_subcommand("silver", "label unlabeled data");
  silver->add_option("--schema", silver_schema, "schema file")->required();
  silver->add_option("--data", silver_data, "dataset")->required();
  silver->add_option("--out", silver_out, "labeled dataset")->required();
  silver->add_option("--report", silver_report,
                     "label distribution JSON (default stdout)");
  scoring.Add(silver);

  std::string serve_schema, host = "127.0.0.1";
  int port = 8080;
  auto *serve = app.add_subcommand("serve", "run the template-authoring API");
  serve->add_option("--schema", serve_schema, "schema file, updated on edits")
      ->required();
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port (0 picks a free one)")
      ->check(CLI::Range(0, 65535));
  scoring.Add(serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << " (see --help)\n";
    return kExitUsage;
  }

  try {
    Manifest manifest(app.get_subcommands().front()->get_name(), argc, argv);
    if (*classify) {
      return RunClassify(schema_path, data_path, out_path, verbose, scoring,
                         manifest);
    }
    if (*tune) return RunTune(tune_args, scoring, manifest);
    if (*eval) return RunEval(eval_args, manifest);
    if (*split) return RunSplit(split_args, manifest);
    if (*pairs) return RunPairs(pairs_args, manifest);
    if (*silver) {
      return RunSilver(silver_schema, silver_data, silver_out, silver_report,
                       scoring, manifest);
    }
    if (*serve) return RunServe(serve_schema, host, port, scoring);
  } catch (const CommandError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
