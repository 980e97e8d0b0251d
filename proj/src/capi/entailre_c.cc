#include "entailre/entailre.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "core/dataset.h"
#include "core/digest.h"
#include "core/error.h"
#include "core/evaluator.h"
#include "core/inference.h"
#include "core/nli_backend.h"
#include "core/pairgen.h"
#include "core/schema.h"
#include "core/service.h"
#include "core/verbalizer.h"
#include "json.hpp"

struct ere_schema {
  entailre::RelationSchema schema;
  std::vector<std::string> labels;
};

struct ere_backend {
  std::shared_ptr<const entailre::Backend> backend;
  std::string description;
};

struct ere_dataset {
  entailre::Dataset dataset;
};

struct ere_predictions {
  std::vector<entailre::Prediction> predictions;
};

struct ere_report {
  entailre::ScoreReport report;
};

struct ere_service {
  std::unique_ptr<entailre::HttpService> http;
  int port = 0;
};

namespace {

using entailre::ErrorCode;

thread_local std::string last_error;

ere_status StatusOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return ERE_INVALID_ARGUMENT;
    case ErrorCode::kParse:
      return ERE_PARSE_ERROR;
    case ErrorCode::kIo:
      return ERE_IO_ERROR;
    case ErrorCode::kNotFound:
      return ERE_NOT_FOUND;
    case ErrorCode::kBackend:
      return ERE_BACKEND_ERROR;
    case ErrorCode::kConflict:
      return ERE_CONFLICT;
    case ErrorCode::kInternal:
      return ERE_INTERNAL_ERROR;
  }
  return ERE_INTERNAL_ERROR;
}

// Runs `fn`, translating exceptions into a status and last_error.
template <typename Fn>
ere_status Guard(Fn &&fn) {
  try {
    fn();
    return ERE_OK;
  } catch (const entailre::Error &e) {
    last_error = e.what();
    return StatusOf(e.code());
  } catch (const std::bad_alloc &) {
    last_error = "out of memory";
    return ERE_INTERNAL_ERROR;
  } catch (const std::exception &e) {
    last_error = e.what();
    return ERE_INTERNAL_ERROR;
  }
}

template <typename... Ptrs>
void Require(Ptrs... ptrs) {
  if (((ptrs == nullptr) || ...)) {
    entailre::Fail(ErrorCode::kInvalidArgument, "null argument");
  }
}

char *CopyString(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

ere_schema *WrapSchema(entailre::RelationSchema schema) {
  auto out = std::make_unique<ere_schema>();
  out->schema = std::move(schema);
  for (const auto &[label, entry] : out->schema.relations()) {
    out->labels.push_back(label);
  }
  return out.release();
}

entailre::InferenceConfig ToConfig(const ere_inference_config *config,
                                   const ere_backend *backend) {
  ere_inference_config defaults;
  ere_inference_config_init(&defaults);
  const ere_inference_config &c = config ? *config : defaults;
  entailre::InferenceConfig out;
  out.norel_mode = c.norel_mode == ERE_NOREL_TEMPLATE
                       ? entailre::NoRelationMode::kTemplate
                       : entailre::NoRelationMode::kThreshold;
  out.threshold = c.threshold;
  out.batch_size = c.batch_size;
  out.workers = c.workers;
  out.skip_failures = c.skip_failures != 0;
  out.backend = backend ? backend->backend : nullptr;
  return out;
}

std::vector<std::string> AlignedGold(const entailre::Dataset &gold,
                                     const std::vector<entailre::Prediction> &preds,
                                     std::vector<std::string> *pred_labels) {
  std::map<std::string_view, const entailre::Prediction *> by_id;
  for (const auto &p : preds) by_id[p.example_id] = &p;
  std::vector<std::string> gold_labels;
  for (const auto &e : gold.examples()) {
    auto it = by_id.find(e.id);
    if (it == by_id.end()) {
      entailre::Fail(ErrorCode::kInvalidArgument,
                     "no prediction for example " + e.id);
    }
    if (!e.gold) {
      entailre::Fail(ErrorCode::kInvalidArgument,
                     "gold example " + e.id + " has no label");
    }
    gold_labels.push_back(*e.gold);
    pred_labels->push_back(it->second->label);
  }
  if (by_id.size() != gold_labels.size()) {
    entailre::Fail(ErrorCode::kInvalidArgument,
                   "predictions include examples missing from gold");
  }
  return gold_labels;
}

}  // namespace

extern "C" {

const char *ere_version(void) { return "0.1.0"; }

const char *ere_status_name(ere_status status) {
  switch (status) {
    case ERE_OK:
      return "ok";
    case ERE_INVALID_ARGUMENT:
      return "invalid argument";
    case ERE_PARSE_ERROR:
      return "parse error";
    case ERE_IO_ERROR:
      return "i/o error";
    case ERE_NOT_FOUND:
      return "not found";
    case ERE_BACKEND_ERROR:
      return "backend error";
    case ERE_CONFLICT:
      return "conflict";
    case ERE_INTERNAL_ERROR:
      return "internal error";
  }
  return "unknown";
}

const char *ere_last_error(void) { return last_error.c_str(); }

void ere_string_free(char *s) { std::free(s); }

ere_status ere_file_sha256(const char *path, char out[65]) {
  return Guard([&] {
    Require(path, out);
    const std::string hex = entailre::FileSha256Hex(path);
    std::memcpy(out, hex.c_str(), 65);
  });
}

/* schema */

ere_status ere_schema_load(const char *path, ere_schema **out) {
  return Guard([&] {
    Require(path, out);
    *out = WrapSchema(entailre::LoadSchema(path));
  });
}

ere_status ere_schema_parse(const char *text, ere_schema **out) {
  return Guard([&] {
    Require(text, out);
    *out = WrapSchema(entailre::ParseSchema(text));
  });
}

ere_status ere_schema_serialize(const ere_schema *schema, char **out) {
  return Guard([&] {
    Require(schema, out);
    *out = CopyString(entailre::SerializeSchema(schema->schema));
  });
}

void ere_schema_free(ere_schema *schema) { delete schema; }

ere_status ere_schema_relation_count(const ere_schema *schema, size_t *out) {
  return Guard([&] {
    Require(schema, out);
    *out = schema->labels.size();
  });
}

ere_status ere_schema_relation_label(const ere_schema *schema, size_t index,
                                     const char **out) {
  return Guard([&] {
    Require(schema, out);
    if (index >= schema->labels.size()) {
      entailre::Fail(ErrorCode::kNotFound, "relation index out of range");
    }
    *out = schema->labels[index].c_str();
  });
}

ere_status ere_schema_template_count(const ere_schema *schema,
                                     const char *relation, size_t *out) {
  return Guard([&] {
    Require(schema, relation, out);
    *out = schema->schema.relation(relation).templates.size();
  });
}

ere_status ere_schema_negative_label(const ere_schema *schema,
                                     const char **out) {
  return Guard([&] {
    Require(schema, out);
    *out = schema->schema.negative_label().c_str();
  });
}

ere_status ere_schema_has_norel_template(const ere_schema *schema, int *out) {
  return Guard([&] {
    Require(schema, out);
    *out = schema->schema.norel_template().has_value();
  });
}

ere_status ere_schema_delta(const ere_schema *schema, const char *relation,
                            const char *subj_type, const char *obj_type,
                            int *out) {
  return Guard([&] {
    Require(schema, relation, subj_type, obj_type, out);
    *out = schema->schema.Delta(relation, subj_type, obj_type);
  });
}

ere_status ere_schema_candidates(const ere_schema *schema,
                                 const char *subj_type, const char *obj_type,
                                 char **out) {
  return Guard([&] {
    Require(schema, subj_type, obj_type, out);
    const nlohmann::json j =
        schema->schema.CandidateRelations(subj_type, obj_type);
    *out = CopyString(j.dump());
  });
}

ere_status ere_verbalize(const char *pattern, const char *subj_text,
                         const char *obj_text, char **out) {
  return Guard([&] {
    Require(pattern, subj_text, obj_text, out);
    *out = CopyString(entailre::Verbalize(pattern, subj_text, obj_text));
  });
}

/* backends */

void ere_backend_options_init(ere_backend_options *options) {
  if (!options) return;
  options->batch_size = 32;
  options->timeout_ms = 30000;
  options->concurrency = 1;
  options->strict_fixture = 0;
}

ere_status ere_backend_open(const char *uri, const ere_backend_options *options,
                            ere_backend **out) {
  return Guard([&] {
    Require(uri, out);
    ere_backend_options defaults;
    ere_backend_options_init(&defaults);
    const ere_backend_options &o = options ? *options : defaults;
    entailre::BackendOptions opts;
    opts.fixture_mode = o.strict_fixture ? entailre::FixtureMode::kStrict
                                         : entailre::FixtureMode::kUniformDefault;
    opts.batch_size = o.batch_size;
    opts.timeout = std::chrono::milliseconds(o.timeout_ms);
    opts.concurrency = o.concurrency;
    auto backend = std::make_unique<ere_backend>();
    backend->backend = entailre::OpenBackend(uri, opts);
    backend->description = backend->backend->Describe();
    *out = backend.release();
  });
}

ere_status ere_backend_describe(const ere_backend *backend, const char **out) {
  return Guard([&] {
    Require(backend, out);
    *out = backend->description.c_str();
  });
}

ere_status ere_backend_score(const ere_backend *backend, const char *premise,
                             const char *hypothesis, double out[3]) {
  return Guard([&] {
    Require(backend, premise, hypothesis, out);
    const entailre::PremiseHypothesisPair pair{premise, hypothesis, {}};
    const auto scores = backend->backend->ScoreBatch(std::span(&pair, 1));
    out[0] = scores[0].entailment;
    out[1] = scores[0].neutral;
    out[2] = scores[0].contradiction;
  });
}

void ere_backend_free(ere_backend *backend) { delete backend; }

/* datasets */

ere_status ere_dataset_load(const char *path, const char *negative_label,
                            ere_dataset **out) {
  return Guard([&] {
    Require(path, out);
    auto ds = std::make_unique<ere_dataset>();
    ds->dataset = entailre::LoadTacred(
        path, negative_label ? negative_label : entailre::kTacredNegativeLabel);
    *out = ds.release();
  });
}

ere_status ere_dataset_save(const ere_dataset *dataset, const char *path) {
  return Guard([&] {
    Require(dataset, path);
    entailre::SaveTacred(dataset->dataset, path);
  });
}

ere_status ere_dataset_size(const ere_dataset *dataset, size_t *out) {
  return Guard([&] {
    Require(dataset, out);
    *out = dataset->dataset.size();
  });
}

ere_status ere_dataset_counts(const ere_dataset *dataset, size_t *positives,
                              size_t *negatives, size_t *unlabeled) {
  return Guard([&] {
    Require(dataset);
    if (positives) *positives = dataset->dataset.positive_count();
    if (negatives) *negatives = dataset->dataset.negative_count();
    if (unlabeled) *unlabeled = dataset->dataset.unlabeled_count();
  });
}

ere_status ere_dataset_label_counts(const ere_dataset *dataset, char **out) {
  return Guard([&] {
    Require(dataset, out);
    const nlohmann::json j = dataset->dataset.label_counts();
    *out = CopyString(j.dump());
  });
}

ere_status ere_dataset_split(const ere_dataset *dataset, double fraction,
                             uint64_t seed, ere_dataset **selected,
                             ere_dataset **rest) {
  return Guard([&] {
    Require(dataset, selected);
    entailre::SplitResult split =
        entailre::StratifiedSplit(dataset->dataset, fraction, seed);
    auto sel = std::make_unique<ere_dataset>();
    sel->dataset = std::move(split.selected);
    if (rest) {
      auto r = std::make_unique<ere_dataset>();
      r->dataset = std::move(split.rest);
      *rest = r.release();
    }
    *selected = sel.release();
  });
}

ere_status ere_dataset_strip_labels(const ere_dataset *dataset,
                                    ere_dataset **out) {
  return Guard([&] {
    Require(dataset, out);
    auto ds = std::make_unique<ere_dataset>();
    ds->dataset = entailre::StripLabels(dataset->dataset);
    *out = ds.release();
  });
}

void ere_dataset_free(ere_dataset *dataset) { delete dataset; }

/* inference */

void ere_inference_config_init(ere_inference_config *config) {
  if (!config) return;
  config->norel_mode = ERE_NOREL_THRESHOLD;
  config->threshold = entailre::kDefaultThreshold;
  config->batch_size = 64;
  config->workers = 1;
  config->skip_failures = 0;
}

ere_status ere_classify(const ere_schema *schema, const ere_dataset *dataset,
                        const ere_backend *backend,
                        const ere_inference_config *config,
                        ere_predictions **out) {
  return Guard([&] {
    Require(schema, dataset, backend, out);
    auto preds = std::make_unique<ere_predictions>();
    preds->predictions = entailre::ClassifyBatch(
        dataset->dataset.examples(), schema->schema, ToConfig(config, backend));
    *out = preds.release();
  });
}

ere_status ere_classify_json(const ere_schema *schema,
                             const ere_backend *backend,
                             const ere_inference_config *config,
                             const char *example_json, char **out) {
  return Guard([&] {
    Require(schema, backend, example_json, out);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(example_json);
    } catch (const nlohmann::json::exception &e) {
      entailre::Fail(ErrorCode::kParse, e.what());
    }
    const entailre::RelationExample example = entailre::ExampleFromTacred(
        record, schema->schema.negative_label());
    const entailre::Prediction p = entailre::Classify(
        example, schema->schema, ToConfig(config, backend));
    *out = CopyString(entailre::PredictionToJson(p, true).dump());
  });
}

ere_status ere_predictions_size(const ere_predictions *predictions,
                                size_t *out) {
  return Guard([&] {
    Require(predictions, out);
    *out = predictions->predictions.size();
  });
}

ere_status ere_predictions_get(const ere_predictions *predictions,
                               size_t index, const char **example_id,
                               const char **label, double *score) {
  return Guard([&] {
    Require(predictions);
    if (index >= predictions->predictions.size()) {
      entailre::Fail(ErrorCode::kNotFound, "prediction index out of range");
    }
    const auto &p = predictions->predictions[index];
    if (example_id) *example_id = p.example_id.c_str();
    if (label) *label = p.label.c_str();
    if (score) *score = p.score;
  });
}

ere_status ere_predictions_failures(const ere_predictions *predictions,
                                    size_t *out) {
  return Guard([&] {
    Require(predictions, out);
    *out = 0;
    for (const auto &p : predictions->predictions) *out += p.error.has_value();
  });
}

ere_status ere_predictions_write(const ere_predictions *predictions,
                                 const char *path, int verbose) {
  return Guard([&] {
    Require(predictions, path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
      entailre::Fail(ErrorCode::kIo, std::string("cannot write ") + path);
    }
    for (const auto &p : predictions->predictions) {
      out << entailre::PredictionToJson(p, verbose != 0).dump() << '\n';
    }
    if (!out) entailre::Fail(ErrorCode::kIo, std::string("short write to ") + path);
  });
}

ere_status ere_predictions_read(const char *path, ere_predictions **out) {
  return Guard([&] {
    Require(path, out);
    std::ifstream in(path);
    if (!in) entailre::Fail(ErrorCode::kIo, std::string("cannot open ") + path);
    auto preds = std::make_unique<ere_predictions>();
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        preds->predictions.push_back(
            entailre::PredictionFromJson(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::exception &e) {
        entailre::Fail(ErrorCode::kParse, std::string(path) + ":" +
                                              std::to_string(lineno) + ": " +
                                              e.what());
      } catch (const entailre::Error &e) {
        entailre::Fail(e.code(), std::string(path) + ":" +
                                     std::to_string(lineno) + ": " + e.what());
      }
    }
    *out = preds.release();
  });
}

void ere_predictions_free(ere_predictions *predictions) { delete predictions; }

ere_status ere_tune_threshold(const ere_predictions *dev_predictions,
                              const ere_dataset *dev, double *threshold,
                              double *f1) {
  return Guard([&] {
    Require(dev_predictions, dev, threshold);
    const auto scores =
        entailre::DevScoresOf(dev_predictions->predictions, dev->dataset);
    const entailre::ThresholdChoice choice = entailre::TuneThreshold(scores);
    *threshold = choice.threshold;
    if (f1) *f1 = choice.f1;
  });
}

ere_status ere_f1_sweep(const ere_predictions *predictions,
                        const ere_dataset *gold, const double *grid,
                        size_t grid_size, double *f1_out) {
  return Guard([&] {
    Require(predictions, gold, grid, f1_out);
    const auto scores =
        entailre::DevScoresOf(predictions->predictions, gold->dataset);
    const auto sweep =
        entailre::F1Sweep(scores, std::span<const double>(grid, grid_size));
    for (std::size_t i = 0; i < sweep.size(); ++i) f1_out[i] = sweep[i].second;
  });
}

ere_status ere_threshold_curve(const ere_predictions *dev_predictions,
                               const ere_dataset *dev,
                               const ere_predictions *eval_predictions,
                               const ere_dataset *eval,
                               const double *fractions, size_t fraction_count,
                               size_t runs, uint64_t seed, char **out) {
  return Guard([&] {
    Require(dev_predictions, dev, fractions, out);
    if ((eval_predictions == nullptr) != (eval == nullptr)) {
      entailre::Fail(ErrorCode::kInvalidArgument,
                     "evaluation predictions and dataset go together");
    }
    const auto eval_scores =
        eval ? entailre::DevScoresOf(eval_predictions->predictions,
                                     eval->dataset)
             : entailre::DevScoresOf(dev_predictions->predictions,
                                     dev->dataset);
    const auto curve = entailre::ThresholdCurve(
        dev->dataset, dev_predictions->predictions, eval_scores,
        std::span<const double>(fractions, fraction_count), runs, seed);
    nlohmann::json j = nlohmann::json::array();
    for (const auto &p : curve) {
      j.push_back({{"fraction", p.fraction},
                   {"runs", p.runs},
                   {"mean_f1", p.mean_f1},
                   {"stderr_f1", p.stderr_f1},
                   {"mean_threshold", p.mean_threshold}});
    }
    *out = CopyString(j.dump(2));
  });
}

/* evaluation */

ere_status ere_evaluate(const ere_dataset *gold,
                        const ere_predictions *predictions, ere_report **out) {
  return Guard([&] {
    Require(gold, predictions, out);
    std::vector<std::string> pred_labels;
    const std::vector<std::string> gold_labels =
        AlignedGold(gold->dataset, predictions->predictions, &pred_labels);
    auto report = std::make_unique<ere_report>();
    report->report = entailre::Evaluate(gold_labels, pred_labels,
                                        gold->dataset.negative_label());
    *out = report.release();
  });
}

ere_status ere_report_metrics(const ere_report *report, ere_metrics *out) {
  return Guard([&] {
    Require(report, out);
    const auto &r = report->report;
    out->precision = r.precision();
    out->recall = r.recall();
    out->f1 = r.f1();
    out->p_metric = r.p_metric();
    out->pvsn_metric = r.pvsn_metric();
    out->gold_positive = r.support.gold_positive;
    out->predicted_positive = r.support.predicted_positive;
    out->correct = r.support.correct;
  });
}

ere_status ere_report_json(const ere_report *report, char **out) {
  return Guard([&] {
    Require(report, out);
    *out = CopyString(entailre::ReportToJson(report->report));
  });
}

ere_status ere_report_text(const ere_report *report, char **out) {
  return Guard([&] {
    Require(report, out);
    *out = CopyString(entailre::FormatReport(report->report));
  });
}

ere_status ere_report_confusion_csv(const ere_report *report, char **out) {
  return Guard([&] {
    Require(report, out);
    *out = CopyString(entailre::ConfusionToCsv(report->report.confusion));
  });
}

void ere_report_free(ere_report *report) { delete report; }

ere_status ere_summarize(const double *values, size_t count, double *mean,
                         double *median, double *stddev) {
  return Guard([&] {
    Require(values);
    const entailre::Summary s =
        entailre::Summarize(std::span<const double>(values, count));
    if (mean) *mean = s.mean;
    if (median) *median = s.median;
    if (stddev) *stddev = s.stddev;
  });
}

/* pairs and silver data */

ere_status ere_generate_pairs(const ere_dataset *dataset,
                              const ere_schema *schema, uint64_t seed,
                              int use_norel_template, unsigned workers,
                              const char *out_path, size_t *count) {
  return Guard([&] {
    Require(dataset, schema, out_path);
    const auto records =
        entailre::GeneratePairs(dataset->dataset, schema->schema, seed,
                                use_norel_template != 0, workers);
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
      entailre::Fail(ErrorCode::kIo, std::string("cannot write ") + out_path);
    }
    entailre::WritePairs(records, out);
    if (!out) {
      entailre::Fail(ErrorCode::kIo, std::string("short write to ") + out_path);
    }
    if (count) *count = records.size();
  });
}

ere_status ere_annotate_silver(const ere_dataset *unlabeled,
                               const ere_schema *schema,
                               const ere_backend *backend,
                               const ere_inference_config *config,
                               ere_dataset **out, char **report) {
  return Guard([&] {
    Require(unlabeled, schema, backend, out);
    entailre::SilverReport silver;
    auto ds = std::make_unique<ere_dataset>();
    ds->dataset = entailre::AnnotateSilver(
        unlabeled->dataset, schema->schema, ToConfig(config, backend), &silver);
    if (report) *report = CopyString(entailre::SilverReportToJson(silver));
    *out = ds.release();
  });
}

/* service */

ere_status ere_service_start(const char *schema_path,
                             const ere_backend *backend,
                             const ere_inference_config *config,
                             const char *host, int port, ere_service **out) {
  return Guard([&] {
    Require(schema_path, backend, out);
    entailre::ServiceConfig cfg;
    cfg.schema = entailre::LoadSchema(schema_path);
    cfg.schema_path = schema_path;
    cfg.inference = ToConfig(config, backend);
    entailre::ValidateConfig(cfg.inference, cfg.schema);
    auto svc = std::make_unique<ere_service>();
    svc->http = std::make_unique<entailre::HttpService>(std::move(cfg));
    svc->port = svc->http->Start(host ? host : "127.0.0.1", port);
    *out = svc.release();
  });
}

ere_status ere_service_port(const ere_service *service, int *out) {
  return Guard([&] {
    Require(service, out);
    *out = service->port;
  });
}

ere_status ere_service_wait(ere_service *service) {
  return Guard([&] {
    Require(service);
    service->http->Wait();
  });
}

ere_status ere_service_stop(ere_service *service) {
  return Guard([&] {
    Require(service);
    service->http->Stop();
  });
}

void ere_service_free(ere_service *service) { delete service; }

}  // extern "C"
