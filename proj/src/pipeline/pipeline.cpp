//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "llm4sd/descriptors/descriptors.hpp"
#include "llm4sd/oracle/prompts.hpp"
#include "llm4sd/rulekit/json.hpp"
#include "llm4sd/util/csv.hpp"
#include "llm4sd/util/hash.hpp"

namespace llm4sd::pipeline {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void data_error(const std::string &msg) { throw PipelineError(kExitData, msg); }
[[noreturn]] void oracle_error(const std::string &msg) { throw PipelineError(kExitOracle, msg); }

std::string rule_id(const char *prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%02zu", prefix, i + 1);
  return buf;
}

std::string fmt(double v, const char *spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<mol::Molecule> molecules(const data::Dataset &ds, const std::vector<std::size_t> &rows) {
  std::vector<mol::Molecule> out;
  out.reserve(rows.size());
  for (std::size_t r: rows)
    out.push_back(*ds.at(r).mol);
  return out;
}

learn::Matrix to_matrix(const rules::FeatureMatrix &fm) {
  return learn::Matrix(fm.rows, fm.cols(), fm.values);
}

std::vector<double> labels(const data::Dataset &ds, const std::vector<std::size_t> &rows) {
  std::vector<double> y;
  y.reserve(rows.size());
  for (std::size_t r: rows)
    y.push_back(ds.label(r));
  return y;
}

PartitionMetrics score(learn::TaskKind kind, const std::vector<double> &pred,
                       const std::vector<double> &truth) {
  PartitionMetrics m;
  m.n = truth.size();
  if (truth.empty()) {
    m.note = "empty partition";
    return m;
  }
  if (kind == learn::TaskKind::kRegression) {
    m.rmse = stats::rmse(pred, truth);
    m.mae = stats::mae(pred, truth);
    return m;
  }
  std::vector<int> y(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i)
    y[i] = truth[i] > 0.5 ? 1 : 0;
  const auto ones = std::count(y.begin(), y.end(), 1);
  if (ones == 0 || ones == static_cast<long>(y.size())) {
    m.note = "single class; AUC undefined";
    return m;
  }
  m.auc = stats::auc_roc(pred, y);
  return m;
}

learn::Model fit(const RunConfig &c, learn::TaskKind kind, const learn::Matrix &x,
                 const std::vector<double> &y) {
  if (c.model == ModelChoice::kForest)
    return learn::train_forest(x, y, kind, c.forest, c.seed);
  if (kind == learn::TaskKind::kClassification)
    return learn::fit_logistic(x, y, c.logistic);
  return learn::fit_linear(x, y);
}

std::vector<double> predict_all(const learn::Model &m, const learn::Matrix &x) {
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i)
    out[i] = learn::predict(m, x.row(i));
  return out;
}

void write_json(const fs::path &p, const nlohmann::json &j) {
  util::write_text_file(p.string(), j.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path &p) {
  try {
    return nlohmann::json::parse(util::read_text_file(p.string()));
  } catch (const nlohmann::json::exception &e) {
    data_error(p.string() + ": " + e.what());
  }
}

std::string describe_prediction(learn::TaskKind kind, double raw) {
  if (kind == learn::TaskKind::kRegression)
    return fmt(raw);
  return std::string("class ") + (raw >= 0.5 ? "1" : "0") + " (probability of class 1: "
         + fmt(raw, "%.3f") + ")";
}

nlohmann::json optional_number(const std::optional<double> &v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

learn::TaskKind TrainedTask::kind() const {
  if (const auto *f = std::get_if<learn::Forest>(&model))
    return f->kind;
  return std::get<learn::LinearModel>(model).kind == learn::LinearKind::kLogistic
             ? learn::TaskKind::kClassification
             : learn::TaskKind::kRegression;
}

oracle::TaskSpec resolve_task(const RunConfig &c) {
  const auto t = oracle::find_task(c.task);
  if (!t)
    throw PipelineError(kExitUsage, "unknown task '" + c.task + "'");
  return c.corrected_descriptions ? oracle::with_corrected_description(*t) : *t;
}

TaskData load_task_data(const RunConfig &c) {
  TaskData td;
  td.task = resolve_task(c);
  if (c.dataset_path.empty())
    throw PipelineError(kExitUsage, "no dataset path given");
  data::Schema schema;
  schema.label_columns = {td.task.label_column};
  schema.kind = td.task.kind;
  if (!c.smiles_column.empty())
    schema.smiles_column = c.smiles_column;
  else if (const auto m = data::find_manifest(td.task.dataset); m && !m->smiles_column.empty())
    schema.smiles_column = m->smiles_column;
  try {
    td.dataset = data::load_csv(c.dataset_path, schema, td.task.dataset);
    td.split = c.split == data::SplitMethod::kScaffold
                   ? data::scaffold_split(td.dataset, c.fractions)
                   : data::random_split(td.dataset, c.fractions, c.split_seed);
  } catch (const data::DataError &e) {
    data_error(e.what());
  }
  return td;
}

// ---- rule sources -------------------------------------------------------

namespace {

rules::RuleSet transcribe_all(const std::string &task, const std::vector<std::string> &prose,
                              const char *prefix, rules::Provenance provenance,
                              oracle::Backend *llm, const oracle::PhraseRegistry &registry) {
  rules::RuleSet rs;
  rs.task = task;
  std::string failures;
  for (std::size_t i = 0; i < prose.size(); ++i) {
    rules::Rule r;
    r.id = rule_id(prefix, i);
    r.provenance = provenance;
    r.source_text = prose[i];
    oracle::Transcription t = oracle::transcribe(prose[i], registry, llm);
    r.expr = std::move(t.expr);
    r.reason = t.reason;
    if (!r.transcribed())
      failures += "\n  " + r.id + ": " + r.reason + " (\"" + r.source_text + "\")";
    rs.rules.push_back(std::move(r));
  }
  if (rs.active().empty())
    oracle_error("no transcribable rules among " + std::to_string(prose.size()) + failures);
  return rs;
}

}  // namespace

rules::RuleSet run_synthesis(const RunConfig &c, oracle::Backend &backend,
                             const oracle::PhraseRegistry &registry) {
  const oracle::TaskSpec task = resolve_task(c);
  try {
    std::vector<std::string> prose = oracle::extract_rules(
        backend.complete(oracle::build_synthesis_prompt(task, c.synthesis_rules)));
    if (prose.empty())
      oracle_error("synthesis response contained no rules");
    if (prose.size() > static_cast<std::size_t>(c.synthesis_rules))
      prose.resize(static_cast<std::size_t>(c.synthesis_rules));
    return transcribe_all(task.id, prose, "syn", rules::Provenance::kSynthesized,
                          c.llm_transcribe ? &backend : nullptr, registry);
  } catch (const oracle::OracleError &e) {
    oracle_error(std::string("synthesis: ") + e.what());
  } catch (const oracle::PromptError &e) {
    throw PipelineError(kExitUsage, e.what());
  }
}

rules::RuleSet run_inference(const RunConfig &c, const TaskData &data, oracle::Backend &backend,
                             const oracle::PhraseRegistry &registry) {
  if (data.split.train.empty())
    data_error("inference needs a non-empty training partition");
  std::vector<std::vector<std::size_t>> batches;
  try {
    batches = data::sample_batches(data.dataset, data.split.train,
                                   static_cast<std::size_t>(c.batch_size),
                                   static_cast<std::size_t>(c.n_batches), c.batch_seed);
  } catch (const data::DataError &e) {
    data_error(e.what());
  }
  try {
    std::vector<std::string> collected;
    for (const auto &batch: batches) {
      std::vector<oracle::LabeledInstance> inst;
      for (std::size_t r: batch)
        inst.push_back({data.dataset.at(r).smiles, data.dataset.label(r)});
      std::vector<std::string> got = oracle::extract_rules(
          backend.complete(oracle::build_inference_prompt(data.task, inst, c.inference_rules)));
      if (got.size() > static_cast<std::size_t>(c.inference_rules))
        got.resize(static_cast<std::size_t>(c.inference_rules));
      collected.insert(collected.end(), got.begin(), got.end());
    }
    if (collected.empty())
      oracle_error("inference responses contained no rules");
    std::vector<std::string> summary = oracle::summarize_rules(collected, backend);
    const std::size_t cap = static_cast<std::size_t>(c.n_batches) * c.inference_rules;
    if (summary.size() > cap)
      summary.resize(cap);
    return transcribe_all(data.task.id, summary, "inf", rules::Provenance::kInferred,
                          c.llm_transcribe ? &backend : nullptr, registry);
  } catch (const oracle::OracleError &e) {
    oracle_error(std::string("inference: ") + e.what());
  } catch (const oracle::PromptError &e) {
    throw PipelineError(kExitUsage, e.what());
  }
}

rules::RuleSet combine_rulesets(const std::vector<rules::RuleSet> &sets, const std::string &task) {
  rules::RuleSet out;
  out.task = task;
  for (const rules::RuleSet &rs: sets)
    for (const rules::Rule *r: rs.active()) {
      const bool dup = std::any_of(out.rules.begin(), out.rules.end(),
                                   [&](const rules::Rule &o) { return *o.expr == *r->expr; });
      if (!dup)
        out.rules.push_back(*r);
    }
  try {
    rules::check_unique_ids(out);
  } catch (const rules::RuleError &e) {
    data_error(std::string("combined ruleset: ") + e.what());
  }
  return out;
}

// ---- training -----------------------------------------------------------

TrainedTask run_train(const RunConfig &c, const TaskData &data, const rules::RuleSet &ruleset,
                      std::string id) {
  TrainedTask t;
  t.id = id.empty() ? c.task : std::move(id);
  t.config = c;
  t.ruleset.task = ruleset.task;
  for (const rules::Rule *r: ruleset.active())
    t.ruleset.rules.push_back(*r);
  if (t.ruleset.rules.empty())
    data_error("ruleset has no transcribed rules to train on");
  t.split = data.split;
  const learn::TaskKind kind = data.task.kind;

  const auto features = [&](const std::vector<std::size_t> &rows) {
    return to_matrix(rules::featurize(t.ruleset, molecules(data.dataset, rows), rows));
  };
  const learn::Matrix x_train = features(t.split.train);
  const std::vector<double> y_train = labels(data.dataset, t.split.train);
  if (x_train.rows == 0)
    data_error("training partition is empty");
  if (kind == learn::TaskKind::kClassification) {
    const auto ones = std::count_if(y_train.begin(), y_train.end(), [](double v) { return v > 0.5; });
    if (ones == 0 || ones == static_cast<long>(y_train.size()))
      data_error("degenerate labels: the training partition holds a single class");
  }
  try {
    t.model = fit(c, kind, x_train, y_train);
    t.importances = learn::model_importances(t.model, x_train);
    t.metrics["train"] = score(kind, predict_all(t.model, x_train), y_train);
    for (const char *part: {"valid", "test"}) {
      const auto &rows = std::string(part) == "valid" ? t.split.valid : t.split.test;
      const learn::Matrix x = features(rows);
      t.metrics[part] = score(kind, predict_all(t.model, x), labels(data.dataset, rows));
    }
  } catch (const learn::LearnError &e) {
    data_error(std::string("training: ") + e.what());
  }

  t.provenance.config_hash = config_hash(c);
  t.provenance.transcript_path = c.transcript_path;
  t.provenance.transcript_hash = file_sha256(c.transcript_path);
  t.provenance.dataset_path = c.dataset_path;
  t.provenance.dataset_checksum = data.dataset.checksum;
  t.provenance.model_hash = learn::model_hash(t.model);
  return t;
}

// ---- validation ---------------------------------------------------------

std::vector<stats::RuleVerdict> run_validate_rules(
    const TrainedTask &t, const TaskData &data,
    const std::optional<std::vector<std::pair<std::string, stats::Annotation>>> &annotations) {
  const std::vector<std::size_t> &rows = t.split.train;
  const rules::FeatureMatrix fm =
      rules::featurize(t.ruleset, molecules(data.dataset, rows), rows);
  const std::vector<double> y = labels(data.dataset, rows);
  std::map<std::string, stats::Annotation> notes;
  if (annotations)
    for (const auto &[id, a]: *annotations)
      notes[id] = a;

  std::vector<stats::RuleVerdict> out;
  for (std::size_t j = 0; j < fm.cols(); ++j) {
    const std::vector<double> x = fm.column(j);
    stats::TestResult test;
    if (t.kind() == learn::TaskKind::kClassification) {
      std::vector<double> pos, neg;
      for (std::size_t i = 0; i < x.size(); ++i)
        (y[i] > 0.5 ? pos : neg).push_back(x[i]);
      test = stats::mann_whitney_u(pos, neg);
    } else {
      const bool constant =
          std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
      if (constant) {
        test.method = stats::Method::kSlopeT;
        test.n1 = x.size();
        test.degenerate = true;
        test.p_value = 1.0;
      } else {
        test = stats::slope_t_test(x, y);
      }
    }
    std::optional<bool> supported;
    std::string note;
    if (const auto it = notes.find(fm.columns[j]); it != notes.end()) {
      supported = it->second.supported;
      note = it->second.citation_note;
    }
    out.push_back(stats::classify_rule(fm.columns[j], test, supported, note));
  }
  return out;
}

std::map<std::string, std::size_t> category_counts(const std::vector<stats::RuleVerdict> &v) {
  std::map<std::string, std::size_t> out;
  for (stats::Category c: {stats::Category::kSignificantSupported,
                           stats::Category::kSignificantNotFound, stats::Category::kInsignificant,
                           stats::Category::kSignificantUnannotated})
    out[std::string(stats::category_name(c))] = 0;
  for (const stats::RuleVerdict &r: v)
    ++out[std::string(stats::category_name(r.category))];
  return out;
}

// ---- explanation --------------------------------------------------------

Prediction predict_molecule(const TrainedTask &t, const mol::Molecule &m) {
  Prediction p;
  const rules::FeatureMatrix fm = rules::featurize(t.ruleset, {m});
  p.features = fm.row(0);
  p.raw = learn::predict(t.model, p.features);
  return p;
}

Explanation explain(const TrainedTask &t, const mol::Molecule &m, std::string smiles,
                    std::size_t k, ExplainMode mode, oracle::Backend *backend) {
  const Prediction p = predict_molecule(t, m);
  const learn::TaskKind kind = t.kind();
  Explanation e;
  e.smiles = std::move(smiles);
  if (kind == learn::TaskKind::kClassification) {
    e.prediction = p.raw >= 0.5 ? 1.0 : 0.0;
    e.probability = p.raw;
  } else {
    e.prediction = p.raw;
  }
  std::vector<std::size_t> order(t.ruleset.rules.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return t.importances[a] > t.importances[b];
  });
  k = std::min(k, order.size());
  for (std::size_t i = 0; i < k; ++i) {
    const rules::Rule &r = t.ruleset.rules[order[i]];
    e.contributions.push_back(
        {r.id, rules::to_string(*r.expr), r.source_text, p.features[order[i]], t.importances[order[i]]});
  }

  const oracle::TaskSpec task = resolve_task(t.config);
  const std::string pred_text = describe_prediction(kind, p.raw);
  std::ostringstream text;
  text << "Prediction for " << e.smiles << ": " << pred_text << ".\n";
  text << "Task: " << task.description << ".\n";
  if (e.contributions.empty()) {
    text << "No rules were requested.\n";
  } else {
    text << "Most important rules:\n";
    for (std::size_t i = 0; i < e.contributions.size(); ++i) {
      const Contribution &c = e.contributions[i];
      text << i + 1 << ". " << (c.source_text.empty() ? c.expr : c.source_text) << " [" << c.expr
           << "] value " << fmt(c.value) << ", importance " << fmt(100.0 * c.importance, "%.1f")
           << "%\n";
    }
  }
  e.narrative = text.str();
  e.generator = "template";

  if (mode == ExplainMode::kLlm) {
    if (!backend) {
      e.notice = "no language model backend configured; template explanation used";
      return e;
    }
    oracle::ExplainInput in;
    in.smiles = e.smiles;
    in.task_description = task.description;
    in.prediction = pred_text;
    for (const Contribution &c: e.contributions)
      in.items.push_back({c.source_text.empty() ? c.expr : c.source_text, c.value, c.importance});
    try {
      e.narrative = backend->complete(oracle::build_explain_prompt(in));
      e.generator = "llm";
    } catch (const oracle::OracleError &err) {
      e.notice = std::string("language model explanation failed (") + err.what()
                 + "); template explanation used";
    }
  }
  return e;
}

nlohmann::json to_json(const Explanation &e) {
  nlohmann::json contrib = nlohmann::json::array();
  for (const Contribution &c: e.contributions)
    contrib.push_back({{"rule_id", c.rule_id},
                       {"rule", c.expr},
                       {"source_text", c.source_text},
                       {"value", finite_or_null(c.value)},
                       {"importance", c.importance}});
  nlohmann::json j{{"smiles", e.smiles},
                   {"prediction", e.prediction},
                   {"probability", optional_number(e.probability)},
                   {"contributions", contrib},
                   {"explanation", e.narrative},
                   {"generator", e.generator}};
  if (!e.notice.empty())
    j["notice"] = e.notice;
  return j;
}

// ---- persistence --------------------------------------------------------

nlohmann::json to_json(const PartitionMetrics &m) {
  nlohmann::json j{{"n", m.n}};
  if (m.auc)
    j["auc"] = *m.auc;
  if (m.rmse)
    j["rmse"] = *m.rmse;
  if (m.mae)
    j["mae"] = *m.mae;
  if (!m.note.empty())
    j["note"] = m.note;
  return j;
}

namespace {

PartitionMetrics metrics_from_json(const nlohmann::json &j) {
  PartitionMetrics m;
  m.n = j.at("n").get<std::size_t>();
  if (j.contains("auc"))
    m.auc = j.at("auc").get<double>();
  if (j.contains("rmse"))
    m.rmse = j.at("rmse").get<double>();
  if (j.contains("mae"))
    m.mae = j.at("mae").get<double>();
  m.note = j.value("note", "");
  return m;
}

nlohmann::json to_json(const Provenance &p) {
  return {{"config_hash", p.config_hash},         {"transcript_path", p.transcript_path},
          {"transcript_hash", p.transcript_hash}, {"dataset_path", p.dataset_path},
          {"dataset_checksum", p.dataset_checksum}, {"model_hash", p.model_hash}};
}

stats::RuleVerdict verdict_from_json(const nlohmann::json &j) {
  stats::RuleVerdict v;
  v.rule_id = j.at("rule_id");
  const std::string method = j.at("method");
  v.test.method = method == "mwu" ? stats::Method::kMannWhitney : stats::Method::kSlopeT;
  const auto &stat = j.at("statistic");
  v.test.statistic = stat.is_null() ? std::nan("") : stat.get<double>();
  v.test.p_value = j.at("p_value");
  v.test.n1 = j.at("n1");
  v.test.n2 = j.at("n2");
  v.test.degenerate = j.value("degenerate", false);
  v.test.exact_fit = j.value("exact_fit", false);
  v.test.tie_correction_applied = j.value("tie_correction_applied", false);
  v.significant = j.at("significant");
  if (!j.at("supported").is_null())
    v.literature_supported = j.at("supported").get<bool>();
  v.citation_note = j.value("citation_note", "");
  const std::string cat = j.at("category");
  for (stats::Category c: {stats::Category::kSignificantSupported,
                           stats::Category::kSignificantNotFound, stats::Category::kInsignificant,
                           stats::Category::kSignificantUnannotated})
    if (stats::category_name(c) == cat)
      v.category = c;
  return v;
}

}  // namespace

nlohmann::json metrics_to_json(const TrainedTask &t) {
  nlohmann::json j{{"task_id", t.id},
                   {"kind", learn::task_kind_name(t.kind())},
                   {"rules", t.ruleset.rules.size()}};
  for (const auto &[part, m]: t.metrics)
    j[part] = to_json(m);
  return j;
}

nlohmann::json verdicts_to_json(const std::vector<stats::RuleVerdict> &v) {
  nlohmann::json arr = nlohmann::json::array();
  for (const stats::RuleVerdict &r: v)
    arr.push_back({{"rule_id", r.rule_id},
                   {"method", stats::method_name(r.test.method)},
                   {"statistic", finite_or_null(r.test.statistic)},
                   {"p_value", r.test.p_value},
                   {"n1", r.test.n1},
                   {"n2", r.test.n2},
                   {"degenerate", r.test.degenerate},
                   {"exact_fit", r.test.exact_fit},
                   {"tie_correction_applied", r.test.tie_correction_applied},
                   {"significant", r.significant},
                   {"supported", r.literature_supported ? nlohmann::json(*r.literature_supported)
                                                        : nlohmann::json(nullptr)},
                   {"citation_note", r.citation_note},
                   {"category", stats::category_name(r.category)}});
  return arr;
}

std::string file_sha256(const std::string &path) {
  if (path.empty())
    return {};
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return util::sha256_hex(ss.str());
}

void save_verdicts(const std::vector<stats::RuleVerdict> &v, const std::string &dir) {
  fs::create_directories(dir);
  util::write_text_file((fs::path(dir) / "verdicts.csv").string(), stats::verdicts_to_csv(v));
  write_json(fs::path(dir) / "verdicts.json", verdicts_to_json(v));
}

void save_trained(const TrainedTask &t, const std::string &dir) {
  const fs::path d(dir);
  fs::create_directories(d);
  write_json(d / "config.json", to_json(t.config));
  rules::save_ruleset(t.ruleset, (d / "ruleset.rules").string());
  write_json(d / "split.json", data::to_json(t.split));
  write_json(d / "model.json", learn::to_json(t.model));
  nlohmann::json order = nlohmann::json::array();
  for (std::size_t i = 0; i < t.ruleset.rules.size(); ++i)
    order.push_back({{"rule_id", t.ruleset.rules[i].id}, {"importance", t.importances[i]}});
  write_json(d / "importances.json", order);
  write_json(d / "metrics.json", metrics_to_json(t));
  nlohmann::json prov = to_json(t.provenance);
  prov["task_id"] = t.id;
  write_json(d / "provenance.json", prov);
  if (!t.verdicts.empty())
    save_verdicts(t.verdicts, dir);
}

TrainedTask load_trained(const std::string &dir) {
  const fs::path d(dir);
  TrainedTask t;
  try {
    t.config = config_from_json(read_json(d / "config.json"));
    t.ruleset = rules::load_ruleset((d / "ruleset.rules").string());
    t.split = data::split_from_json(read_json(d / "split.json"));
    t.model = learn::model_from_json(read_json(d / "model.json"));
    for (const auto &e: read_json(d / "importances.json"))
      t.importances.push_back(e.at("importance").get<double>());
    const nlohmann::json m = read_json(d / "metrics.json");
    t.id = m.at("task_id");
    for (const char *part: {"train", "valid", "test"})
      if (m.contains(part))
        t.metrics[part] = metrics_from_json(m.at(part));
    const nlohmann::json p = read_json(d / "provenance.json");
    t.provenance = {p.value("config_hash", ""),      p.value("transcript_path", ""),
                    p.value("transcript_hash", ""),  p.value("dataset_path", ""),
                    p.value("dataset_checksum", ""), p.value("model_hash", "")};
    if (fs::exists(d / "verdicts.json"))
      for (const auto &v: read_json(d / "verdicts.json"))
        t.verdicts.push_back(verdict_from_json(v));
  } catch (const nlohmann::json::exception &e) {
    data_error(dir + ": " + e.what());
  } catch (const rules::RuleError &e) {
    data_error(dir + ": " + e.what());
  } catch (const learn::LearnError &e) {
    data_error(dir + ": " + e.what());
  } catch (const data::DataError &e) {
    data_error(dir + ": " + e.what());
  } catch (const std::runtime_error &e) {
    if (dynamic_cast<const PipelineError *>(&e))
      throw;
    data_error(dir + ": " + e.what());
  }
  const std::size_t r = t.ruleset.active().size();
  if (r != t.ruleset.rules.size())
    data_error(dir + ": persisted ruleset contains untranscribed rules");
  if (t.importances.size() != r)
    data_error(dir + ": " + std::to_string(t.importances.size()) + " importances for " + std::to_string(r)
               + " rules");
  if (learn::feature_count(t.model) != r)
    data_error(dir + ": model expects " + std::to_string(learn::feature_count(t.model))
               + " features but the ruleset has " + std::to_string(r) + " rules");
  if (!t.metrics.count("valid") || !t.metrics.count("test"))
    data_error(dir + ": metrics for valid and test are missing");
  return t;
}

// ---- ablation -----------------------------------------------------------

namespace {

const char *headline_metric(learn::TaskKind kind) {
  return kind == learn::TaskKind::kClassification ? "auc" : "rmse";
}

nlohmann::json headline(const PartitionMetrics &m, learn::TaskKind kind) {
  return kind == learn::TaskKind::kClassification ? optional_number(m.auc) : optional_number(m.rmse);
}

}  // namespace

nlohmann::json run_ablation(const RunConfig &c, oracle::Backend &backend) {
  const TaskData data = load_task_data(c);
  const rules::RuleSet syn = run_synthesis(c, backend);
  const rules::RuleSet inf = run_inference(c, data, backend);
  const learn::TaskKind kind = data.task.kind;

  nlohmann::json variants = nlohmann::json::array();
  const std::vector<std::pair<std::string, std::vector<rules::RuleSet>>> plan = {
      {"synthesis", {syn}}, {"inference", {inf}}, {"combined", {syn, inf}}};
  for (const auto &[name, sets]: plan) {
    const std::string id = c.task + "-" + name;
    const TrainedTask t = run_train(c, data, combine_rulesets(sets, c.task), id);
    save_trained(t, (fs::path(c.output_dir) / id).string());
    variants.push_back({{"variant", name},
                        {"task_id", id},
                        {"rules", t.ruleset.rules.size()},
                        {"train", to_json(t.metrics.at("train"))},
                        {"valid", to_json(t.metrics.at("valid"))},
                        {"test", to_json(t.metrics.at("test"))},
                        {"model_hash", t.provenance.model_hash}});
  }

  // ECFP4 bits with the same forest settings.
  const auto bits = [&](const std::vector<std::size_t> &rows) {
    constexpr std::size_t kBits = 2048;
    std::vector<double> v(rows.size() * kBits, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const desc::BitVector fp = desc::ecfp4(*data.dataset.at(rows[i]).mol, kBits);
      for (std::size_t b = 0; b < kBits; ++b)
        v[i * kBits + b] = fp.test(b) ? 1.0 : 0.0;
    }
    return learn::Matrix(rows.size(), kBits, std::move(v));
  };
  nlohmann::json baseline;
  try {
    const learn::Forest f = learn::train_forest(bits(data.split.train),
                                                labels(data.dataset, data.split.train), kind,
                                                c.forest, c.seed);
    baseline = {{"features", "ecfp4-2048"}};
    for (const auto &[part, rows]: {std::pair{"train", &data.split.train},
                                    std::pair{"valid", &data.split.valid},
                                    std::pair{"test", &data.split.test}}) {
      const learn::Matrix x = bits(*rows);
      std::vector<double> pred(x.rows);
      for (std::size_t i = 0; i < x.rows; ++i)
        pred[i] = learn::predict(f, x.row(i));
      baseline[part] = to_json(score(kind, pred, labels(data.dataset, *rows)));
    }
  } catch (const learn::LearnError &e) {
    data_error(std::string("baseline: ") + e.what());
  }

  nlohmann::json out{{"task", c.task},
                     {"metric", headline_metric(kind)},
                     {"variants", variants},
                     {"baseline", baseline}};
  nlohmann::json table = nlohmann::json::object();
  for (const auto &v: variants)
    table[v.at("variant").get<std::string>()] = v.at("test").value(headline_metric(kind), nlohmann::json());
  table["ecfp4_baseline"] = baseline.at("test").value(headline_metric(kind), nlohmann::json());
  out["test_" + std::string(headline_metric(kind))] = table;
  return out;
}

nlohmann::json summarize_tasks(const std::vector<TrainedTask> &tasks) {
  if (tasks.empty())
    throw PipelineError(kExitUsage, "no tasks to summarize");
  const learn::TaskKind kind = tasks.front().kind();
  nlohmann::json rows = nlohmann::json::array();
  double sum = 0;
  std::size_t n = 0;
  for (const TrainedTask &t: tasks) {
    if (t.kind() != kind)
      throw PipelineError(kExitUsage, "cannot average classification and regression tasks");
    const nlohmann::json v = headline(t.metrics.at("test"), kind);
    rows.push_back({{"task_id", t.id}, {"test", v}});
    if (!v.is_null()) {
      sum += v.get<double>();
      ++n;
    }
  }
  return {{"metric", headline_metric(kind)},
          {"tasks", rows},
          {"unweighted_mean", n ? nlohmann::json(sum / static_cast<double>(n)) : nlohmann::json()},
          {"mean_over", n},
          {"aggregation", "unweighted mean of per-task test metrics; tasks without a defined metric are skipped"}};
}

}  // namespace llm4sd::pipeline
