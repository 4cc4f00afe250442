//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Tolerances and pinned values are constants below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "llm4sd/datasets/dataset.hpp"
#include "llm4sd/descriptors/descriptors.hpp"
#include "llm4sd/learners/forest.hpp"
#include "llm4sd/learners/linear.hpp"
#include "llm4sd/learners/model.hpp"
#include "llm4sd/molgraph/element.hpp"
#include "llm4sd/molgraph/molecule.hpp"
#include "llm4sd/molgraph/smiles.hpp"
#include "llm4sd/oracle/prompts.hpp"
#include "llm4sd/oracle/task.hpp"
#include "llm4sd/pipeline/config.hpp"
#include "llm4sd/pipeline/pipeline.hpp"
#include "llm4sd/rulekit/rule.hpp"
#include "llm4sd/stats/stats.hpp"
#include "llm4sd/util/csv.hpp"

namespace fs = std::filesystem;
using namespace llm4sd;
using Clock = std::chrono::steady_clock;

namespace {

// ---- pinned tolerances --------------------------------------------------

constexpr double kParseRate = 0.99;
constexpr std::size_t kMinCorpus = 500;
constexpr double kParseSeconds = 5.0;
constexpr double kDescriptorTol = 1e-2;
constexpr int kAucSets = 1000;
constexpr double kAucTol = 1e-9;
constexpr std::size_t kExactMaxN = 8;
constexpr double kSlopeTol = 1e-9;
constexpr double kSpecialTol = 1e-10;
constexpr double kImportanceTol = 1e-9;
constexpr double kGradientTol = 1e-6;
constexpr double kEndToEndSeconds = 60.0;
// Test AUC of the replay run, measured once and pinned; later runs must stay
// within kAucDrift of it (and above chance).
constexpr double kPinnedTestAuc = 0.9602272727272727;
constexpr double kAucDrift = 0.02;
constexpr double kAlpha = 0.05;
// Verdict categories of the replay run with the committed annotations.
const std::map<std::string, std::size_t> kPinnedCategories = {
    {"insignificant", 3},
    {"significant_not_found", 2},
    {"significant_supported", 6},
    {"significant_unannotated", 13},
};

std::string fixture(const std::string &name) { return std::string(LLM4SD_FIXTURE_DIR) + "/" + name; }

std::string read(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char *name, const std::function<Outcome()> &check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass)
    ++failures;
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char *spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// ---- criteria -----------------------------------------------------------

Outcome parser_corpus() {
  const auto start = Clock::now();
  data::Schema bbbp{"smiles", {"p_np"}, learn::TaskKind::kClassification};
  data::Schema esol{"smiles", {"measured log solubility in mols per litre"}, learn::TaskKind::kRegression};
  const data::Dataset a = data::load_csv(fixture("bbbp_fixture.csv"), bbbp, "bbbp");
  const data::Dataset b = data::load_csv(fixture("esol_fixture.csv"), esol, "esol");
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const std::size_t total = a.report.rows_total + b.report.rows_total;
  const std::size_t parsed = a.report.parsed + b.report.parsed;
  bool positions = true;
  for (const auto *r: {&a.report, &b.report})
    for (const auto &[row, f]: r->failures)
      positions = positions && f.position.has_value();
  const double rate = static_cast<double>(parsed) / static_cast<double>(total);
  return {total >= kMinCorpus && rate >= kParseRate && positions && secs < kParseSeconds,
          std::to_string(parsed) + "/" + std::to_string(total) + " parsed (" + fmt("%.2f", 100 * rate)
              + "%), every failure has a position: " + (positions ? "yes" : "no") + ", "
              + fmt("%.3f", secs) + " s"};
}

Outcome descriptor_oracle() {
  const util::CsvTable t = util::parse_csv(read(fixture("descriptor_oracle.csv")));
  const std::vector<std::string> names = {"mw", "hbd", "hba", "ring_count", "rotatable_bonds", "tpsa", "clogp"};
  const auto &elements = mol::ElementTable::instance();
  const double h_mass = elements.find(1)->mass;
  double worst = 0, worst_mass = 0;
  for (const auto &row: t.rows) {
    const mol::Molecule m = mol::parse_smiles(row[0]);
    for (std::size_t i = 0; i < names.size(); ++i)
      worst = std::max(worst, std::abs(desc::compute(m, names[i]) - std::stod(row[i + 1])));
    double sum = 0;
    for (std::size_t i = 0; i < m.num_atoms(); ++i) {
      const mol::Atom &a = m.atoms()[i];
      // Bracket atoms carry their hydrogen count explicitly.
      const int h = m.implicit_h(static_cast<int>(i)) + a.explicit_h.value_or(0);
      sum += elements.find(a.atomic_number)->mass + h * h_mass;
    }
    worst_mass = std::max(worst_mass, std::abs(desc::compute(m, "mw") - sum));
  }
  return {t.rows.size() == 50 && worst <= kDescriptorTol && worst_mass <= kDescriptorTol,
          std::to_string(t.rows.size()) + " molecules, max |diff| " + fmt("%.2e", worst)
              + ", mw vs mass-table sum " + fmt("%.2e", worst_mass)};
}

Outcome auc_identity() {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> len(2, 80), coin(0, 1), grid(0, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  int sets = 0;
  while (sets < kAucSets) {
    const std::size_t n = static_cast<std::size_t>(len(rng));
    const bool coarse = coin(rng) == 1;
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coarse ? grid(rng) : u(rng);
      l[i] = coin(rng);
    }
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < n; ++i)
      (l[i] ? pos : neg).push_back(s[i]);
    if (pos.empty() || neg.empty())
      continue;
    const double mwu = stats::mann_whitney_u(pos, neg).statistic / static_cast<double>(pos.size() * neg.size());
    worst = std::max(worst, std::abs(stats::auc_roc(s, l) - mwu));
    ++sets;
  }
  return {worst < kAucTol, std::to_string(sets) + " sets, max |AUC - U/(n1 n2)| " + fmt("%.2e", worst)};
}

Outcome stats_oracle() {
  const nlohmann::json j = nlohmann::json::parse(read(fixture("stats_oracle.json")));
  // U against pair counting on every sample pair with sizes up to 8.
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> val(0, 4);
  std::size_t enumerated = 0;
  bool u_ok = true;
  for (std::size_t n1 = 1; n1 <= kExactMaxN; ++n1)
    for (std::size_t n2 = 1; n2 <= kExactMaxN; ++n2)
      for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> a(n1), b(n2);
        for (double &v: a)
          v = val(rng);
        for (double &v: b)
          v = val(rng);
        double exact = 0;
        for (double x: a)
          for (double y: b)
            exact += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
        u_ok = u_ok && stats::mann_whitney_u(a, b).statistic == exact;
        ++enumerated;
      }
  int slopes = 0;
  double slope_err = 0;
  for (const auto &c: j["slope_t"]) {
    if (c["name"] == "y_independent_of_x")
      continue;
    const auto r = stats::slope_t_test(c["x"].get<std::vector<double>>(), c["y"].get<std::vector<double>>());
    slope_err = std::max({slope_err, std::abs(r.statistic - c["t"].get<double>()),
                          std::abs(r.p_value - c["p"].get<double>())});
    ++slopes;
  }
  double special = 0;
  std::size_t points = 0;
  const auto track = [&](double got, const nlohmann::json &r) {
    special = std::max(special, std::abs(got - r["value"].get<double>()));
    ++points;
  };
  for (const auto &r: j["incomplete_beta"])
    track(stats::incomplete_beta(r["a"].get<double>(), r["b"].get<double>(), r["x"].get<double>()), r);
  for (const auto &r: j["student_t_sf"])
    track(stats::student_t_sf(r["t"].get<double>(), r["dof"].get<double>()), r);
  for (const auto &r: j["normal_sf"])
    track(stats::normal_sf(r["z"].get<double>()), r);
  return {u_ok && slopes == 3 && slope_err <= kSlopeTol && special <= kSpecialTol,
          std::to_string(enumerated) + " U enumerations " + (u_ok ? "exact" : "MISMATCH") + "; "
              + std::to_string(slopes) + " slope fixtures max err " + fmt("%.2e", slope_err) + "; "
              + std::to_string(points) + " special-function points max err " + fmt("%.2e", special)};
}

Outcome learner_properties() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 1);
  const std::size_t n = 200;
  std::vector<double> v, y;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = g(rng), b = g(rng), c = g(rng);
    v.insert(v.end(), {a, b, c});
    y.push_back(a - 0.7 * b + 0.3 * g(rng) > 0 ? 1.0 : 0.0);
  }
  const learn::Matrix x(n, 3, v);
  learn::ForestParams p;
  p.n_trees = 50;
  const std::string h1 = learn::model_hash(learn::train_forest(x, y, learn::TaskKind::kClassification, p, 17));
  p.threads = 1;
  const std::string h2 = learn::model_hash(learn::train_forest(x, y, learn::TaskKind::kClassification, p, 17));
  const bool deterministic = h1 == h2;

  learn::ForestParams single;
  single.n_trees = 1;
  single.bootstrap = false;
  single.max_features = 3;
  const learn::Forest tree = learn::train_forest(x, y, learn::TaskKind::kClassification, single, 1);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < n; ++i)
    exact += learn::predict(tree, x.row(i)) == y[i];

  const auto imp = learn::importances(learn::train_forest(x, y, learn::TaskKind::kClassification, p, 3));
  double sum = 0;
  for (double w: imp)
    sum += w;

  double worst = 0;
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (double l2: {0.0, 1.0})
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> theta(4);
      for (double &t: theta)
        t = u(rng);
      const auto grad = learn::logistic_gradient(x, y, theta, l2);
      for (std::size_t k = 0; k < theta.size(); ++k) {
        const double h = 1e-5 * std::max(1.0, std::abs(theta[k]));
        auto plus = theta, minus = theta;
        plus[k] += h;
        minus[k] -= h;
        const double fd = (learn::logistic_loss(x, y, plus, l2) - learn::logistic_loss(x, y, minus, l2)) / (2 * h);
        worst = std::max(worst, std::abs(fd - grad[k]) / std::max(1.0, std::abs(grad[k])));
      }
    }
  return {deterministic && exact == n && std::abs(sum - 1.0) <= kImportanceTol && worst <= kGradientTol,
          std::string("hash rerun ") + (deterministic ? "identical" : "DIFFERS") + "; single tree fits "
              + std::to_string(exact) + "/" + std::to_string(n) + "; importance sum - 1 = "
              + fmt("%.1e", sum - 1.0) + "; gradient rel err " + fmt("%.1e", worst)};
}

Outcome scaffold_split() {
  const data::Schema s{"smiles", {"p_np"}, learn::TaskKind::kClassification};
  const data::Dataset ds = data::load_csv(fixture("bbbp_fixture.csv"), s, "bbbp");
  const data::Split sp = data::scaffold_split(ds);
  const std::vector<std::size_t> usable = ds.usable_rows();
  std::map<std::size_t, int> where;
  bool disjoint = true;
  int part = 0;
  for (const auto *rows: {&sp.train, &sp.valid, &sp.test}) {
    for (std::size_t r: *rows)
      disjoint = where.emplace(r, part).second && disjoint;
    ++part;
  }
  bool exhaustive = where.size() == usable.size();
  for (std::size_t r: usable)
    exhaustive = exhaustive && where.count(r);
  std::map<std::string, std::set<int>> key_parts;
  std::map<std::string, std::size_t> group_size;
  for (const auto &[r, p]: where) {
    const std::string k = data::scaffold_key(*ds.at(r).mol);
    key_parts[k].insert(p);
    ++group_size[k];
  }
  bool pure = true;
  std::size_t largest = 0;
  for (const auto &[k, ps]: key_parts) {
    pure = pure && ps.size() == 1;
    largest = std::max(largest, group_size[k]);
  }
  const double nn = static_cast<double>(usable.size());
  const auto off = [&](std::size_t got, double frac) {
    return std::abs(static_cast<double>(got) - frac * nn);
  };
  const bool sized = off(sp.train.size(), 0.8) <= static_cast<double>(largest)
                     && off(sp.valid.size(), 0.1) <= static_cast<double>(largest)
                     && off(sp.test.size(), 0.1) <= static_cast<double>(largest);
  const bool identical = data::to_json(data::scaffold_split(ds)).dump() == data::to_json(sp).dump();
  return {disjoint && exhaustive && pure && sized && identical,
          std::to_string(sp.train.size()) + "/" + std::to_string(sp.valid.size()) + "/"
              + std::to_string(sp.test.size()) + " of " + std::to_string(usable.size())
              + " (largest scaffold group " + std::to_string(largest) + "); disjoint "
              + (disjoint ? "yes" : "no") + ", exhaustive " + (exhaustive ? "yes" : "no")
              + ", no scaffold spans partitions " + (pure ? "yes" : "no") + ", rerun byte-identical "
              + (identical ? "yes" : "no")};
}

pipeline::RunConfig replay_config(const std::string &out) {
  pipeline::RunConfig c = pipeline::load_config(fixture("replay/bbbp_config.json"));
  c.dataset_path = fixture("bbbp_fixture.csv");
  c.transcript_path = fixture("replay/bbbp_transcript.jsonl");
  c.output_dir = out;
  return c;
}

struct EndToEnd {
  std::string syn_file, inf_file, model_hash, metrics, explanation;
  double test_auc = 0;
  double seconds = 0;
  pipeline::TrainedTask trained;
  pipeline::TaskData data;
};

// synth + infer + train, as the CLI runs them, writing into `out`.
EndToEnd run_end_to_end(const std::string &out) {
  EndToEnd e;
  const auto start = Clock::now();
  const pipeline::RunConfig c = replay_config(out);
  const auto backend = pipeline::make_backend(c);
  const fs::path dir = fs::path(out) / c.task;
  fs::create_directories(dir);
  const rules::RuleSet syn = pipeline::run_synthesis(c, *backend);
  rules::save_ruleset(syn, (dir / "synthesis.rules").string());
  e.data = pipeline::load_task_data(c);
  const rules::RuleSet inf = pipeline::run_inference(c, e.data, *backend);
  rules::save_ruleset(inf, (dir / "inference.rules").string());
  const rules::RuleSet combined = pipeline::combine_rulesets(
      {rules::load_ruleset((dir / "synthesis.rules").string()),
       rules::load_ruleset((dir / "inference.rules").string())},
      c.task);
  e.trained = pipeline::run_train(c, e.data, combined);
  pipeline::save_trained(e.trained, dir.string());
  e.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  e.syn_file = read((dir / "synthesis.rules").string());
  e.inf_file = read((dir / "inference.rules").string());
  e.model_hash = read((dir / "model.json").string());
  e.metrics = read((dir / "metrics.json").string());
  e.explanation = pipeline::to_json(pipeline::explain(e.trained, mol::parse_smiles("CCO"), "CCO", 3)).dump();
  e.test_auc = e.trained.metrics.at("test").auc.value_or(0.0);
  return e;
}

fs::path scratch_root() {
  return fs::temp_directory_path() / ("llm4sd_acceptance_" + std::to_string(::getpid()));
}

const EndToEnd &first_run() {
  static const EndToEnd e = run_end_to_end((scratch_root() / "a").string());
  return e;
}

Outcome end_to_end() {
  const EndToEnd &a = first_run();
  const EndToEnd b = run_end_to_end((scratch_root() / "b").string());
  const bool same = a.syn_file == b.syn_file && a.inf_file == b.inf_file && a.model_hash == b.model_hash
                    && a.metrics == b.metrics && a.explanation == b.explanation;
  const bool auc_ok = a.test_auc > 0.5 && std::abs(a.test_auc - kPinnedTestAuc) <= kAucDrift;
  return {a.seconds < kEndToEndSeconds && same && auc_ok,
          fmt("%.2f", a.seconds) + " s; rerun outputs " + (same ? "identical" : "DIFFER") + "; test AUC "
              + fmt("%.4f", a.test_auc) + " (pinned " + fmt("%.4f", kPinnedTestAuc) + " +/- "
              + fmt("%.2f", kAucDrift) + ", margin over chance " + fmt("%.4f", a.test_auc - 0.5) + ")"};
}

Outcome rule_validation() {
  const EndToEnd &e = first_run();
  const auto notes = stats::parse_annotations(read(fixture("replay/bbbp_annotations.csv")));
  const auto v1 = pipeline::run_validate_rules(e.trained, e.data, notes);
  const auto v2 = pipeline::run_validate_rules(e.trained, e.data, notes);
  std::string detail;
  bool ok = true;
  for (const char *dsl: {"desc(mw)", "count(C=O)"}) {
    std::optional<double> p;
    for (std::size_t i = 0; i < e.trained.ruleset.rules.size(); ++i)
      if (rules::to_string(*e.trained.ruleset.rules[i].expr) == dsl)
        p = v1[i].test.p_value;
    ok = ok && p && *p < kAlpha;
    detail += std::string(dsl) + " p=" + (p ? fmt("%.3g", *p) : std::string("missing")) + "; ";
  }
  const auto c1 = pipeline::category_counts(v1);
  const bool stable = c1 == pipeline::category_counts(v2);
  const bool pinned = c1 == kPinnedCategories;
  for (const auto &[k, n]: c1)
    detail += k + "=" + std::to_string(n) + " ";
  detail += std::string("; rerun ") + (stable ? "stable" : "UNSTABLE") + ", pinned counts "
            + (pinned ? "match" : "DIFFER");
  return {ok && stable && pinned, detail};
}

Outcome prompt_goldens() {
  struct Case {
    const char *file;
    std::function<oracle::Prompt()> render;
  };
  const std::vector<oracle::LabeledInstance> batch = {{"CCO", 1}, {"OC(=O)c1ccccc1", 0}};
  const auto task = [](const char *id) { return *oracle::find_task(id); };
  const std::vector<Case> cases = {
      {"bbbp_synthesis_30.txt", [&] { return oracle::build_synthesis_prompt(task("bbbp"), 30); }},
      {"bbbp_synthesis_20.txt", [&] { return oracle::build_synthesis_prompt(task("bbbp"), 20); }},
      {"qm9-mu_synthesis_30.txt", [&] { return oracle::build_synthesis_prompt(task("qm9-mu"), 30); }},
      {"esol_synthesis_30.txt", [&] { return oracle::build_synthesis_prompt(task("esol"), 30); }},
      {"tox21-nr-ar_synthesis_30.txt", [&] { return oracle::build_synthesis_prompt(task("tox21-nr-ar"), 30); }},
      {"bbbp_inference.txt", [&] { return oracle::build_inference_prompt(task("bbbp"), batch); }},
      {"esol_inference.txt", [&] { return oracle::build_inference_prompt(task("esol"), batch); }},
      {"tox21-nr-ar_inference.txt", [&] { return oracle::build_inference_prompt(task("tox21-nr-ar"), batch); }},
      {"qm9-mu_inference.txt", [&] { return oracle::build_inference_prompt(task("qm9-mu"), batch); }},
  };
  int matched = 0;
  std::string bad;
  for (const Case &c: cases) {
    if (c.render().text == read(fixture(std::string("prompts/") + c.file)))
      ++matched;
    else
      bad += std::string(" ") + c.file;
  }
  const std::string clause = "(without access to 3D information)";
  const bool qm9_only = oracle::build_synthesis_prompt(task("qm9-mu")).text.find(clause) != std::string::npos
                        && oracle::build_synthesis_prompt(task("bbbp")).text.find(clause) == std::string::npos
                        && oracle::build_inference_prompt(task("qm9-mu"), batch).text.find(clause) != std::string::npos;
  return {matched == static_cast<int>(cases.size()) && qm9_only,
          std::to_string(matched) + "/" + std::to_string(cases.size()) + " goldens byte-identical"
              + (bad.empty() ? "" : " (mismatch:" + bad + ")") + "; 3D clause only for QM9: "
              + (qm9_only ? "yes" : "no")};
}

}  // namespace

int main() {
  report("parser-corpus", parser_corpus);
  report("descriptor-oracle", descriptor_oracle);
  report("auc-mwu-identity", auc_identity);
  report("stats-oracle", stats_oracle);
  report("learner-properties", learner_properties);
  report("scaffold-split", scaffold_split);
  report("end-to-end-replay", end_to_end);
  report("rule-validation", rule_validation);
  report("prompt-goldens", prompt_goldens);
  std::error_code ec;
  fs::remove_all(scratch_root(), ec);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
