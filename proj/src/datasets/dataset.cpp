//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/datasets/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "llm4sd/data_files.hpp"
#include "llm4sd/learners/rng.hpp"
#include "llm4sd/molgraph/canonical.hpp"
#include "llm4sd/molgraph/scaffold.hpp"
#include "llm4sd/molgraph/smiles.hpp"
#include "llm4sd/util/csv.hpp"
#include "llm4sd/util/hash.hpp"

namespace llm4sd::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
    s.remove_suffix(1);
  return s;
}

std::optional<double> parse_label(std::string_view cell, TaskKind kind, std::size_t line,
                                  const std::string &column) {
  cell = trim(cell);
  if (cell.empty())
    return std::nullopt;
  double v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
    throw DataError("line " + std::to_string(line) + ": label '" + std::string(cell)
                    + "' in column '" + column + "' is not a number");
  if (kind == TaskKind::kClassification && v != 0.0 && v != 1.0)
    throw DataError("line " + std::to_string(line) + ": classification label '"
                    + std::string(cell) + "' in column '" + column + "' is not 0 or 1");
  return v;
}

}  // namespace

nlohmann::json to_json(const IngestionReport &r) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto &[row, f]: r.failures) {
    nlohmann::json e{{"row_id", row}, {"kind", f.kind}, {"message", f.message}};
    e["position"] = f.position ? nlohmann::json(*f.position) : nlohmann::json(nullptr);
    failures.push_back(std::move(e));
  }
  return {
      {"rows_total", r.rows_total},
      {"parsed", r.parsed},
      {"failed", r.failed},
      {"absent_labels", r.absent_labels},
      {"failures", failures},
      {"expected_rows", r.expected_rows ? nlohmann::json(*r.expected_rows) : nlohmann::json(nullptr)},
      {"warnings", r.warnings},
  };
}

std::vector<std::size_t> Dataset::usable_rows() const {
  std::vector<std::size_t> out;
  for (const Record &r: records) {
    if (!r.parsed())
      continue;
    if (std::all_of(r.labels.begin(), r.labels.end(), [](const auto &l) { return l.has_value(); }))
      out.push_back(r.row_id);
  }
  return out;
}

const Record &Dataset::at(std::size_t row_id) const {
  const auto it = std::lower_bound(records.begin(), records.end(), row_id,
                                   [](const Record &r, std::size_t id) { return r.row_id < id; });
  if (it == records.end() || it->row_id != row_id)
    throw DataError("dataset '" + name + "' has no row " + std::to_string(row_id));
  return *it;
}

double Dataset::label(std::size_t row_id, std::size_t index) const {
  const Record &r = at(row_id);
  if (index >= r.labels.size() || !r.labels[index])
    throw DataError("row " + std::to_string(row_id) + " has no label "
                    + std::to_string(index));
  return *r.labels[index];
}

Dataset parse_dataset(std::string_view csv_text, const Schema &schema, std::string name,
                      std::string source_path) {
  if (schema.label_columns.empty())
    throw DataError("schema names no label column");
  util::CsvTable table;
  try {
    table = util::parse_csv(csv_text);
  } catch (const util::CsvError &e) {
    throw DataError(e.what());
  }
  const int smiles_col = table.column(schema.smiles_column);
  if (smiles_col < 0)
    throw DataError("missing SMILES column '" + schema.smiles_column + "'");
  std::vector<std::size_t> label_cols;
  for (const std::string &c: schema.label_columns) {
    const int k = table.column(c);
    if (k < 0)
      throw DataError("missing label column '" + c + "'");
    label_cols.push_back(static_cast<std::size_t>(k));
  }
  if (table.rows.empty())
    throw DataError("dataset has zero rows");

  Dataset ds;
  ds.name = std::move(name);
  ds.kind = schema.kind;
  ds.label_names = schema.label_columns;
  ds.source_path = std::move(source_path);
  ds.checksum = util::sha256_hex(csv_text);
  IngestionReport &rep = ds.report;
  rep.absent_labels.assign(label_cols.size(), 0);
  ds.records.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto &row = table.rows[i];
    Record rec;
    rec.row_id = i;
    rec.smiles = std::string(trim(row[static_cast<std::size_t>(smiles_col)]));
    for (std::size_t k = 0; k < label_cols.size(); ++k) {
      rec.labels.push_back(
          parse_label(row[label_cols[k]], schema.kind, table.lines[i], schema.label_columns[k]));
      if (!rec.labels.back())
        ++rep.absent_labels[k];
    }
    try {
      rec.mol = std::make_shared<const mol::Molecule>(mol::parse_smiles(rec.smiles));
      ++rep.parsed;
    } catch (const mol::ParseError &e) {
      rec.failure = ParseFailure{std::string(mol::error_kind_name(e.kind())), e.what(),
                                 e.position()};
      rep.failures.emplace_back(i, *rec.failure);
      ++rep.failed;
    }
    ds.records.push_back(std::move(rec));
  }
  rep.rows_total = ds.records.size();
  if (rep.parsed == 0)
    throw DataError("dataset has zero parseable rows");
  if (const auto m = find_manifest(ds.name)) {
    rep.expected_rows = m->expected_rows;
    if (m->expected_rows != rep.rows_total)
      rep.warnings.push_back("dataset '" + ds.name + "' has " + std::to_string(rep.rows_total)
                             + " rows; the published count is "
                             + std::to_string(m->expected_rows));
  }
  return ds;
}

Dataset load_csv(const std::string &path, const Schema &schema, std::string name) {
  std::string text;
  try {
    text = util::read_text_file(path);
  } catch (const std::runtime_error &e) {
    throw DataError(e.what());
  }
  return parse_dataset(text, schema, std::move(name), path);
}

Dataset select_label(const Dataset &ds, std::string_view label) {
  const auto it = std::find(ds.label_names.begin(), ds.label_names.end(), label);
  if (it == ds.label_names.end())
    throw DataError("dataset '" + ds.name + "' has no label '" + std::string(label) + "'");
  const std::size_t k = static_cast<std::size_t>(it - ds.label_names.begin());
  Dataset out;
  out.name = ds.name;
  out.kind = ds.kind;
  out.label_names = {std::string(label)};
  out.source_path = ds.source_path;
  out.checksum = ds.checksum;
  out.report = ds.report;
  out.report.absent_labels = {ds.report.absent_labels[k]};
  for (const Record &r: ds.records) {
    if (!r.labels[k])
      continue;
    Record c = r;
    c.labels = {r.labels[k]};
    out.records.push_back(std::move(c));
  }
  return out;
}

const std::vector<ManifestEntry> &manifest() {
  static const std::vector<ManifestEntry> entries = [] {
    std::vector<ManifestEntry> out;
    std::istringstream in{std::string(data_files::dataset_manifest())};
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#')
        continue;
      if (header) {
        header = false;
        continue;
      }
      std::istringstream fields(line);
      ManifestEntry e;
      std::string count;
      std::getline(fields, e.dataset, '\t');
      std::getline(fields, count, '\t');
      std::getline(fields, e.smiles_column, '\t');
      std::getline(fields, e.default_file, '\t');
      e.expected_rows = std::stoul(count);
      out.push_back(std::move(e));
    }
    return out;
  }();
  return entries;
}

std::optional<ManifestEntry> find_manifest(std::string_view dataset) {
  for (const ManifestEntry &e: manifest())
    if (e.dataset == dataset)
      return e;
  return std::nullopt;
}

// ---- splits -------------------------------------------------------------

std::string_view split_method_name(SplitMethod m) {
  return m == SplitMethod::kScaffold ? "scaffold" : "random";
}

SplitMethod split_method_from_name(std::string_view name) {
  if (name == "scaffold")
    return SplitMethod::kScaffold;
  if (name == "random")
    return SplitMethod::kRandom;
  throw DataError("unknown split method '" + std::string(name) + "'");
}

namespace {

struct Targets {
  std::size_t train;
  std::size_t valid;
};

Targets targets(const Fractions &f, std::size_t n) {
  if (f.train < 0 || f.valid < 0 || f.test < 0)
    throw DataError("split fractions must be non-negative");
  if (std::abs(f.train + f.valid + f.test - 1.0) > 1e-9)
    throw DataError("split fractions must sum to 1");
  if (n < 10)
    throw DataError("split needs at least 10 usable rows, got " + std::to_string(n));
  const auto tr = static_cast<std::size_t>(std::llround(f.train * static_cast<double>(n)));
  const auto va = static_cast<std::size_t>(std::llround(f.valid * static_cast<double>(n)));
  return {std::min(tr, n), std::min(va, n - std::min(tr, n))};
}

}  // namespace

std::string scaffold_key(const mol::Molecule &m) {
  const mol::Molecule s = mol::murcko_scaffold(m);
  return s.num_atoms() == 0 ? std::string() : mol::canonical_key(s);
}

Split scaffold_split(const Dataset &ds, const Fractions &f) {
  const std::vector<std::size_t> rows = ds.usable_rows();
  const Targets t = targets(f, rows.size());
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t id: rows)
    groups[scaffold_key(*ds.at(id).mol)].push_back(id);
  std::vector<const std::pair<const std::string, std::vector<std::size_t>> *> order;
  for (const auto &g: groups)
    order.push_back(&g);
  std::stable_sort(order.begin(), order.end(), [](const auto *a, const auto *b) {
    return a->second.size() > b->second.size();
  });
  Split s;
  s.method = SplitMethod::kScaffold;
  s.fractions = f;
  for (const auto *g: order) {
    auto &dest = s.train.size() < t.train ? s.train : s.valid.size() < t.valid ? s.valid : s.test;
    dest.insert(dest.end(), g->second.begin(), g->second.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.valid.begin(), s.valid.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Split random_split(const Dataset &ds, const Fractions &f, std::uint64_t seed) {
  std::vector<std::size_t> rows = ds.usable_rows();
  const Targets t = targets(f, rows.size());
  learn::CounterRng rng(seed, 0);
  learn::shuffle(rows.begin(), rows.end(), rng);
  Split s;
  s.method = SplitMethod::kRandom;
  s.fractions = f;
  s.seed = seed;
  const auto a = rows.begin() + static_cast<std::ptrdiff_t>(t.train);
  const auto b = a + static_cast<std::ptrdiff_t>(t.valid);
  s.train.assign(rows.begin(), a);
  s.valid.assign(a, b);
  s.test.assign(b, rows.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.valid.begin(), s.valid.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

nlohmann::json to_json(const Split &s) {
  return {
      {"method", split_method_name(s.method)},
      {"fractions", {s.fractions.train, s.fractions.valid, s.fractions.test}},
      {"seed", s.seed ? nlohmann::json(*s.seed) : nlohmann::json(nullptr)},
      {"train", s.train},
      {"valid", s.valid},
      {"test", s.test},
  };
}

Split split_from_json(const nlohmann::json &j) {
  try {
    Split s;
    s.method = split_method_from_name(j.at("method").get<std::string>());
    const auto fr = j.at("fractions").get<std::vector<double>>();
    if (fr.size() != 3)
      throw DataError("split json: fractions must have 3 entries");
    s.fractions = {fr[0], fr[1], fr[2]};
    if (!j.at("seed").is_null())
      s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::size_t>>();
    s.valid = j.at("valid").get<std::vector<std::size_t>>();
    s.test = j.at("test").get<std::vector<std::size_t>>();
    return s;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("split json: ") + e.what());
  }
}

std::vector<std::vector<std::size_t>> sample_batches(const Dataset &ds,
                                                     const std::vector<std::size_t> &partition,
                                                     std::size_t batch_size,
                                                     std::size_t n_batches, std::uint64_t seed) {
  if (partition.empty())
    throw DataError("cannot sample batches from an empty partition");
  if (batch_size == 0)
    throw DataError("batch size must be positive");
  if (batch_size > partition.size())
    throw DataError("batch size " + std::to_string(batch_size) + " exceeds partition size "
                    + std::to_string(partition.size()));
  std::vector<std::size_t> pos, neg;
  if (ds.kind == TaskKind::kClassification)
    for (std::size_t id: partition)
      (ds.label(id) == 1.0 ? pos : neg).push_back(id);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t b = 0; b < n_batches; ++b) {
    learn::CounterRng rng(seed, b);
    std::vector<std::size_t> batch;
    if (ds.kind == TaskKind::kClassification) {
      std::size_t want_pos = batch_size / 2;
      std::size_t want_neg = batch_size - want_pos;
      if (want_pos > pos.size()) {
        want_neg += want_pos - pos.size();
        want_pos = pos.size();
      } else if (want_neg > neg.size()) {
        want_pos += want_neg - neg.size();
        want_neg = neg.size();
      }
      auto p = pos, n = neg;
      learn::shuffle(p.begin(), p.end(), rng);
      learn::shuffle(n.begin(), n.end(), rng);
      // Interleave so a batch does not list one class first.
      for (std::size_t i = 0; i < std::max(want_pos, want_neg); ++i) {
        if (i < want_pos)
          batch.push_back(p[i]);
        if (i < want_neg)
          batch.push_back(n[i]);
      }
    } else {
      auto all = partition;
      learn::shuffle(all.begin(), all.end(), rng);
      batch.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(batch_size));
    }
    out.push_back(std::move(batch));
  }
  return out;
}

}  // namespace llm4sd::data
