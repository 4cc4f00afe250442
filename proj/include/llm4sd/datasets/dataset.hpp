//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_DATASETS_DATASET_HPP_
#define LLM4SD_DATASETS_DATASET_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "llm4sd/learners/forest.hpp"
#include "llm4sd/molgraph/molecule.hpp"

namespace llm4sd::data {

using learn::TaskKind;

class DataError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ParseFailure {
  std::string kind;  // molgraph error kind name
  std::string message;
  std::optional<std::size_t> position;
};

struct Record {
  std::size_t row_id = 0;  // 0-based data row in the source file
  std::string smiles;
  std::shared_ptr<const mol::Molecule> mol;  // null when parsing failed
  std::optional<ParseFailure> failure;
  std::vector<std::optional<double>> labels;  // one per label column

  bool parsed() const { return mol != nullptr; }
};

struct IngestionReport {
  std::size_t rows_total = 0;
  std::size_t parsed = 0;
  std::size_t failed = 0;
  std::vector<std::size_t> absent_labels;  // per label column
  std::vector<std::pair<std::size_t, ParseFailure>> failures;
  std::optional<std::size_t> expected_rows;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const IngestionReport &r);

struct Schema {
  std::string smiles_column = "smiles";
  std::vector<std::string> label_columns;
  TaskKind kind = TaskKind::kClassification;
};

struct Dataset {
  std::string name;
  TaskKind kind = TaskKind::kClassification;
  std::vector<std::string> label_names;
  std::vector<Record> records;  // ascending row_id
  std::string source_path;
  std::string checksum;  // SHA-256 of the file bytes
  IngestionReport report;

  /// Row ids of records that parsed and carry every label.
  std::vector<std::size_t> usable_rows() const;
  /// Record by row id; throws DataError if absent.
  const Record &at(std::size_t row_id) const;
  /// Label `index` of a row; throws DataError if absent.
  double label(std::size_t row_id, std::size_t index = 0) const;
};

/// Parses CSV text. Blank label cells are absent labels. Classification
/// labels must read as 0 or 1.
Dataset parse_dataset(std::string_view csv_text, const Schema &schema, std::string name = {},
                      std::string source_path = {});

/// Reads and parses a file; when `name` is in the manifest the observed row
/// count is compared against the published one.
Dataset load_csv(const std::string &path, const Schema &schema, std::string name = {});

/// Single-label view sharing parsed molecules; rows whose label is absent are
/// dropped, row ids are kept.
Dataset select_label(const Dataset &ds, std::string_view label);

struct ManifestEntry {
  std::string dataset;
  std::size_t expected_rows = 0;
  std::string smiles_column;
  std::string default_file;
};

const std::vector<ManifestEntry> &manifest();
std::optional<ManifestEntry> find_manifest(std::string_view dataset);

// ---- splits -------------------------------------------------------------

enum class SplitMethod { kScaffold, kRandom };
std::string_view split_method_name(SplitMethod m);
SplitMethod split_method_from_name(std::string_view name);

struct Fractions {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

struct Split {
  SplitMethod method = SplitMethod::kScaffold;
  Fractions fractions;
  std::optional<std::uint64_t> seed;
  // Ascending row ids.
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

/// Canonical key of the Murcko scaffold; acyclic molecules share "".
std::string scaffold_key(const mol::Molecule &m);

/// Groups usable rows by scaffold key, orders groups by size (descending)
/// then key, and assigns each group to train while train is below its
/// target, then valid, then test. Needs at least 10 usable rows.
Split scaffold_split(const Dataset &ds, const Fractions &f = {});

/// Seeded shuffle of usable rows, then contiguous partition.
Split random_split(const Dataset &ds, const Fractions &f, std::uint64_t seed);

nlohmann::json to_json(const Split &s);
Split split_from_json(const nlohmann::json &j);

/// `n_batches` batches of `batch_size` distinct rows drawn from `partition`.
/// Classification batches take half positives and half negatives when both
/// classes have enough rows, topping up from the other class otherwise.
std::vector<std::vector<std::size_t>> sample_batches(const Dataset &ds,
                                                     const std::vector<std::size_t> &partition,
                                                     std::size_t batch_size,
                                                     std::size_t n_batches, std::uint64_t seed);

}  // namespace llm4sd::data

#endif  // LLM4SD_DATASETS_DATASET_HPP_
