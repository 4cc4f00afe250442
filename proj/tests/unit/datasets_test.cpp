//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "llm4sd/datasets/dataset.hpp"
#include "test_util.hpp"

namespace llm4sd::data {
namespace {

Schema bbbp_schema() { return {"smiles", {"p_np"}, TaskKind::kClassification}; }

const Dataset &bbbp() {
  static const Dataset ds = load_csv(test::fixture_path("bbbp_fixture.csv"), bbbp_schema(), "bbbp");
  return ds;
}

std::string csv_of(const std::vector<std::string> &smiles, const std::vector<int> &labels) {
  std::string out = "smiles,y\n";
  for (std::size_t i = 0; i < smiles.size(); ++i)
    out += smiles[i] + "," + std::to_string(labels[i]) + "\n";
  return out;
}

std::set<std::size_t> as_set(const std::vector<std::size_t> &v) { return {v.begin(), v.end()}; }

TEST(LoadCsv, BbbpFixtureReportsFailuresLosslessly) {
  const Dataset &ds = bbbp();
  const IngestionReport &r = ds.report;
  EXPECT_EQ(r.rows_total, 300U);
  EXPECT_EQ(r.parsed + r.failed, r.rows_total);
  EXPECT_EQ(r.failed, r.failures.size());
  EXPECT_GE(r.failed, 1U);
  for (const auto &[row, f]: r.failures) {
    EXPECT_FALSE(ds.at(row).parsed());
    EXPECT_TRUE(f.position.has_value()) << f.message;
  }
  ASSERT_EQ(r.expected_rows, std::optional<std::size_t>(2039));
  ASSERT_EQ(r.warnings.size(), 1U);
  EXPECT_NE(r.warnings[0].find("2039"), std::string::npos);
  EXPECT_EQ(ds.checksum.size(), 64U);
  const auto j = to_json(r);
  EXPECT_EQ(j["rows_total"], 300);
}

TEST(LoadCsv, FreeSolvHasPublishedCount) {
  const Dataset ds =
      load_csv(test::fixture_path("freesolv.csv"), {"smiles", {"expt"}, TaskKind::kRegression},
               "freesolv");
  EXPECT_EQ(ds.records.size(), 642U);
  EXPECT_TRUE(ds.report.warnings.empty());
  EXPECT_EQ(ds.report.expected_rows, std::optional<std::size_t>(642));
}

TEST(LoadCsv, Errors) {
  const Schema s{"smiles", {"y"}, TaskKind::kClassification};
  EXPECT_THROW(parse_dataset("smiles,y\n", s), DataError);
  EXPECT_THROW(parse_dataset("smi,y\nCC,1\n", s), DataError);
  EXPECT_THROW(parse_dataset("smiles,z\nCC,1\n", s), DataError);
  EXPECT_THROW(parse_dataset("smiles,y\nCC,2\n", s), DataError);
  EXPECT_THROW(parse_dataset("smiles,y\nCC,yes\n", s), DataError);
  EXPECT_THROW(parse_dataset("smiles,y\nC1CC,1\n", s), DataError);  // nothing parses
  EXPECT_THROW(load_csv("/nonexistent/file.csv", s), DataError);
}

TEST(LoadCsv, MultitaskBlankLabelsAreAbsent) {
  const Schema s{"smiles", {"a", "b"}, TaskKind::kClassification};
  const Dataset ds = parse_dataset("smiles,a,b\nCC,1,\nCO,,0\nCN,0,1\n", s, "multi");
  EXPECT_EQ(ds.report.absent_labels, (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(ds.usable_rows(), (std::vector<std::size_t>{2}));
  const Dataset a = select_label(ds, "a");
  ASSERT_EQ(a.records.size(), 2U);
  EXPECT_EQ(a.records[1].row_id, 2U);
  EXPECT_EQ(a.label(0), 1.0);
  EXPECT_EQ(a.records[0].mol, ds.records[0].mol);  // shared parse
  EXPECT_THROW(select_label(ds, "c"), DataError);
}

TEST(Manifest, PublishedCounts) {
  const std::map<std::string, std::size_t> expected{
      {"bbbp", 2039}, {"clintox", 1478}, {"tox21", 7831}, {"sider", 1427},
      {"hiv", 17930}, {"bace", 11908},   {"esol", 1128},  {"freesolv", 642},
      {"lipophilicity", 4200}, {"qm9", 133885}};
  EXPECT_EQ(manifest().size(), expected.size());
  for (const auto &[name, n]: expected) {
    const auto e = find_manifest(name);
    ASSERT_TRUE(e) << name;
    EXPECT_EQ(e->expected_rows, n) << name;
  }
  EXPECT_FALSE(find_manifest("nope"));
}

TEST(ScaffoldSplit, DistinctScaffoldsGiveEightOneOne) {
  const std::vector<std::string> smi{"C1CC1",      "C1CCC1",     "C1CCCC1",    "C1CCCCC1",
                                     "C1CCCCCC1",  "c1ccccc1",   "c1ccncc1",   "c1ccoc1",
                                     "c1ccsc1",    "C1CCNCC1"};
  const Dataset ds = parse_dataset(csv_of(smi, std::vector<int>(10, 1)),
                                   {"smiles", {"y"}, TaskKind::kClassification});
  const Split s = scaffold_split(ds);
  EXPECT_EQ(s.train.size(), 8U);
  EXPECT_EQ(s.valid.size(), 1U);
  EXPECT_EQ(s.test.size(), 1U);
}

TEST(ScaffoldSplit, GiantGroupLandsInTrain) {
  std::vector<std::string> smi(18, "Cc1ccccc1");
  smi.push_back("C1CCC1");
  smi.push_back("C1CCCC1");
  const Dataset ds = parse_dataset(csv_of(smi, std::vector<int>(20, 0)),
                                   {"smiles", {"y"}, TaskKind::kClassification});
  const Split s = scaffold_split(ds);
  std::vector<std::size_t> giant(18);
  std::iota(giant.begin(), giant.end(), 0);
  EXPECT_EQ(s.train, giant);
}

TEST(ScaffoldSplit, BenzeneAndTolueneShareAGroup) {
  EXPECT_EQ(scaffold_key(mol::parse_smiles("c1ccccc1")), scaffold_key(mol::parse_smiles("Cc1ccccc1")));
  EXPECT_EQ(scaffold_key(mol::parse_smiles("CCO")), "");
  EXPECT_EQ(scaffold_key(mol::parse_smiles("CCCC")), scaffold_key(mol::parse_smiles("CO")));
}

TEST(ScaffoldSplit, BbbpPartitionsAreDisjointExhaustiveAndGroupPure) {
  const Dataset &ds = bbbp();
  const Split s = scaffold_split(ds);
  const auto usable = ds.usable_rows();
  std::set<std::size_t> all;
  for (const auto *part: {&s.train, &s.valid, &s.test})
    for (std::size_t id: *part)
      EXPECT_TRUE(all.insert(id).second) << "row " << id << " appears twice";
  EXPECT_EQ(all, as_set(usable));

  std::map<std::string, std::size_t> group_size;
  std::map<std::string, int> owner;
  int p = 0;
  for (const auto *part: {&s.train, &s.valid, &s.test}) {
    for (std::size_t id: *part) {
      const std::string key = scaffold_key(*ds.at(id).mol);
      ++group_size[key];
      const auto [it, fresh] = owner.emplace(key, p);
      EXPECT_EQ(it->second, p) << "scaffold spans partitions: " << key;
    }
    ++p;
  }
  std::size_t largest = 0;
  for (const auto &g: group_size)
    largest = std::max(largest, g.second);
  const double n = static_cast<double>(usable.size());
  EXPECT_LE(std::abs(static_cast<double>(s.train.size()) - 0.8 * n), static_cast<double>(largest) + 1);
  EXPECT_LE(std::abs(static_cast<double>(s.valid.size()) - 0.1 * n), static_cast<double>(largest) + 1);
  EXPECT_LE(std::abs(static_cast<double>(s.test.size()) - 0.1 * n), static_cast<double>(largest) + 1);

  const Dataset again = load_csv(test::fixture_path("bbbp_fixture.csv"), bbbp_schema(), "bbbp");
  EXPECT_EQ(to_json(scaffold_split(again)).dump(), to_json(s).dump());
}

TEST(ScaffoldSplit, Errors) {
  const Dataset ds = parse_dataset(csv_of({"C", "CC"}, {0, 1}),
                                   {"smiles", {"y"}, TaskKind::kClassification});
  EXPECT_THROW(scaffold_split(ds), DataError);
}

Dataset many(std::size_t n) {
  std::vector<std::string> smi;
  std::vector<int> lab;
  for (std::size_t i = 0; i < n; ++i) {
    smi.push_back(std::string(1 + i % 7, 'C') + (i % 2 ? "O" : "N"));
    lab.push_back(static_cast<int>(i % 2));
  }
  return parse_dataset(csv_of(smi, lab), {"smiles", {"y"}, TaskKind::kClassification}, "many");
}

TEST(RandomSplit, SeededAndExhaustive) {
  const Dataset ds = many(1000);
  const Split a = random_split(ds, {}, 5);
  const Split b = random_split(ds, {}, 5);
  const Split c = random_split(ds, {}, 6);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_NE(a.train, c.train);
  EXPECT_EQ(a.train.size(), 800U);
  EXPECT_EQ(a.valid.size(), 100U);
  EXPECT_EQ(a.test.size(), 100U);
  std::set<std::size_t> all;
  for (const auto *part: {&a.train, &a.valid, &a.test})
    all.insert(part->begin(), part->end());
  EXPECT_EQ(all.size(), 1000U);
  EXPECT_THROW(random_split(ds, {0.8, 0.1, 0.2}, 1), DataError);
  EXPECT_THROW(random_split(many(9), {}, 1), DataError);
}

TEST(Split, JsonRoundTrip) {
  const Split a = random_split(many(50), {0.6, 0.2, 0.2}, 3);
  const Split b = split_from_json(nlohmann::json::parse(to_json(a).dump()));
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_THROW(split_from_json(nlohmann::json{{"method", "odd"}}), DataError);
}

TEST(SampleBatches, DistinctBalancedAndSeeded) {
  const Dataset ds = many(100);
  const auto rows = ds.usable_rows();
  const auto batches = sample_batches(ds, rows, 10, 4, 42);
  ASSERT_EQ(batches.size(), 4U);
  for (const auto &b: batches) {
    EXPECT_EQ(as_set(b).size(), 10U);
    int pos = 0;
    for (std::size_t id: b)
      pos += ds.label(id) == 1.0;
    EXPECT_EQ(pos, 5);
  }
  EXPECT_EQ(sample_batches(ds, rows, 10, 4, 42), batches);
  EXPECT_NE(sample_batches(ds, rows, 10, 4, 43), batches);
  EXPECT_THROW(sample_batches(ds, rows, 101, 1, 0), DataError);
  EXPECT_THROW(sample_batches(ds, {}, 1, 1, 0), DataError);
}

TEST(SampleBatches, ImbalancedClassTopsUp) {
  std::vector<int> lab(30, 0);
  lab[0] = lab[1] = 1;
  std::vector<std::string> smi;
  for (int i = 0; i < 30; ++i)
    smi.push_back(std::string(1 + i % 5, 'C'));
  const Dataset ds = parse_dataset(csv_of(smi, lab), {"smiles", {"y"}, TaskKind::kClassification});
  for (const auto &b: sample_batches(ds, ds.usable_rows(), 10, 3, 1)) {
    EXPECT_EQ(b.size(), 10U);
    EXPECT_EQ(as_set(b).size(), 10U);
  }
}

}  // namespace
}  // namespace llm4sd::data
