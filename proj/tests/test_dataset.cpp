#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "mmg/dataset.hpp"
#include "mmg/errors.hpp"
#include "mmg/rng.hpp"
#include "support/test_util.hpp"

using namespace mmg;
using mmg_test::NA;

namespace {

namespace fs = std::filesystem;

fs::path write_temp(const std::string& name, const std::string& content) {
  auto dir = fs::temp_directory_path() / "mmg_dataset_test";
  fs::create_directories(dir);
  auto path = dir / name;
  std::ofstream out(path);
  out << content;
  return path;
}

std::vector<ColumnSpec> two_cols() {
  return {{"a", ColumnKind::Continuous, 0}, {"b", ColumnKind::Continuous, 0}};
}

}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("load_csv parses NA masks") {
  auto path = write_temp("basic.csv", "a,b\n1.0,NA\nNA,2.0\n");
  DataMatrix d = load_csv(path, two_cols());
  REQUIRE(d.rows() == 2);
  CHECK(d.row_pattern(0).to_string() == "10");
  CHECK(d.row_pattern(1).to_string() == "01");
  CHECK(d.value(0, 1) == 1.0);
  CHECK(d.value(1, 2) == 2.0);
  CHECK(d.dropped_all_missing() == 0);
}

TEST_CASE("all-missing rows are dropped and counted") {
  auto path = write_temp("allmiss.csv", "a,b\n1.0,2.0\nNA,NA\n3.0,NA\n");
  DataMatrix d = load_csv(path, two_cols());
  CHECK(d.rows() == 2);
  CHECK(d.dropped_all_missing() == 1);
}

TEST_CASE("binary range violations name the cell") {
  auto path = write_temp("bin.csv", "a,b\n1,0\n2,1\n");
  std::vector<ColumnSpec> schema = {{"a", ColumnKind::Binary, 0},
                                    {"b", ColumnKind::Binary, 0}};
  CHECK_THROWS_WITH_AS(load_csv(path, schema),
                       doctest::Contains("column \"a\""), ParseError);
  CHECK_THROWS_WITH_AS(load_csv(path, schema), doctest::Contains("line 3"),
                       ParseError);
}

TEST_CASE("count columns respect their ranges") {
  std::vector<ColumnSpec> schema = {{"a", ColumnKind::Count, 5}};
  auto good = write_temp("count_good.csv", "a\n0\n5\n3\n");
  CHECK(load_csv(good, schema).rows() == 3);
  auto bad = write_temp("count_bad.csv", "a\n6\n");
  CHECK_THROWS_AS(load_csv(bad, schema), ParseError);
  auto frac = write_temp("count_frac.csv", "a\n2.5\n");
  CHECK_THROWS_AS(load_csv(frac, schema), ParseError);
}

TEST_CASE("header mismatches are schema errors") {
  auto path = write_temp("hdr.csv", "a,c\n1,2\n");
  CHECK_THROWS_AS(load_csv(path, two_cols()), SchemaError);
  auto path2 = write_temp("hdr2.csv", "a\n1\n");
  CHECK_THROWS_AS(load_csv(path2, two_cols()), SchemaError);
}

TEST_CASE("duplicate column names are rejected") {
  auto path = write_temp("dupname.csv", "a,a\n1,2\n");
  CHECK_THROWS_AS(load_csv(path), SchemaError);
}

TEST_CASE("unparseable cells are parse errors with location") {
  auto path = write_temp("badcell.csv", "a,b\n1.0,zzz\n");
  CHECK_THROWS_WITH_AS(load_csv(path, two_cols()),
                       doctest::Contains("column \"b\""), ParseError);
}

TEST_CASE("schema inference promotes 0/1 columns to binary") {
  auto path = write_temp("infer.csv", "a,b\n0,1.5\n1,2.5\nNA,0.5\n");
  DataMatrix d = load_csv(path);
  CHECK(d.columns()[0].kind == ColumnKind::Binary);
  CHECK(d.columns()[1].kind == ColumnKind::Continuous);
}

TEST_CASE("pattern_table groups rows by mask") {
  DataMatrix d = mmg_test::make_data(3, {{1, 2, NA}, {3, 4, NA}, {NA, 5, 6}});
  PatternTable t = pattern_table(d);
  REQUIRE(t.entries.size() == 2);
  CHECK(t.entries.at(Pattern::from_string("110")) == std::vector<int>{0, 1});
  CHECK(t.entries.at(Pattern::from_string("011")) == std::vector<int>{2});

  DataMatrix full = mmg_test::make_data(2, {{1, 2}, {3, 4}});
  PatternTable tf = pattern_table(full);
  REQUIRE(tf.entries.size() == 1);
  CHECK(tf.entries.begin()->first.all());

  DataMatrix empty = mmg_test::make_data(2, {});
  CHECK(pattern_table(empty).entries.empty());
}

TEST_CASE("rows_at_least selects by dominance") {
  DataMatrix d = mmg_test::make_data(
      5, {{1, 2, 3, 4, NA}, {1, 2, 3, 4, 5}, {NA, NA, 3, 4, 5}});
  CHECK(rows_at_least(d, Pattern::from_string("11110")) ==
        std::vector<int>({0, 1}));
  CHECK(rows_at_least(d, Pattern::zeros(5)) == std::vector<int>({0, 1, 2}));
  CHECK(rows_at_least(d, Pattern::ones(5)) == std::vector<int>({1}));
}

TEST_CASE("rows_at_least is monotone in the required set") {
  RandomStream rng(42);
  for (int rep = 0; rep < 100; ++rep) {
    int d = 2 + static_cast<int>(rng.uniform_index(6));
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 20; ++i) {
      std::vector<double> row(d);
      bool any = false;
      for (int j = 0; j < d; ++j) {
        bool obs = rng.bernoulli(0.6);
        row[j] = obs ? rng.normal() : NA;
        any = any || obs;
      }
      if (!any) row[0] = 0.0;
      rows.push_back(row);
    }
    DataMatrix data = mmg_test::make_data(d, rows);
    auto r1 = mmg_test::random_pattern(d, 0.4, rng);
    auto r2 = r1 | mmg_test::random_pattern(d, 0.4, rng);  // r2 superset
    auto rows2 = rows_at_least(data, r2);
    auto rows1 = rows_at_least(data, r1);
    for (int i : rows2)
      CHECK(std::find(rows1.begin(), rows1.end(), i) != rows1.end());
  }
}

TEST_CASE("repeated loads agree on every observed cell") {
  auto path = write_temp("det.csv", "a,b\n1.0,NA\nNA,2.0\n3.0,4.0\n");
  DataMatrix d1 = load_csv(path, two_cols());
  DataMatrix d2 = load_csv(path, two_cols());
  REQUIRE(d1.rows() == d2.rows());
  for (int i = 0; i < d1.rows(); ++i) {
    CHECK(d1.row_pattern(i) == d2.row_pattern(i));
    for (int j = 1; j <= d1.cols(); ++j)
      if (d1.observed(i, j)) CHECK(d1.value(i, j) == d2.value(i, j));
  }
}

TEST_CASE("csv round trip for completed data") {
  DataMatrix d = mmg_test::make_data(2, {{1.25, -3.5}, {0.1, 2e-7}});
  auto dir = fs::temp_directory_path() / "mmg_dataset_test";
  fs::create_directories(dir);
  auto path = dir / "roundtrip.csv";
  write_csv(d, path);
  DataMatrix back = load_csv(path, d.columns());
  REQUIRE(back.rows() == d.rows());
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 1; j <= d.cols(); ++j)
      CHECK(back.value(i, j) == d.value(i, j));
}

TEST_CASE("subset_rows copies rows with duplicates") {
  DataMatrix d = mmg_test::make_data(2, {{1, 2}, {NA, 4}, {5, 6}});
  DataMatrix s = d.subset_rows({2, 0, 2});
  REQUIRE(s.rows() == 3);
  CHECK(s.value(0, 1) == 5.0);
  CHECK(s.value(1, 1) == 1.0);
  CHECK(s.value(2, 2) == 6.0);
}

TEST_SUITE_END();
