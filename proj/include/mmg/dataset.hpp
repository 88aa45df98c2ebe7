#ifndef MMG_DATASET_HPP_
#define MMG_DATASET_HPP_

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mmg/pattern.hpp"

namespace mmg {

enum class ColumnKind { Continuous, Binary, Count };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  int count_max = 0;  // upper bound for Count columns
};

// Rectangular data with a missingness mask.  Immutable after construction;
// masked cells are canonicalized to a quiet NaN so that every missing cell
// carries the identical bit pattern.  Rows are 0-based, variables 1-based
// to match graph vertex indices.
class DataMatrix {
 public:
  DataMatrix(std::vector<ColumnSpec> columns, Eigen::MatrixXd values,
             std::vector<ResponsePattern> row_patterns,
             int dropped_all_missing = 0);

  int rows() const { return static_cast<int>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }
  const std::vector<ColumnSpec>& columns() const { return columns_; }
  // 1-based index of the named column; throws SchemaError if absent.
  int column_index(std::string_view name) const;

  double value(int row, int var) const { return values_(row, var - 1); }
  bool observed(int row, int var) const {
    return row_patterns_[row].test(var);
  }
  const ResponsePattern& row_pattern(int row) const {
    return row_patterns_[row];
  }
  const Eigen::MatrixXd& values() const { return values_; }

  // Row values at the given variables (1-based), in the given order.
  Eigen::VectorXd row_at(int row, const std::vector<int>& vars) const;

  // New DataMatrix holding the given rows (duplicates allowed).
  DataMatrix subset_rows(const std::vector<int>& row_indices) const;

  // Count of all-missing input rows rejected at ingestion.
  int dropped_all_missing() const { return dropped_all_missing_; }

  static double missing_sentinel();

 private:
  std::vector<ColumnSpec> columns_;
  Eigen::MatrixXd values_;
  std::vector<ResponsePattern> row_patterns_;
  int dropped_all_missing_ = 0;
};

// Rows grouped by exact response pattern; lists partition 0..n-1.
struct PatternTable {
  std::map<Pattern, std::vector<int>> entries;

  std::vector<ResponsePattern> patterns() const;
};

PatternTable pattern_table(const DataMatrix& d);

// Rows whose pattern observes every variable in `required`; other
// variables are unconstrained.
std::vector<int> rows_at_least(const DataMatrix& d,
                               const ModelPattern& required);

// CSV ingestion: first line is the header and must match the schema names
// in order.  The literal token "NA" (and the empty string) marks a missing
// cell; rows with every cell missing are dropped and counted.
DataMatrix load_csv(const std::filesystem::path& path,
                    const std::vector<ColumnSpec>& schema);

// Schema-inferring variant: every column is Continuous unless all of its
// observed values are 0/1, in which case it is Binary.
DataMatrix load_csv(const std::filesystem::path& path);

// Writes the matrix back out with the same header; masked cells (if any)
// become "NA".  Numbers are rendered with round-trip precision.
void write_csv(const DataMatrix& d, const std::filesystem::path& path);

}  // namespace mmg

#endif  // MMG_DATASET_HPP_
