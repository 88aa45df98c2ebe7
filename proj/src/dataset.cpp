#include "mmg/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mmg/errors.hpp"

namespace mmg {

namespace {

void check_cell_range(const ColumnSpec& col, double v, int row, int csv_line) {
  const bool line_known = csv_line > 0;
  auto where = [&]() {
    std::ostringstream os;
    if (line_known)
      os << "line " << csv_line;
    else
      os << "row " << row;
    os << ", column \"" << col.name << "\"";
    return os.str();
  };
  if (!std::isfinite(v))
    throw ParseError("non-finite value at " + where());
  if (col.kind == ColumnKind::Binary && v != 0.0 && v != 1.0)
    throw ParseError("binary column expects 0/1, got " + std::to_string(v) +
                     " at " + where());
  if (col.kind == ColumnKind::Count) {
    if (v < 0.0 || v > col.count_max || v != std::floor(v))
      throw ParseError("count column expects integers in 0.." +
                       std::to_string(col.count_max) + ", got " +
                       std::to_string(v) + " at " + where());
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

double DataMatrix::missing_sentinel() {
  return std::numeric_limits<double>::quiet_NaN();
}

DataMatrix::DataMatrix(std::vector<ColumnSpec> columns, Eigen::MatrixXd values,
                       std::vector<ResponsePattern> row_patterns,
                       int dropped_all_missing)
    : columns_(std::move(columns)),
      values_(std::move(values)),
      row_patterns_(std::move(row_patterns)),
      dropped_all_missing_(dropped_all_missing) {
  const int d = static_cast<int>(columns_.size());
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      if (columns_[a].name == columns_[b].name)
        throw SchemaError("duplicate column name \"" + columns_[a].name +
                          "\"");
  if (values_.cols() != d)
    throw SchemaError("value grid has " + std::to_string(values_.cols()) +
                      " columns for " + std::to_string(d) + " column specs");
  if (static_cast<int>(row_patterns_.size()) != values_.rows())
    throw SchemaError("row pattern count does not match row count");
  for (int i = 0; i < values_.rows(); ++i) {
    if (row_patterns_[i].size() != d)
      throw SchemaError("row pattern width mismatch at row " +
                        std::to_string(i));
    for (int j = 1; j <= d; ++j) {
      if (row_patterns_[i].test(j))
        check_cell_range(columns_[j - 1], values_(i, j - 1), i, 0);
      else
        values_(i, j - 1) = missing_sentinel();
    }
  }
}

int DataMatrix::column_index(std::string_view name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j)
    if (columns_[j].name == name) return static_cast<int>(j) + 1;
  throw SchemaError("no column named \"" + std::string(name) + "\"");
}

Eigen::VectorXd DataMatrix::row_at(int row,
                                   const std::vector<int>& vars) const {
  Eigen::VectorXd out(static_cast<int>(vars.size()));
  for (std::size_t k = 0; k < vars.size(); ++k)
    out[static_cast<int>(k)] = values_(row, vars[k] - 1);
  return out;
}

DataMatrix DataMatrix::subset_rows(const std::vector<int>& row_indices) const {
  Eigen::MatrixXd v(static_cast<int>(row_indices.size()), values_.cols());
  std::vector<ResponsePattern> pats;
  pats.reserve(row_indices.size());
  for (std::size_t k = 0; k < row_indices.size(); ++k) {
    v.row(static_cast<int>(k)) = values_.row(row_indices[k]);
    pats.push_back(row_patterns_[row_indices[k]]);
  }
  return DataMatrix(columns_, std::move(v), std::move(pats));
}

std::vector<ResponsePattern> PatternTable::patterns() const {
  std::vector<ResponsePattern> out;
  out.reserve(entries.size());
  for (const auto& [p, rows] : entries) out.push_back(p);
  return out;
}

PatternTable pattern_table(const DataMatrix& d) {
  PatternTable t;
  for (int i = 0; i < d.rows(); ++i) t.entries[d.row_pattern(i)].push_back(i);
  return t;
}

std::vector<int> rows_at_least(const DataMatrix& d,
                               const ModelPattern& required) {
  std::vector<int> out;
  for (int i = 0; i < d.rows(); ++i)
    if (d.row_pattern(i).contains(required)) out.push_back(i);
  return out;
}

DataMatrix load_csv(const std::filesystem::path& path,
                    const std::vector<ColumnSpec>& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CSV file: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(path.string() + ": empty file, header expected");
  const auto header = split_csv_line(line);
  if (header.size() != schema.size())
    throw SchemaError(path.string() + ": header has " +
                      std::to_string(header.size()) + " columns, schema has " +
                      std::to_string(schema.size()));
  for (std::size_t j = 0; j < schema.size(); ++j)
    if (trim(header[j]) != schema[j].name)
      throw SchemaError(path.string() + ": header column " +
                        std::to_string(j + 1) + " is \"" + trim(header[j]) +
                        "\", schema expects \"" + schema[j].name + "\"");

  const int d = static_cast<int>(schema.size());
  std::vector<double> flat;
  std::vector<ResponsePattern> pats;
  int dropped = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != d)
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": expected " + std::to_string(d) + " fields, got " +
                       std::to_string(fields.size()));
    ResponsePattern r = Pattern::zeros(d);
    std::vector<double> row(d, DataMatrix::missing_sentinel());
    for (int j = 0; j < d; ++j) {
      const std::string cell = trim(fields[j]);
      if (cell == "NA" || cell.empty()) continue;
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size())
        throw ParseError(path.string() + ":" + std::to_string(lineno) +
                         ": cannot parse \"" + cell + "\" in column \"" +
                         schema[j].name + "\"");
      check_cell_range(schema[j], v, -1, lineno);
      row[j] = v;
      r.set(j + 1);
    }
    if (r.none()) {
      ++dropped;
      continue;
    }
    flat.insert(flat.end(), row.begin(), row.end());
    pats.push_back(r);
  }
  const int n = static_cast<int>(pats.size());
  Eigen::MatrixXd values(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) values(i, j) = flat[i * d + j];
  return DataMatrix(schema, std::move(values), std::move(pats), dropped);
}

DataMatrix load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CSV file: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(path.string() + ": empty file, header expected");
  std::vector<ColumnSpec> schema;
  for (const auto& name : split_csv_line(line))
    schema.push_back({trim(name), ColumnKind::Continuous, 0});
  DataMatrix raw = load_csv(path, schema);
  // Promote 0/1-valued columns to Binary.
  bool any = false;
  for (int j = 1; j <= raw.cols(); ++j) {
    bool binary = true;
    bool seen = false;
    for (int i = 0; i < raw.rows() && binary; ++i) {
      if (!raw.observed(i, j)) continue;
      seen = true;
      double v = raw.value(i, j);
      binary = (v == 0.0 || v == 1.0);
    }
    if (seen && binary) {
      schema[j - 1].kind = ColumnKind::Binary;
      any = true;
    }
  }
  if (!any) return raw;
  return load_csv(path, schema);
}

void write_csv(const DataMatrix& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open CSV file for write: " +
                             path.string());
  for (int j = 0; j < d.cols(); ++j)
    out << (j ? "," : "") << d.columns()[j].name;
  out << "\n";
  char buf[64];
  for (int i = 0; i < d.rows(); ++i) {
    for (int j = 1; j <= d.cols(); ++j) {
      if (j > 1) out << ",";
      if (!d.observed(i, j)) {
        out << "NA";
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g", d.value(i, j));
        out << buf;
      }
    }
    out << "\n";
  }
  if (!out) throw ParseError("failed writing CSV file: " + path.string());
}

}  // namespace mmg
