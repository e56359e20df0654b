#include "graftforest/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "graftforest/error.hpp"

namespace graftforest {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::string quote_if_needed(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

double parse_cell(std::string_view raw, std::string_view source, std::size_t row, std::string_view column) {
  std::string_view text = trim(raw);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw DataError(std::string(source) + ": row " + std::to_string(row) + ", column '" + std::string(column) +
                    "': non-numeric value '" + std::string(raw) + "'");
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  bool any = false;
  std::size_t line = 1;

  const auto end_field = [&] {
    record.push_back(field_quoted ? field : std::string(trim(field)));
    field.clear();
    field_quoted = false;
  };
  const auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      if (!trim(field).empty()) throw DataError("CSV line " + std::to_string(line) + ": stray quote inside a field");
      field.clear();
      in_quotes = true;
      field_quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
      ++line;
    } else {
      field += c;
    }
  }
  if (in_quotes) throw DataError("CSV: unterminated quoted field starting before line " + std::to_string(line));
  if (any || !field.empty() || !record.empty()) end_record();

  if (records.empty()) throw DataError("CSV: empty file (a header row is required)");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw DataError("CSV: data row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                      " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  try {
    return parse_csv(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc()) throw InvariantViolation("format_double: conversion failed");
  return std::string(buffer, ptr);
}

LoadedData dataset_from_table(const CsvTable& table, std::string_view target_column, bool normalize,
                              std::string_view source) {
  std::size_t target = table.header.size();
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (table.header[j] == target_column) {
      if (target != table.header.size()) throw DataError(std::string(source) + ": duplicate column '" + std::string(target_column) + "'");
      target = j;
    }
  }
  if (target == table.header.size()) {
    throw DataError(std::string(source) + ": target column '" + std::string(target_column) + "' not found");
  }
  if (table.header.size() < 2) throw DataError(std::string(source) + ": need at least one feature column besides the target");
  if (table.rows.empty()) throw DataError(std::string(source) + ": no data rows");

  std::vector<std::string> names;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j != target) names.push_back(table.header[j]);
  }
  RowMatrix features(table.rows.size(), names.size());
  std::vector<double> targets(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      const double v = parse_cell(table.rows[i][j], source, i + 1, table.header[j]);
      if (j == target) {
        targets[i] = v;
      } else {
        features(i, k++) = v;
      }
    }
  }
  std::optional<MinMaxScaler> scaler;
  if (normalize) {
    scaler = MinMaxScaler::fit(features);
    features = scaler->apply(features);
  }
  return LoadedData{Dataset(std::move(features), std::move(targets), std::move(names)), std::string(target_column),
                    std::move(scaler)};
}

LoadedData load_csv(const std::filesystem::path& path, std::string_view target_column, bool normalize) {
  return dataset_from_table(read_csv_file(path), target_column, normalize, path.string());
}

RowMatrix load_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& expected,
                           std::size_t expected_cols) {
  const CsvTable table = read_csv_file(path);
  std::vector<std::size_t> columns;
  if (!expected.empty()) {
    for (const std::string& name : expected) {
      const auto it = std::find(table.header.begin(), table.header.end(), name);
      if (it == table.header.end()) {
        throw DataError(path.string() + ": input lacks the model's feature column '" + name + "'");
      }
      columns.push_back(static_cast<std::size_t>(it - table.header.begin()));
    }
  } else {
    if (table.header.size() != expected_cols) {
      throw DataError(path.string() + ": input has " + std::to_string(table.header.size()) + " columns, model expects " +
                      std::to_string(expected_cols));
    }
    for (std::size_t j = 0; j < expected_cols; ++j) columns.push_back(j);
  }
  RowMatrix out(table.rows.size(), columns.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      out(i, k) = parse_cell(table.rows[i][columns[k]], path.string(), i + 1, table.header[columns[k]]);
    }
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data, std::string_view target_name) {
  std::string text;
  for (std::size_t j = 0; j < data.n_features(); ++j) {
    text += quote_if_needed(data.feature_names().empty() ? "x" + std::to_string(j + 1) : data.feature_names()[j]);
    text += ',';
  }
  text += quote_if_needed(std::string(target_name));
  text += '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (double v : data.row(i)) {
      text += format_double(v);
      text += ',';
    }
    text += format_double(data.y(i));
    text += '\n';
  }
  write_file(path, text);
}

void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const RowMatrix& values) {
  if (header.size() != values.cols()) throw InputError("write_matrix_csv: header size does not match column count");
  std::string text;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) text += ',';
    text += quote_if_needed(header[j]);
  }
  text += '\n';
  for (std::size_t i = 0; i < values.rows(); ++i) {
    const auto row = values.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) text += ',';
      text += format_double(row[j]);
    }
    text += '\n';
  }
  write_file(path, text);
}

const std::vector<std::string>& boston_feature_names() {
  static const std::vector<std::string> names = {"CRIM", "ZN",  "INDUS", "CHAS",    "NOX", "RM",   "AGE",
                                                 "DIS",  "RAD", "TAX",   "PTRATIO", "B",   "LSTAT"};
  return names;
}

void validate_boston_profile(const LoadedData& loaded) {
  const Dataset& d = loaded.data;
  if (d.rows() != kBostonRows || d.n_features() != boston_feature_names().size()) {
    throw DataError("Boston profile: expected 506 rows and 13 features, found " + std::to_string(d.rows()) + " rows and " +
                    std::to_string(d.n_features()) + " features");
  }
  if (d.feature_names() != boston_feature_names()) throw DataError("Boston profile: feature columns differ from the standard layout");
  if (loaded.target_name != "MEDV") throw DataError("Boston profile: target column must be MEDV");
}

}  // namespace graftforest
