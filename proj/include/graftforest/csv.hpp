#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graftforest/dataset.hpp"

namespace graftforest {

/// Header plus raw string cells. Quoted fields may contain commas, quotes ("") and newlines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

struct LoadedData {
  Dataset data;
  std::string target_name;
  /// Set when normalization was requested; maps raw features into [0,1].
  std::optional<MinMaxScaler> scaler;
};

/// Every column other than `target_column` becomes a feature, in file order.
LoadedData load_csv(const std::filesystem::path& path, std::string_view target_column, bool normalize);
LoadedData dataset_from_table(const CsvTable& table, std::string_view target_column, bool normalize,
                              std::string_view source = "<memory>");

/// Feature matrix for prediction. With `expected` names, columns are picked by
/// name (extra columns ignored); otherwise every column is used in order.
RowMatrix load_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& expected,
                           std::size_t expected_cols);

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data, std::string_view target_name = "y");
void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const RowMatrix& values);

/// Boston Housing column layout: 13 features then MEDV.
const std::vector<std::string>& boston_feature_names();
inline constexpr std::size_t kBostonRows = 506;

/// Throws DataError unless the data has 506 rows and the 13 Boston features.
void validate_boston_profile(const LoadedData& loaded);

}  // namespace graftforest
