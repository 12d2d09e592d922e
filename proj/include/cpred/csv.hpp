#pragma once

// RFC-4180 style CSV reading: mandatory header, comma separator, optional
// double-quoted fields with "" escapes, '.' decimal separator.

#include <string>
#include <vector>

#include "cpred/conjugate.hpp"

namespace cpred {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // raw cells, unquoted
};

// Throws InvalidInput with line/column on malformed quoting or ragged rows.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

enum class MissingPolicy { Reject, Drop };

struct LoadedData {
  Dataset data;
  std::vector<std::string> covariate_names;
  std::string response_name;
  std::vector<std::size_t> source_rows;   // 1-based data-row numbers kept
  std::vector<std::size_t> dropped_rows;  // 1-based data-row numbers dropped
  std::vector<std::string> constant_columns;
};

// A cell is missing when empty or "NA".  Non-numeric cells are errors with
// line and column.  Constant covariate columns are reported, not rejected.
LoadedData load_csv(const std::string& path, const std::string& response_column,
                    MissingPolicy policy = MissingPolicy::Reject);
LoadedData table_to_dataset(const CsvTable& table, const std::string& response_column,
                            MissingPolicy policy = MissingPolicy::Reject);

// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(const std::string& field);

// Parses a single comma-separated row of numbers, e.g. "0.5,1,-2".
Eigen::VectorXd parse_numeric_row(const std::string& row);

}  // namespace cpred
