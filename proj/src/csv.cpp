#include "cpred/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cpred/errors.hpp"

namespace cpred {

namespace {

std::string where(std::size_t line, std::size_t col) {
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA"; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_lines;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_quoted = false;
    ++col;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      records.push_back(std::move(record));
      record_lines.push_back(record_line);
    }
    record.clear();
    col = 1;
  };

  for (std::size_t k = 0; k < text.size(); ++k) {
    const char ch = text[k];
    if (in_quotes) {
      if (ch == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field.push_back('"');
          ++k;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty() || field_quoted) {
          throw InvalidInput("unexpected quote at " + where(line, col));
        }
        in_quotes = true;
        field_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (k + 1 < text.size() && text[k + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        if (field_quoted) throw InvalidInput("text after closing quote at " + where(line, col));
        field.push_back(ch);
    }
  }
  if (in_quotes) throw InvalidInput("unterminated quoted field starting on line " + std::to_string(record_line));
  if (!field.empty() || !record.empty() || field_quoted) end_record();

  if (records.empty()) throw InvalidInput("CSV has no header row");
  CsvTable t;
  t.header = std::move(records.front());
  if (!t.header.empty() && t.header[0].rfind("\xEF\xBB\xBF", 0) == 0) t.header[0].erase(0, 3);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw InvalidInput("line " + std::to_string(record_lines[r]) + ": expected " +
                         std::to_string(t.header.size()) + " fields, found " +
                         std::to_string(records[r].size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

LoadedData table_to_dataset(const CsvTable& table, const std::string& response_column,
                            MissingPolicy policy) {
  const auto it = std::find(table.header.begin(), table.header.end(), response_column);
  if (it == table.header.end()) throw InvalidInput("response column '" + response_column + "' not found");
  const auto resp = static_cast<std::size_t>(it - table.header.begin());
  if (table.header.size() < 2) throw InvalidInput("CSV needs at least one covariate column");

  LoadedData out;
  out.response_name = response_column;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c != resp) out.covariate_names.push_back(table.header[c]);
  }

  std::vector<std::size_t> missing;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (std::any_of(row.begin(), row.end(), [](const std::string& c) { return is_missing(trim(c)); })) {
      missing.push_back(r + 1);
    }
  }
  if (!missing.empty() && policy == MissingPolicy::Reject) {
    std::string list;
    for (std::size_t k = 0; k < missing.size(); ++k) {
      if (k) list += ", ";
      list += std::to_string(missing[k]);
    }
    throw InvalidInput("missing values in data rows " + list);
  }
  out.dropped_rows = missing;

  const auto q = static_cast<Eigen::Index>(out.covariate_names.size());
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (!std::binary_search(missing.begin(), missing.end(), r + 1)) keep.push_back(r);
  }
  out.data.X.resize(static_cast<Eigen::Index>(keep.size()), q);
  out.data.y.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto& row = table.rows[keep[k]];
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      double v = 0.0;
      if (!parse_double(row[c], v)) {
        // +1 for the header line, +1 for 1-based numbering.
        throw InvalidInput("non-numeric cell '" + row[c] + "' at " + where(keep[k] + 2, c + 1));
      }
      if (c == resp) {
        out.data.y(static_cast<Eigen::Index>(k)) = v;
      } else {
        out.data.X(static_cast<Eigen::Index>(k), j++) = v;
      }
    }
    out.source_rows.push_back(keep[k] + 1);
  }
  for (Eigen::Index j = 0; j < q; ++j) {
    if (out.data.X.rows() > 0 &&
        (out.data.X.col(j).array() == out.data.X(0, j)).all()) {
      out.constant_columns.push_back(out.covariate_names[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

LoadedData load_csv(const std::string& path, const std::string& response_column,
                    MissingPolicy policy) {
  return table_to_dataset(read_csv(path), response_column, policy);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

Eigen::VectorXd parse_numeric_row(const std::string& row) {
  std::vector<double> vals;
  std::stringstream ss(row);
  std::string cell;
  std::size_t col = 1;
  while (std::getline(ss, cell, ',')) {
    double v = 0.0;
    if (!parse_double(cell, v)) throw InvalidInput("non-numeric value '" + cell + "' at position " + std::to_string(col));
    vals.push_back(v);
    ++col;
  }
  if (vals.empty()) throw InvalidInput("empty numeric row");
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace cpred
