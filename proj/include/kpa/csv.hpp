#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace kpa::csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 table with a header row. Lines starting with '#' before the
/// header are treated as comments and collected separately.
class Table {
 public:
  Table(std::string source, std::vector<std::string> header, std::vector<Record> records,
        std::vector<std::string> comments);

  const std::string& source() const { return source_; }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<Record>& records() const { return records_; }
  const std::vector<std::string>& comments() const { return comments_; }

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Throws DataError naming the source if the column is absent.
  std::size_t column(std::string_view name) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<Record> records_;
  std::vector<std::string> comments_;
};

Table parse(std::string_view content, std::string source);
Table read(const std::filesystem::path& path);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace kpa::csv
