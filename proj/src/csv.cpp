#include "kpa/csv.hpp"

#include <fstream>
#include <sstream>

#include "kpa/error.hpp"

namespace kpa::csv {

Table::Table(std::string source, std::vector<std::string> header, std::vector<Record> records,
             std::vector<std::string> comments)
    : source_(std::move(source)),
      header_(std::move(header)),
      records_(std::move(records)),
      comments_(std::move(comments)) {}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
  if (auto idx = find_column(name)) return *idx;
  throw DataError(source_ + ": missing column '" + std::string(name) + "'");
}

Table parse(std::string_view content, std::string source) {
  std::vector<std::string> comments;
  std::vector<Record> rows;
  std::size_t pos = 0;
  std::size_t line = 1;

  if (content.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;

  // leading comment lines
  while (pos < content.size() && content[pos] == '#') {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view c = content.substr(pos, eol - pos);
    if (!c.empty() && c.back() == '\r') c.remove_suffix(1);
    comments.emplace_back(c);
    pos = eol + 1;
    ++line;
  }

  while (pos < content.size()) {
    Record rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool done = false;
    while (!done) {
      if (pos >= content.size()) {
        if (in_quotes) throw DataError(source + ": row " + std::to_string(rec.line) + ": unterminated quoted field");
        rec.fields.push_back(std::move(field));
        done = true;
        break;
      }
      const char c = content[pos];
      if (in_quotes) {
        if (c == '"') {
          if (pos + 1 < content.size() && content[pos + 1] == '"') {
            field.push_back('"');
            pos += 2;
          } else {
            in_quotes = false;
            ++pos;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++pos;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (!field.empty() || field_was_quoted) {
            throw DataError(source + ": row " + std::to_string(line) + ": stray quote inside unquoted field");
          }
          in_quotes = true;
          field_was_quoted = true;
          ++pos;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          field_was_quoted = false;
          ++pos;
          break;
        case '\r':
          ++pos;
          break;
        case '\n':
          rec.fields.push_back(std::move(field));
          ++pos;
          ++line;
          done = true;
          break;
        default:
          if (field_was_quoted) {
            throw DataError(source + ": row " + std::to_string(line) + ": text after closing quote");
          }
          field.push_back(c);
          ++pos;
      }
    }
    const bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) rows.push_back(std::move(rec));
  }

  if (rows.empty()) throw DataError(source + ": missing header row");
  std::vector<std::string> header = std::move(rows.front().fields);
  rows.erase(rows.begin());
  for (const auto& r : rows) {
    if (r.fields.size() != header.size()) {
      throw DataError(source + ": row " + std::to_string(r.line) + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(r.fields.size()));
    }
  }
  return Table(std::move(source), std::move(header), std::move(rows), std::move(comments));
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string escape(std::string_view field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' ' || field.front() == '#'));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace kpa::csv
