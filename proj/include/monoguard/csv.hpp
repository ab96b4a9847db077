#ifndef MONOGUARD_CSV_HPP_
#define MONOGUARD_CSV_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace monoguard {

using CsvRow = std::vector<std::string>;

// RFC 4180: comma separated, fields optionally wrapped in double quotes,
// "" inside quotes is a literal quote, quoted fields may span lines. Accepts
// LF or CRLF line ends. Throws ParseError("line N", ...) on an unterminated
// quote or stray characters after a closing quote.
std::vector<CsvRow> ParseCsv(std::string_view text);
std::vector<CsvRow> ReadCsvFile(const std::filesystem::path& path);

// Shortest decimal form that reads back to the same double.
std::string FormatNumber(double value);

// Quotes the field when it contains a comma, quote or line break.
std::string CsvField(std::string_view field);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void Row(const CsvRow& fields);

 private:
  std::ostream& out_;
};

}  // namespace monoguard

#endif  // MONOGUARD_CSV_HPP_
