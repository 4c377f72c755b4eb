#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace saapde {

/// RFC-4180 style CSV writer: header row, quoted strings where needed,
/// doubles at 17 significant digits. Output is a pure function of the cell
/// values, so identical reports produce byte-identical files.
class CsvWriter {
 public:
  using Cell = std::variant<std::int64_t, std::uint64_t, double, bool,
                            std::string>;

  explicit CsvWriter(const std::filesystem::path& path);

  void header(const std::vector<std::string>& names);
  void row(std::initializer_list<Cell> cells);

  static std::string format(const Cell& cell);

 private:
  void write_line(const std::vector<std::string>& cells);

  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t columns_ = 0;
};

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace saapde
