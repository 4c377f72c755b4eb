#include "saapde/reporting.hpp"

#include <cstdio>

#include "saapde/errors.hpp"

namespace saapde {

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw ConfigError("cannot open '" + path.string() + "' for writing");
}

std::string CsvWriter::format(const Cell& cell) {
  return std::visit(
      [](const auto& value) -> std::string {
        using T = std::decay_t<decltype(value)>;
        if constexpr (std::is_same_v<T, double>) {
          char buf[40];
          std::snprintf(buf, sizeof(buf), "%.17g", value);
          return buf;
        } else if constexpr (std::is_same_v<T, bool>) {
          return value ? "1" : "0";
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
          std::string quoted = "\"";
          for (char c : value) {
            if (c == '"') quoted += '"';
            quoted += c;
          }
          quoted += '"';
          return quoted;
        } else {
          return std::to_string(value);
        }
      },
      cell);
}

void CsvWriter::write_line(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
  if (!out_) throw ConfigError("write failure on '" + path_.string() + "'");
}

void CsvWriter::header(const std::vector<std::string>& names) {
  columns_ = names.size();
  write_line(names);
}

void CsvWriter::row(std::initializer_list<Cell> cells) {
  if (columns_ != 0 && cells.size() != columns_) {
    throw ConfigError("CSV row width mismatch on '" + path_.string() + "'");
  }
  std::vector<std::string> formatted;
  formatted.reserve(cells.size());
  for (const Cell& cell : cells) formatted.push_back(format(cell));
  write_line(formatted);
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("write failure on '" + path.string() + "'");
}

}  // namespace saapde
