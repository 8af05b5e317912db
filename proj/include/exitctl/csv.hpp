#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace exitctl {

// 17 significant digits: round-trips every double.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  void header(const std::vector<std::string>& columns);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(std::uint64_t v);
  CsvWriter& operator<<(const std::string& v);
  void end_row();

 private:
  void sep();
  std::ofstream out_;
  bool fresh_row_ = true;
};

}  // namespace exitctl
