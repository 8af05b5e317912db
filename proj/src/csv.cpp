#include "exitctl/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace exitctl {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (const auto& c : columns) *this << c;
  end_row();
}

void CsvWriter::sep() {
  if (!fresh_row_) out_ << ',';
  fresh_row_ = false;
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::uint64_t v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  sep();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  fresh_row_ = true;
}

}  // namespace exitctl
