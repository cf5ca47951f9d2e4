// CSV output with a versioned schema comment and a header row naming every
// column. Number formatting is fixed so identical runs produce identical
// bytes.
#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace eggroll::harness {

std::string fmt_double(double v);       // shortest round-trip ("%.17g")
std::string fmt_int(std::int64_t v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns,
            int schema_version = 1);

  void row(const std::vector<std::string>& cells);
  void comment(const std::string& text);  // "# ..." footer lines

 private:
  std::ofstream out_;
  std::size_t n_columns_;
};

}  // namespace eggroll::harness
