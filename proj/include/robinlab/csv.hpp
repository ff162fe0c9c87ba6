#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace robinlab {

// Minimal deterministic CSV writer: %.17g round-trips doubles exactly.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : file_(std::fopen(path.c_str(), "w")) {
    if (!file_) throw std::runtime_error("cannot open for writing: " + path);
  }
  ~CsvWriter() {
    if (file_) std::fclose(file_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void header(const std::vector<std::string>& names) {
    for (size_t i = 0; i < names.size(); ++i)
      std::fprintf(file_, "%s%s", i ? ", " : "", names[i].c_str());
    std::fprintf(file_, "\n");
  }

  void row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i)
      std::fprintf(file_, "%s%.17g", i ? ", " : "", values[i]);
    std::fprintf(file_, "\n");
  }

 private:
  std::FILE* file_;
};

}  // namespace robinlab
