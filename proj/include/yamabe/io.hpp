#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace yamabe {

/// Shortest text with 17 significant digits (round-trips every double).
std::string format17(double x);

/// Minimal CSV emitter; numbers are written with format17.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace yamabe
