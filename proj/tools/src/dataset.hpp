#pragma once

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "loglindley/distribution.hpp"

namespace loglindley::cli {

/// Malformed or out-of-domain input; messages carry "source:line:" prefixes.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rows of a `value` or `group,value` CSV file.
struct Dataset {
  bool grouped = false;
  std::vector<std::string> groups;
  std::vector<double> values;

  /// Distinct group labels in order of first appearance.
  std::vector<std::string> labels() const;
  /// Values of one group; throws InputError if the label is absent.
  Sample group(const std::string& label) const;
  Sample all() const;
};

/// Reads a CSV table, divides every value by `scale` and then checks that it
/// lies in (0, 1). Blank lines are skipped and CRLF endings accepted.
Dataset read_dataset(std::istream& in, double scale = 1.0, const std::string& source = "<input>");
Dataset load_dataset(const std::string& path, double scale = 1.0);

}  // namespace loglindley::cli
