#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace loglindley::cli {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& field, const std::string& where) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw InputError(where + "not a number: '" + field + "'");
  }
  return v;
}

}  // namespace

std::vector<std::string> Dataset::labels() const {
  std::vector<std::string> out;
  for (const auto& g : groups)
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
  return out;
}

Sample Dataset::group(const std::string& label) const {
  std::vector<double> v;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (groups[i] == label) v.push_back(values[i]);
  if (v.empty()) throw InputError("no rows with group label '" + label + "'");
  return Sample(std::move(v));
}

Sample Dataset::all() const { return Sample(values); }

Dataset read_dataset(std::istream& in, double scale, const std::string& source) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("--scale must be a positive number");

  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    const auto fields = split(line);

    if (!have_header) {
      if (fields.size() == 1 && lower(fields[0]) == "value") {
        ds.grouped = false;
      } else if (fields.size() == 2 && lower(fields[0]) == "group" && lower(fields[1]) == "value") {
        ds.grouped = true;
      } else {
        throw InputError(where + "expected header 'value' or 'group,value'");
      }
      have_header = true;
      continue;
    }

    const std::size_t want = ds.grouped ? 2 : 1;
    if (fields.size() != want) {
      throw InputError(where + "expected " + std::to_string(want) + " field(s), found " +
                       std::to_string(fields.size()));
    }
    const double v = parse_number(fields.back(), where) / scale;
    if (!(v > 0.0 && v < 1.0)) {
      throw InputError(where + "value " + fields.back() + " is outside (0, 1) after scaling");
    }
    if (ds.grouped) {
      if (fields[0].empty()) throw InputError(where + "empty group label");
      ds.groups.push_back(fields[0]);
    } else {
      ds.groups.emplace_back();
    }
    ds.values.push_back(v);
  }
  if (!have_header) throw InputError(source + ": empty input");
  if (ds.values.empty()) throw InputError(source + ": no data rows");
  return ds;
}

Dataset load_dataset(const std::string& path, double scale) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  return read_dataset(in, scale, path);
}

}  // namespace loglindley::cli
