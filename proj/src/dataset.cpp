#include "iar/dataset.hpp"

#include "iar/random.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

namespace iar {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool skip_line(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

double binary_label(double raw) { return raw > 0.0 ? 1.0 : 0.0; }

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

DataFormat parse_format(std::string_view name) {
  if (name == "csv") return DataFormat::csv;
  if (name == "sparse") return DataFormat::sparse;
  throw ParameterError("unknown dataset format '" + std::string(name) + "'");
}

double parse_real(std::string_view field) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError("not a number: '" + std::string(field) + "'");
  }
  return value;
}

std::string format_real(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

Dataset load_dataset(std::istream& in, const LoadOptions& options) {
  std::vector<double> labels;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  Index width = -1;

  if (options.format == DataFormat::csv) {
    if (options.label_col < 0) throw ParameterError("label column must be non-negative");
    while (std::getline(in, line)) {
      ++line_no;
      if (skip_line(line)) continue;
      const auto fields = split(line, ',');
      const auto cols = static_cast<Index>(fields.size());
      if (width < 0) width = cols;
      if (cols != width) {
        fail_at(line_no, "expected " + std::to_string(width) + " columns, found " + std::to_string(cols));
      }
      if (options.label_col >= cols) fail_at(line_no, "label column out of range");
      std::vector<double> row;
      row.reserve(fields.size() - 1);
      for (Index c = 0; c < cols; ++c) {
        double v = 0.0;
        try {
          v = parse_real(fields[static_cast<std::size_t>(c)]);
        } catch (const ParseError& e) {
          fail_at(line_no, e.what());
        }
        if (c == options.label_col) labels.push_back(binary_label(v)); else row.push_back(v);
      }
      rows.push_back(std::move(row));
    }
    width = width < 0 ? 0 : width - 1;
  } else {
    std::vector<std::vector<std::pair<Index, double>>> entries;
    Index max_index = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (skip_line(line)) continue;
      const auto tokens = split_whitespace(line);
      std::vector<std::pair<Index, double>> row;
      try {
        labels.push_back(binary_label(parse_real(tokens.at(0))));
        for (std::size_t k = 1; k < tokens.size(); ++k) {
          const auto colon = tokens[k].find(':');
          if (colon == std::string_view::npos) fail_at(line_no, "expected index:value, got '" + std::string(tokens[k]) + "'");
          const double idx = parse_real(tokens[k].substr(0, colon));
          if (idx < 1 || idx != std::floor(idx)) fail_at(line_no, "feature index must be a positive integer");
          const auto index = static_cast<Index>(idx);
          if (options.dim && index > *options.dim) {
            fail_at(line_no, "feature index " + std::to_string(index) + " exceeds dimension " + std::to_string(*options.dim));
          }
          max_index = std::max(max_index, index);
          row.emplace_back(index - 1, parse_real(tokens[k].substr(colon + 1)));
        }
      } catch (const ParseError& e) {
        if (std::string_view(e.what()).starts_with("line ")) throw;
        fail_at(line_no, e.what());
      }
      entries.push_back(std::move(row));
    }
    width = options.dim.value_or(max_index);
    rows.resize(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      rows[i].assign(static_cast<std::size_t>(width), 0.0);
      for (const auto& [j, v] : entries[i]) rows[i][static_cast<std::size_t>(j)] = v;
    }
  }

  Dataset data;
  data.features.resize(static_cast<Index>(rows.size()), width);
  data.labels.resize(static_cast<Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Index j = 0; j < width; ++j) data.features(static_cast<Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    data.labels[static_cast<Index>(i)] = labels[i];
  }
  return data;
}

Dataset load_dataset(const std::string& path, const LoadOptions& options) {
  auto in = open_input(path);
  try {
    return load_dataset(in, options);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (Index i = 0; i < data.size(); ++i) {
    out << format_real(data.labels[i]);
    for (Index j = 0; j < data.dim(); ++j) out << ',' << format_real(data.features(i, j));
    out << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  auto out = open_output(path);
  write_dataset_csv(out, data);
}

Dataset synthesize_dataset(std::uint64_t seed, Index N, Index d, double separation) {
  if (N < 1 || d < 1) throw ParameterError("synthesize_dataset: N and d must be positive");
  if (!(separation >= 0)) throw ParameterError("synthesize_dataset: separation must be non-negative");
  std::mt19937_64 engine(seed);
  Vector u(d);
  for (Index j = 0; j < d; ++j) u[j] = standard_normal(engine);
  u.normalize();

  Dataset data;
  data.features.resize(N, d);
  data.labels.resize(N);
  for (Index i = 0; i < N; ++i) {
    const auto label = static_cast<double>(uniform_index(engine, 2));
    const double sign = 2.0 * label - 1.0;
    for (Index j = 0; j < d; ++j) data.features(i, j) = sign * separation * u[j] + standard_normal(engine);
    data.labels[i] = label;
  }
  return data;
}

Dataset slice(const Dataset& data, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > data.size()) throw ContractError("slice: rows out of range");
  Dataset out;
  out.features = data.features.middleRows(begin, count);
  out.labels = data.labels.segment(begin, count);
  return out;
}

MinMaxScaler MinMaxScaler::fit(const Dataset& data) {
  if (data.size() == 0) throw ContractError("MinMaxScaler: empty dataset");
  return {data.features.colwise().minCoeff().transpose(), data.features.colwise().maxCoeff().transpose()};
}

void MinMaxScaler::apply(Dataset& data) const {
  detail::require_size(data.dim(), lo.size(), "MinMaxScaler: feature dimension");
  for (Index j = 0; j < data.dim(); ++j) {
    const double range = hi[j] - lo[j];
    if (range > 0) {
      data.features.col(j) = (data.features.col(j).array() - lo[j]) / range;
    } else {
      data.features.col(j).setZero();
    }
  }
}

void convert_odd_even(std::istream& in, std::ostream& out, Index label_col) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto fields = split(line, ',');
    if (label_col < 0 || label_col >= static_cast<Index>(fields.size())) fail_at(line_no, "label column out of range");
    double digit = 0.0;
    try {
      digit = parse_real(fields[static_cast<std::size_t>(label_col)]);
    } catch (const ParseError& e) {
      fail_at(line_no, e.what());
    }
    if (digit != std::floor(digit)) fail_at(line_no, "class label is not an integer");
    out << (static_cast<long long>(std::abs(digit)) % 2 == 1 ? '1' : '0');
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (static_cast<Index>(c) == label_col) continue;
      out << ',' << fields[c];
    }
    out << '\n';
  }
}

}  // namespace iar
