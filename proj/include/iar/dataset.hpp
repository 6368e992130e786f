#pragma once

#include "iar/problems.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace iar {

enum class DataFormat { csv, sparse };

DataFormat parse_format(std::string_view name);

/// Malformed input; the message carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadOptions {
  DataFormat format = DataFormat::csv;
  Index label_col = 0;            // csv: column holding the label
  std::optional<Index> dim;       // sparse: feature count; inferred when absent
};

/// Reads a dataset; labels <= 0 map to 0 and labels > 0 map to 1.
///
/// csv: one sample per line, comma separated, label in `label_col`.
/// sparse: "label idx:value idx:value ...", indices 1-based.
/// Blank lines and lines starting with '#' are skipped.
Dataset load_dataset(std::istream& in, const LoadOptions& options);
Dataset load_dataset(const std::string& path, const LoadOptions& options);

/// Label first, then features, shortest round-trip representation.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Two unit-variance Gaussian blobs centred at +/- separation * u for a random
/// unit vector u; each label is a fair coin and picks the blob.
Dataset synthesize_dataset(std::uint64_t seed, Index N, Index d, double separation);

/// Rows [begin, begin + count) of a dataset.
Dataset slice(const Dataset& data, Index begin, Index count);

/// Per-column min-max map to [0, 1] fitted on a training set.
struct MinMaxScaler {
  Vector lo;
  Vector hi;

  static MinMaxScaler fit(const Dataset& data);
  /// Constant columns map to 0.
  void apply(Dataset& data) const;
};

/// Reads a csv of integer class labels and writes odd -> 1, even -> 0.
void convert_odd_even(std::istream& in, std::ostream& out, Index label_col);

/// Shortest decimal string that parses back to the same double.
std::string format_real(double value);

/// Parses a full field as a double; throws ParseError otherwise.
double parse_real(std::string_view field);

}  // namespace iar
