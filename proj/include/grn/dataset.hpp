#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "grn/types.hpp"

namespace grn {

/// Dense design matrix A (rows a_i) with a label/offset vector b.
struct Dataset {
  Matrix A;
  Vector b;
  std::string source;  // "libsvm:<path>" or "synthetic-uniform(<seed>)"

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }
  bool empty() const { return A.rows() == 0; }
};

/// Parse error carrying the 1-based line number of the offending record.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads the libsvm text format: `label idx:val ...`, 1-based indices, `#` comments.
/// Labels in {0,1} are remapped to {-1,+1}; any other labels are kept verbatim.
/// Without n_features the column count is the largest index seen.
Dataset load_libsvm(const std::filesystem::path& path, std::optional<Index> n_features = {});
Dataset parse_libsvm(std::istream& in, std::optional<Index> n_features = {},
                     const std::string& source = "libsvm:<stream>");

/// Writes non-zero entries with shortest round-trip decimals.
void write_libsvm(const Dataset& data, std::ostream& out);
void save_libsvm(const Dataset& data, const std::filesystem::path& path);

/// A and b with i.i.d. U[-1,1] entries; same seed gives bit-identical output.
Dataset synthetic_dataset(Index rows, Index cols, std::uint64_t seed);

/// Throws DomainError for an empty dataset (used by objective factories).
void require_nonempty(const Dataset& data, const char* what);

}  // namespace grn
