#include "grn/dataset.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "grn/format.hpp"

namespace grn {

namespace {

struct Entry {
  Index col;
  double value;
};

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<Index> n_features, const std::string& source) {
  std::vector<double> labels;
  std::vector<std::vector<Entry>> rows;
  Index max_col = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;
    double label = 0.0;
    try {
      label = parse_double(tok);
    } catch (const std::invalid_argument&) {
      throw ParseError("libsvm: bad label '" + tok + "'", line_no);
    }
    std::vector<Entry> row;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
        throw ParseError("libsvm: malformed feature '" + tok + "'", line_no);
      }
      long long idx = 0;
      double value = 0.0;
      try {
        std::size_t used = 0;
        idx = std::stoll(tok.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("index");
        value = parse_double(std::string_view(tok).substr(colon + 1));
      } catch (const std::exception&) {
        throw ParseError("libsvm: malformed feature '" + tok + "'", line_no);
      }
      if (idx < 1) throw ParseError("libsvm: feature index must be >= 1", line_no);
      if (n_features && idx > *n_features) {
        throw ParseError("libsvm: feature index " + std::to_string(idx) + " exceeds n_features " +
                             std::to_string(*n_features),
                         line_no);
      }
      row.push_back({static_cast<Index>(idx - 1), value});
      max_col = std::max<Index>(max_col, static_cast<Index>(idx));
    }
    labels.push_back(label);
    rows.push_back(std::move(row));
  }

  const Index cols = n_features.value_or(max_col);
  Dataset data;
  data.source = source;
  data.A = Matrix::Zero(static_cast<Index>(rows.size()), cols);
  data.b = Vector::Zero(static_cast<Index>(rows.size()));
  bool zero_one = !labels.empty();
  for (double l : labels) zero_one = zero_one && (l == 0.0 || l == 1.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const Entry& e : rows[i]) data.A(static_cast<Index>(i), e.col) = e.value;
    const double l = labels[i];
    data.b[static_cast<Index>(i)] = zero_one ? (l == 0.0 ? -1.0 : 1.0) : l;
  }
  return data;
}

Dataset load_libsvm(const std::filesystem::path& path, std::optional<Index> n_features) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open libsvm file: " + path.string());
  return parse_libsvm(in, n_features, "libsvm:" + path.string());
}

void write_libsvm(const Dataset& data, std::ostream& out) {
  for (Index i = 0; i < data.rows(); ++i) {
    out << shortest(data.b[i]);
    for (Index j = 0; j < data.cols(); ++j) {
      if (data.A(i, j) != 0.0) out << ' ' << (j + 1) << ':' << shortest(data.A(i, j));
    }
    out << '\n';
  }
}

void save_libsvm(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write libsvm file: " + path.string());
  write_libsvm(data, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Dataset synthetic_dataset(Index rows, Index cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw DomainError("synthetic_dataset: rows and cols must be >= 1");
  // mt19937_64 is fully specified by the standard; the 53-bit mapping keeps
  // the output identical across standard library implementations.
  std::mt19937_64 gen(seed);
  auto uniform = [&gen] {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
  };
  Dataset data;
  data.source = "synthetic-uniform(" + std::to_string(seed) + ")";
  data.A.resize(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) data.A(i, j) = uniform();
  data.b.resize(rows);
  for (Index i = 0; i < rows; ++i) data.b[i] = uniform();
  return data;
}

void require_nonempty(const Dataset& data, const char* what) {
  if (data.empty() || data.cols() == 0) {
    throw DomainError(std::string(what) + ": dataset is empty");
  }
}

}  // namespace grn
