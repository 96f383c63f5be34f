#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "etch/formats.hpp"
#include "etch/variable.hpp"

namespace etch {

template <typename R>
struct LoadedTensor {
  std::vector<Index> dims;
  EntryList<R> entries;
};

namespace detail {

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool parse_real(const std::string& tok, double& out) {
  if (tok == "inf" || tok == "+inf" || tok == "Inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  const char* s = tok.c_str();
  char* end = nullptr;
  out = std::strtod(s, &end);
  return end != s && *end == '\0';
}

inline bool parse_index(const std::string& tok, long long& out) {
  const char* s = tok.c_str();
  char* end = nullptr;
  out = std::strtoll(s, &end, 10);
  return end != s && *end == '\0';
}

[[noreturn]] inline void file_error(ErrorKind kind, const std::string& path, size_t line,
                                    const std::string& what) {
  fail(kind, path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace detail

/// MatrixMarket coordinate reader. Accepts real, integer and pattern fields
/// with general symmetry; one-based coordinates become zero-based; duplicate
/// coordinates are summed by the semiring when the tensor is built. Pattern
/// entries read as semiring one.
template <class S>
LoadedTensor<typename S::value_type> load_matrix_market(const std::string& path) {
  using R = typename S::value_type;
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::string line;
  size_t lineno = 0;

  if (!std::getline(in, line)) detail::file_error(ErrorKind::ParseFile, path, 1, "empty file");
  ++lineno;
  std::istringstream hdr(line);
  std::string banner, object, format, field, symmetry;
  hdr >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket")
    detail::file_error(ErrorKind::ParseFile, path, lineno, "missing %%MatrixMarket banner");
  object = detail::lower(object);
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);
  if (object != "matrix")
    detail::file_error(ErrorKind::ParseFile, path, lineno, "object must be 'matrix'");
  if (format != "coordinate")
    detail::file_error(ErrorKind::ParseFile, path, lineno, "format must be 'coordinate'");
  if (field != "real" && field != "integer" && field != "pattern")
    detail::file_error(ErrorKind::ParseFile, path, lineno,
                       "field must be real, integer or pattern");
  if (symmetry != "general")
    detail::file_error(ErrorKind::ParseFile, path, lineno, "only general symmetry is supported");
  bool pattern = field == "pattern";

  long long rows = 0, cols = 0, nnz = 0;
  bool have_size = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!(ls >> a)) continue;  // blank
    if (!(ls >> b >> c)) detail::file_error(ErrorKind::ParseFile, path, lineno, "bad size line");
    if (!detail::parse_index(a, rows) || !detail::parse_index(b, cols) ||
        !detail::parse_index(c, nnz))
      detail::file_error(ErrorKind::ParseFile, path, lineno, "bad size line");
    have_size = true;
    break;
  }
  if (!have_size) detail::file_error(ErrorKind::ParseFile, path, lineno, "missing size line");

  LoadedTensor<R> t;
  t.dims = {static_cast<Index>(rows), static_cast<Index>(cols)};
  long long seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    std::string a, b, v;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) detail::file_error(ErrorKind::ParseFile, path, lineno, "truncated entry");
    long long i = 0, j = 0;
    if (!detail::parse_index(a, i) || !detail::parse_index(b, j))
      detail::file_error(ErrorKind::ParseFile, path, lineno, "bad coordinate");
    if (i < 1 || i > rows || j < 1 || j > cols)
      detail::file_error(ErrorKind::Bounds, path, lineno, "coordinate out of range");
    R val;
    if (pattern) {
      val = S::one();
    } else {
      if (!(ls >> v)) detail::file_error(ErrorKind::ParseFile, path, lineno, "missing value");
      double x;
      if (!detail::parse_real(v, x))
        detail::file_error(ErrorKind::ParseFile, path, lineno, "bad value");
      val = S::from_real(x);
    }
    t.entries.emplace_back(Coord{static_cast<Index>(i - 1), static_cast<Index>(j - 1)}, val);
    ++seen;
  }
  if (seen != nnz)
    detail::file_error(ErrorKind::ParseFile, path, lineno,
                       "entry count " + std::to_string(seen) + " does not match declared " +
                           std::to_string(nnz));
  return t;
}

/// Coordinate-list tensor reader: each line is `c1 .. cR value` with
/// one-based coordinates. Dimensions are the smallest box containing all
/// entries. `rank` is the expected coordinate count per line.
template <class S>
LoadedTensor<typename S::value_type> load_frostt(const std::string& path, int rank) {
  using R = typename S::value_type;
  if (rank < 1) fail(ErrorKind::MalformedFormat, "rank must be positive");
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  LoadedTensor<R> t;
  t.dims.assign(static_cast<size_t>(rank), 0);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line[0] == '%') continue;
    std::istringstream ls(line);
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    if (static_cast<int>(toks.size()) != rank + 1)
      detail::file_error(ErrorKind::ParseFile, path, lineno,
                         "expected " + std::to_string(rank + 1) + " fields, got " +
                             std::to_string(toks.size()));
    Coord c(static_cast<size_t>(rank));
    for (int l = 0; l < rank; ++l) {
      long long x;
      if (!detail::parse_index(toks[static_cast<size_t>(l)], x) || x < 1)
        detail::file_error(ErrorKind::ParseFile, path, lineno, "bad coordinate");
      c[static_cast<size_t>(l)] = static_cast<Index>(x - 1);
      t.dims[static_cast<size_t>(l)] = std::max(t.dims[static_cast<size_t>(l)],
                                                static_cast<Index>(x));
    }
    double x;
    if (!detail::parse_real(toks.back(), x))
      detail::file_error(ErrorKind::ParseFile, path, lineno, "bad value");
    t.entries.emplace_back(std::move(c), S::from_real(x));
  }
  return t;
}

/// Writes a variable in the coordinate-list format: one-based coordinates,
/// lexicographic order, zeros dropped. A rank-0 result is a single value
/// line.
template <class S>
void write_frostt(std::ostream& out, const SparseVariable<typename S::value_type>& var) {
  auto v = var.template normalized<S>();
  if (v.rank() == 0) {
    auto it = v.entries.find(Coord{});
    out << S::to_text(it == v.entries.end() ? S::zero() : it->second) << "\n";
    return;
  }
  for (const auto& [c, x] : v.entries) {
    for (Index i : c) out << (i + 1) << " ";
    out << S::to_text(x) << "\n";
  }
}

template <class S>
void write_frostt(const std::string& path, const SparseVariable<typename S::value_type>& var) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_frostt<S>(out, var);
  if (!out) fail(ErrorKind::Io, "write failed on '" + path + "'");
}

}  // namespace etch
