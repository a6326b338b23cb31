#pragma once

// Plain-text hypergraph format:
//   <prefix>.hg      line 1 "N M b C", then M lines "e<k>: v1 v2 ... vj"
//   <prefix>.feat    N lines of b whitespace-separated reals
//   <prefix>.labels  N lines, one integer class in [0, C)
// Graph outputs are TSV "u<TAB>v<TAB>w" with u < v and w at 17 significant digits.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hyperx/error.hpp"
#include "hyperx/hypergraph.hpp"

namespace hyperx::io {

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
T parse_number(std::string_view token, ErrorKind kind, const std::string& where) {
  T value{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last)
    throw Error(kind, "cannot parse '" + std::string(token) + "' at " + where);
  return value;
}

inline bool blank(std::string_view line) { return split_ws(line).empty(); }

}  // namespace detail

/// Shortest decimal form at 17 significant digits; round-trips every double.
inline std::string format_real(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

inline Hypergraph parse_hypergraph(std::istream& hyperedges, std::istream& features,
                                   std::istream& labels) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](std::istream& in) -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!detail::blank(line)) return true;
    }
    return false;
  };

  if (!next_line(hyperedges)) throw Error(ErrorKind::malformed_header, "empty .hg stream");
  auto header = detail::split_ws(line);
  if (header.size() != 4) throw Error(ErrorKind::malformed_header, "expected 'N M b C'");
  const auto n = detail::parse_number<std::size_t>(header[0], ErrorKind::malformed_header, "N");
  const auto m = detail::parse_number<std::size_t>(header[1], ErrorKind::malformed_header, "M");
  const auto b = detail::parse_number<std::size_t>(header[2], ErrorKind::malformed_header, "b");
  const auto c = detail::parse_number<int>(header[3], ErrorKind::malformed_header, "C");

  std::vector<std::vector<NodeId>> edges;
  edges.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (!next_line(hyperedges))
      throw Error(ErrorKind::row_count_mismatch,
                  "expected " + std::to_string(m) + " hyperedges, got " + std::to_string(k));
    const std::string where = ".hg line " + std::to_string(line_no);
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw Error(ErrorKind::malformed_line, "missing ':' at " + where);
    auto id = detail::split_ws(std::string_view(line).substr(0, colon));
    if (id.size() != 1 || id[0].size() < 2 || id[0][0] != 'e')
      throw Error(ErrorKind::malformed_line, "expected 'e<k>:' at " + where);
    const auto idx = detail::parse_number<std::size_t>(id[0].substr(1), ErrorKind::malformed_line, where);
    if (idx != k)
      throw Error(ErrorKind::malformed_line,
                  "hyperedge id e" + std::to_string(idx) + " out of sequence at " + where);
    std::vector<NodeId> members;
    for (auto tok : detail::split_ws(std::string_view(line).substr(colon + 1)))
      members.push_back(detail::parse_number<NodeId>(tok, ErrorKind::non_numeric, where));
    edges.push_back(std::move(members));
  }
  if (next_line(hyperedges))
    throw Error(ErrorKind::row_count_mismatch, "more than M=" + std::to_string(m) + " hyperedges");

  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(b));
  line_no = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (b == 0) break;
    if (!next_line(features))
      throw Error(ErrorKind::row_count_mismatch,
                  "feature rows " + std::to_string(i) + " != N=" + std::to_string(n));
    const std::string where = ".feat line " + std::to_string(line_no);
    auto toks = detail::split_ws(line);
    if (toks.size() != b)
      throw Error(ErrorKind::row_count_mismatch,
                  std::to_string(toks.size()) + " columns != b=" + std::to_string(b) + " at " + where);
    for (std::size_t d = 0; d < b; ++d)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          detail::parse_number<double>(toks[d], ErrorKind::non_numeric, where);
  }
  if (next_line(features))
    throw Error(ErrorKind::row_count_mismatch, "more than N=" + std::to_string(n) + " feature rows");

  std::vector<int> y;
  y.reserve(n);
  line_no = 0;
  while (next_line(labels)) {
    auto toks = detail::split_ws(line);
    const std::string where = ".labels line " + std::to_string(line_no);
    if (toks.size() != 1) throw Error(ErrorKind::malformed_line, "one label per line at " + where);
    y.push_back(detail::parse_number<int>(toks[0], ErrorKind::non_numeric, where));
  }

  return Hypergraph(n, std::move(edges), std::move(x), std::move(y), c);
}

inline void write_hyperedges(std::ostream& out, const Hypergraph& h) {
  out << h.num_nodes() << ' ' << h.num_hyperedges() << ' ' << h.feature_dim() << ' '
      << h.num_classes() << '\n';
  for (std::size_t k = 0; k < h.num_hyperedges(); ++k) {
    out << 'e' << k << ':';
    for (NodeId v : h.hyperedge(k)) out << ' ' << v;
    out << '\n';
  }
}

inline void write_features(std::ostream& out, const Matrix& x) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index d = 0; d < x.cols(); ++d) {
      if (d) out << ' ';
      out << format_real(x(i, d));
    }
    out << '\n';
  }
}

inline void write_labels(std::ostream& out, const std::vector<int>& y) {
  for (int label : y) out << label << '\n';
}

inline void write_edge_list(std::ostream& out, const WeightedGraph& g) {
  for (const auto& e : g.edges()) out << e.u << '\t' << e.v << '\t' << format_real(e.w) << '\n';
}

/// Writes to a sibling temp file and renames over the target, so readers
/// never observe a partially written file.
inline void write_atomic(const std::filesystem::path& path,
                         const std::function<void(std::ostream&)>& body) {
  namespace fs = std::filesystem;
  if (path.has_parent_path() && !fs::exists(path.parent_path()))
    throw Error(ErrorKind::io, "directory does not exist: " + path.parent_path().string());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + tmp.string());
    body(out);
    out.flush();
    if (!out) throw Error(ErrorKind::io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "rename to " + path.string() + ": " + ec.message());
}

inline Hypergraph load_hypergraph(const std::string& prefix) {
  std::ifstream hg(prefix + ".hg"), feat(prefix + ".feat"), lab(prefix + ".labels");
  if (!hg) throw Error(ErrorKind::io, "cannot open " + prefix + ".hg");
  if (!feat) throw Error(ErrorKind::io, "cannot open " + prefix + ".feat");
  if (!lab) throw Error(ErrorKind::io, "cannot open " + prefix + ".labels");
  return parse_hypergraph(hg, feat, lab);
}

inline void save_hypergraph(const std::string& prefix, const Hypergraph& h) {
  write_atomic(prefix + ".hg", [&](std::ostream& o) { write_hyperedges(o, h); });
  write_atomic(prefix + ".feat", [&](std::ostream& o) { write_features(o, h.features()); });
  write_atomic(prefix + ".labels", [&](std::ostream& o) { write_labels(o, h.labels()); });
}

}  // namespace hyperx::io
