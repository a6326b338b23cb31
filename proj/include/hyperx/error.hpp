#pragma once

#include <stdexcept>
#include <string>

namespace hyperx {

enum class ErrorKind {
  duplicate_node,
  node_out_of_range,
  empty_hyperedge,
  row_count_mismatch,
  non_numeric,
  label_out_of_range,
  malformed_header,
  malformed_line,
  shape_mismatch,
  invalid_argument,
  io,
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::duplicate_node: return "duplicate-node";
    case ErrorKind::node_out_of_range: return "node-out-of-range";
    case ErrorKind::empty_hyperedge: return "empty-hyperedge";
    case ErrorKind::row_count_mismatch: return "row-count-mismatch";
    case ErrorKind::non_numeric: return "non-numeric";
    case ErrorKind::label_out_of_range: return "label-out-of-range";
    case ErrorKind::malformed_header: return "malformed-header";
    case ErrorKind::malformed_line: return "malformed-line";
    case ErrorKind::shape_mismatch: return "shape-mismatch";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hyperx
