#pragma once

#include <stdexcept>
#include <string>

namespace etch {

enum class ErrorKind {
  Syntax,           // expression text does not parse
  UnboundVariable,  // expression names a tensor with no binding
  MissingIndex,     // sum() over an index absent from the body
  RankMismatch,     // binding arity disagrees with tensor rank
  DuplicateIndex,   // one occurrence repeats an index name
  OrderMismatch,    // occurrence indices not increasing in the global order
  ShapeMismatch,    // operands carry incompatible index sets
  IndexPresent,     // replicate over an index the operand already has
  PrefixMismatch,   // map prefix is not a prefix of the stream's indices
  Unsupported,      // expression outside what this backend can lower
  MalformedFormat,  // tensor fails structural validation
  ParseFile,        // tensor file does not parse
  Bounds,           // file entry outside declared dimensions
  Budget,           // state budget exhausted
  RuntimeFault,     // interpreter caught an out-of-contract access
  Io,               // file unreadable / unwritable
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  /// True for faults in the expression or its sorts, as opposed to file I/O.
  bool is_language_error() const {
    switch (kind_) {
      case ErrorKind::Io:
      case ErrorKind::ParseFile:
      case ErrorKind::Bounds:
      case ErrorKind::MalformedFormat:
        return false;
      default:
        return true;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Syntax: return "Syntax";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::MissingIndex: return "MissingIndex";
    case ErrorKind::RankMismatch: return "RankMismatch";
    case ErrorKind::DuplicateIndex: return "DuplicateIndex";
    case ErrorKind::OrderMismatch: return "OrderMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::IndexPresent: return "IndexPresent";
    case ErrorKind::PrefixMismatch: return "PrefixMismatch";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::MalformedFormat: return "MalformedFormat";
    case ErrorKind::ParseFile: return "ParseFile";
    case ErrorKind::Bounds: return "Bounds";
    case ErrorKind::Budget: return "Budget";
    case ErrorKind::RuntimeFault: return "RuntimeFault";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace etch
