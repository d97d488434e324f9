#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sgk {

inline constexpr const char* kVersion = "0.1.0";

enum class ErrKind { Validation, Numeric, IO };

// Library-wide error type. `code` carries a stable machine-readable name
// (e.g. "DegenerateKnots", "DimensionError") so callers and tests can
// dispatch without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrKind kind, std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), kind_(kind), code_(std::move(code)) {}
  ErrKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

 private:
  ErrKind kind_;
  std::string code_;
};

[[noreturn]] inline void fail_validation(const std::string& code, const std::string& msg) {
  throw Error(ErrKind::Validation, code, msg);
}
[[noreturn]] inline void fail_numeric(const std::string& code, const std::string& msg) {
  throw Error(ErrKind::Numeric, code, msg);
}
[[noreturn]] inline void fail_io(const std::string& code, const std::string& msg) {
  throw Error(ErrKind::IO, code, msg);
}

// Sorted list of 0-based feature indices.
using IndexSet = std::vector<int>;

IndexSet intersect_sets(const IndexSet& a, const IndexSet& b);
bool contains_all(const IndexSet& superset, const IndexSet& subset);

}  // namespace sgk
