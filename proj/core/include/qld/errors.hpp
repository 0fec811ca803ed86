#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qld {

/// Base class for all qld runtime failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrix : Error {
  explicit SingularMatrix(const std::string& what) : Error(what) {}
};

struct NotSkew : Error {
  explicit NotSkew(const std::string& what) : Error(what) {}
};

/// det F <= 0 somewhere; carries the offending node index when known.
struct OrientationViolation : Error {
  static constexpr std::size_t no_node = std::size_t(-1);
  std::size_t node;
  explicit OrientationViolation(const std::string& what)
      : Error(what), node(no_node) {}
  OrientationViolation(const std::string& what, std::size_t n)
      : Error(what + " (node " + std::to_string(n) + ")"), node(n) {}
};

struct StabilityViolation : Error {
  explicit StabilityViolation(const std::string& what) : Error(what) {}
};

struct NonUnitNormal : Error {
  explicit NonUnitNormal(const std::string& what) : Error(what) {}
};

struct OffsetOutsideDomain : Error {
  explicit OffsetOutsideDomain(const std::string& what) : Error(what) {}
};

struct NoRealRoot : Error {
  double discriminant;
  NoRealRoot(const std::string& what, double disc)
      : Error(what), discriminant(disc) {}
};

struct SelfIntersection : Error {
  explicit SelfIntersection(const std::string& what) : Error(what) {}
};

}  // namespace qld
