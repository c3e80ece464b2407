#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nfp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Merged chains induce a directed cycle over NF types.
class CycleDetected : public Error {
 public:
  using Error::Error;
};

/// A node of the instance graph has no server assignment.
class UnassignedNode : public Error {
 public:
  explicit UnassignedNode(std::size_t node)
      : Error("NFI " + std::to_string(node) + " has no server assignment"), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// No placement satisfies the capacity, bandwidth and port constraints.
class Infeasible : public Error {
 public:
  using Error::Error;
};

/// RD requested for a node against the server it already occupies.
class SameServer : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration refused because the instance exceeds the node limit.
class TooLarge : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed instance or placement file.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class VersionMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace nfp
