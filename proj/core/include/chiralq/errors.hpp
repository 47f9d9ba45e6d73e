#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace chiralq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: out-of-range parameters, unnormalized states, empty windows.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// E(k) = 0 where a gapped spectrum was required.
class GapClosedError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// h0 has no zero where one was expected (trivial phase).
class BisAbsentError : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class StitchError : public Error {
 public:
  StitchError(const std::string& what, std::vector<std::string> seams)
      : Error(what), seams_(std::move(seams)) {}
  const std::vector<std::string>& seams() const { return seams_; }

 private:
  std::vector<std::string> seams_;
};

// Carries the offending indices (faces for windings, samples for degrees).
class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& what, std::vector<int> items)
      : Error(what), items_(std::move(items)) {}
  const std::vector<int>& items() const { return items_; }

 private:
  std::vector<int> items_;
};

}  // namespace chiralq
