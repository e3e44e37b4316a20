#pragma once

#include <stdexcept>
#include <string>

namespace cvqec {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ResourceError : public Error {
 public:
  using Error::Error;
};

class UnphysicalOutput : public Error {
 public:
  using Error::Error;
};

class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

class OutOfModel : public Error {
 public:
  using Error::Error;
};

// Raised when a truncated-space operation would lose more norm at the
// cutoff than the library tolerates.
class TruncationLeakage : public Error {
 public:
  TruncationLeakage(const std::string& what, double leakage)
      : Error(what), leakage_(leakage) {}
  double leakage() const noexcept { return leakage_; }

 private:
  double leakage_;
};

class GridTooCoarse : public Error {
 public:
  GridTooCoarse(const std::string& what, double defect)
      : Error(what), defect_(defect) {}
  double defect() const noexcept { return defect_; }

 private:
  double defect_;
};

}  // namespace cvqec
