#pragma once

#include <stdexcept>
#include <string>

namespace mppgeo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A chart point outside the validity region of its chart.
class ChartDomainError : public Error {
 public:
  using Error::Error;
};

/// Metric evaluation that is not symmetric positive definite.
class NonSpdMetricError : public Error {
 public:
  using Error::Error;
};

/// Singular cometric, e.g. coincident landmarks.
class SingularMetricError : public Error {
 public:
  SingularMetricError(const std::string& what, int first = -1, int second = -1)
      : Error(what), first_(first), second_(second) {}
  int first() const { return first_; }
  int second() const { return second_; }

 private:
  int first_;
  int second_;
};

/// Frame matrix that is rank deficient, or a rank/weight combination that
/// leaves the cometric degenerate.
class DegenerateFrameError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Inner shooting problem of an estimator failed for one data point.
class ShootingFailure : public Error {
 public:
  ShootingFailure(const std::string& what, int index) : Error(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

/// Estimated covariance collapsed onto the rank guard.
class CovarianceCollapse : public Error {
 public:
  using Error::Error;
};

}  // namespace mppgeo
