#ifndef DYNPRIV_ERRORS_HPP
#define DYNPRIV_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace dynpriv {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction input (graph edges, mask parameters, system specs).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Dense solve or null-space computation hit a singular / non-unique system.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration could not be parsed or is inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Integration produced a non-finite or exploding state.
class NumericalBlowUp : public Error {
 public:
  NumericalBlowUp(const std::string& what, double t_last, std::vector<double> x_last)
      : Error(what), t_last_(t_last), x_last_(std::move(x_last)) {}

  /// Time and state of the last finite sample before the blow-up.
  double last_time() const { return t_last_; }
  const std::vector<double>& last_state() const { return x_last_; }

 private:
  double t_last_;
  std::vector<double> x_last_;
};

}  // namespace dynpriv

#endif  // DYNPRIV_ERRORS_HPP
