#ifndef MONOGUARD_ERRORS_HPP_
#define MONOGUARD_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace monoguard {

// Wrong dimensions, out-of-box inputs, malformed configuration values.
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A NaN or infinity showed up where only finite values are allowed.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A document (network, schema, CSV, config) failed to parse or validate.
// `path()` names the offending location, e.g. "layers[1].activation".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what),
        path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace monoguard

#endif  // MONOGUARD_ERRORS_HPP_
