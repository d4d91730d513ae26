#ifndef MAPLESS_ERRORS_HPP
#define MAPLESS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mapless {

/// Malformed input text (map files, config files). Carries the 1-based line.
class format_error : public std::runtime_error {
public:
  format_error(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

/// A value parsed fine but breaks a domain invariant.
class validation_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Out-of-range configuration or generator parameter.
class parameter_error : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Operation requested in a state where it is undefined (pose outside the map, ...).
class state_error : public std::logic_error {
  using std::logic_error::logic_error;
};

/// Grid index outside the agent ground.
class bounds_error : public std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Caller broke a documented precondition (stepping a finished episode, wrong tensor shape).
class contract_error : public std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace mapless

#endif  // MAPLESS_ERRORS_HPP
