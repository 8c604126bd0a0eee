#pragma once

#include <stdexcept>
#include <string>

namespace apm {

/// Thrown when a function is evaluated outside its mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The leader has no price in [c, p_max] at which anyone buys.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace apm
