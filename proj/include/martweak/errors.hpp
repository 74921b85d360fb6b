#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace martweak {

/// Point outside the domain of a closed form or construction.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A dyadic path or tree would exceed the configured depth cap.
class DepthCapError : public std::length_error {
 public:
  DepthCapError(std::size_t depth, std::size_t cap)
      : std::length_error("depth " + std::to_string(depth) + " exceeds depth cap " +
                          std::to_string(cap)),
        depth_(depth),
        cap_(cap) {}

  std::size_t depth() const noexcept { return depth_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t depth_;
  std::size_t cap_;
};

/// A pair (or a glue of pairs) violates |(phi,h_I)| = |(psi,h_I)|.
class AdmissibilityError : public std::invalid_argument {
 public:
  AdmissibilityError(const std::string& what, double residual)
      : std::invalid_argument(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Enumeration or search would exceed its combinatorial budget.
class BudgetError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace martweak
