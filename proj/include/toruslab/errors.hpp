#pragma once

#include <stdexcept>
#include <string>

namespace toruslab {

// Base for everything thrown by the library.  The CLI maps any Error to
// exit code 2 (usage / bad input) unless a more specific handler applies.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// eps outside (0, 1/2].
struct BadEpsilon : Error {
  using Error::Error;
};

// |Q0| * (1 + d*(1-eps)) > 1: the configuration cannot fit in total mass 1.
struct InfeasibleMeasure : Error {
  using Error::Error;
};

// Two step functions (or a function and an operator) built over different
// atom spaces.
struct SpaceMismatch : Error {
  using Error::Error;
};

// Requested level index m < 1, or a level override with too few coordinates.
struct BadExponent : Error {
  using Error::Error;
};

// Unknown branch tag passed to simplified_rq.
struct BranchUnknown : Error {
  using Error::Error;
};

// family_analysis over an empty pair list.
struct EmptyFamily : Error {
  using Error::Error;
};

// Rational division by zero / zero denominator.
struct DivisionByZero : Error {
  using Error::Error;
};

// empirical_norm_search with budget 0 and witness starts disabled: there is
// nothing to return.
struct BudgetZero : Error {
  using Error::Error;
};

// Oracle grid would exceed the cell cap.
struct ResolutionOverflow : Error {
  using Error::Error;
};

// Rectangle endpoints not representable on the oracle grid.
struct NonAlignable : Error {
  using Error::Error;
};

// Malformed textual input ("a/b" rationals, JSON configs).
struct ParseError : Error {
  using Error::Error;
};

}  // namespace toruslab
