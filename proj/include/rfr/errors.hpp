#pragma once

#include <stdexcept>
#include <string>

namespace rfr {

struct NonFiniteValue : std::runtime_error {
  explicit NonFiniteValue(const std::string& what) : std::runtime_error(what) {}
};

struct NegativeMuStar : std::runtime_error {
  explicit NegativeMuStar(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidMoments : std::runtime_error {
  explicit InvalidMoments(const std::string& what) : std::runtime_error(what) {}
};

struct InterpolationThreshold : std::runtime_error {
  explicit InterpolationThreshold(const std::string& what) : std::runtime_error(what) {}
};

struct TieBreakAmbiguous : std::runtime_error {
  explicit TieBreakAmbiguous(const std::string& what) : std::runtime_error(what) {}
};

struct RootNotFound : std::runtime_error {
  explicit RootNotFound(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateLeadingCoefficient : std::runtime_error {
  explicit DegenerateLeadingCoefficient(const std::string& what) : std::runtime_error(what) {}
};

struct SolverDiverged : std::runtime_error {
  explicit SolverDiverged(const std::string& what) : std::runtime_error(what) {}
};

struct SolveFailed : std::runtime_error {
  explicit SolveFailed(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rfr
