#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "rfr/asymptotics.hpp"
#include "rfr/moments.hpp"
#include "rfr/optimizer.hpp"

namespace rfr {

/// Fixed 17-significant-digit formatting; reruns must be byte-identical.
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Same formatting for CSV cells (no quoting of non-finite values).
inline std::string csv17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string moments_json(const Moments& m, const FunctionalNorms& n) {
  std::ostringstream os;
  os << "{\"mu0\": " << fmt17(m.mu0) << ", \"mu1\": " << fmt17(m.mu1)
     << ", \"mu2\": " << fmt17(m.mu2) << ", \"mu_star_sq\": " << fmt17(m.mu_star_sq)
     << ", \"zeta_sq\": " << fmt17(m.zeta_sq) << ", \"norm1\": " << fmt17(n.norm1)
     << ", \"norm2\": " << fmt17(n.norm2) << "}";
  return os.str();
}

inline std::string optimum_json(const Optimum& o) {
  std::ostringstream os;
  os << "{\"regime\": \"" << regime_name(o.regime) << "\""
     << ", \"x_opt\": " << fmt17(o.x_opt) << ", \"branch\": \"" << o.branch << "\""
     << ", \"mu0\": " << fmt17(o.canonical_moments.mu0)
     << ", \"mu1\": " << fmt17(o.canonical_moments.mu1)
     << ", \"mu_star\": " << fmt17(std::sqrt(o.canonical_moments.mu_star_sq))
     << ", \"objective\": " << fmt17(o.objective)
     << ", \"is_linear\": " << (o.is_linear ? "true" : "false") << "}";
  return os.str();
}

}  // namespace rfr
