#pragma once

// PDE data for  -Δu - κ² c u = s  in the domain,  ∂u/∂ν + iηu = t  on its boundary.

#include <functional>
#include <optional>
#include <string>

#include "hps/cmatrix.hpp"
#include "hps/geometry.hpp"

namespace hps {

using RealField = std::function<double(double x, double y)>;
using ComplexField = std::function<cplx(double x, double y)>;
/// Boundary data sampled with the outward unit normal (nx, ny) at the point.
using BoundaryField = std::function<cplx(double x, double y, double nx, double ny)>;

struct ProblemSpec {
  std::string name;
  double kappa = 0.0;
  cplx eta{1.0, 0.0};
  Rect domain;
  RealField coefficient;       // c; required
  ComplexField body_load;      // s; empty means s ≡ 0 (homogeneous fast path)
  BoundaryField boundary_data; // t; empty means t ≡ 0
  ComplexField exact;          // optional reference solution

  bool homogeneous() const noexcept { return !body_load; }
  /// Throws std::invalid_argument when Re(η) = 0, the coefficient is missing
  /// or the domain is degenerate.
  void validate() const;
};

/// κ = 16 style manufactured problem: u = exp(i2πκx)exp(i2πκy),
/// c = exp(-8[(x-0.5)² + (y-0.5)²]), s and t in closed form. η defaults to κ.
ProblemSpec manufactured_problem(double kappa, std::optional<cplx> eta = std::nullopt, Rect domain = {});

/// c ≡ 1, s ≡ 0, u = exp(iκ(x cos θ + y sin θ)).
ProblemSpec plane_wave_problem(double kappa, double angle, std::optional<cplx> eta = std::nullopt, Rect domain = {});

/// κ = 0, u ≡ 1, s ≡ 0, t = iη.
ProblemSpec constant_problem(cplx eta, Rect domain = {});

/// s ≡ 0, t ≡ 0 with the Gaussian coefficient; exact solution 0.
ProblemSpec zero_problem(double kappa, std::optional<cplx> eta = std::nullopt, Rect domain = {});

/// Gaussian bump coefficient used by the manufactured problem.
double gaussian_bump(double x, double y);

}  // namespace hps
