#include "hps/problem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hps {

namespace {
constexpr cplx kI{0.0, 1.0};
}

void ProblemSpec::validate() const {
  if (eta.real() == 0.0) throw std::invalid_argument("ProblemSpec: Re(eta) must be nonzero");
  if (!std::isfinite(kappa) || !std::isfinite(eta.real()) || !std::isfinite(eta.imag()))
    throw std::invalid_argument("ProblemSpec: kappa and eta must be finite");
  if (!coefficient) throw std::invalid_argument("ProblemSpec: coefficient c is required");
  if (!domain.valid()) throw std::invalid_argument("ProblemSpec: degenerate domain");
}

double gaussian_bump(double x, double y) {
  const double dx = x - 0.5, dy = y - 0.5;
  return std::exp(-8.0 * (dx * dx + dy * dy));
}

ProblemSpec manufactured_problem(double kappa, std::optional<cplx> eta, Rect domain) {
  ProblemSpec p;
  p.name = "manufactured";
  p.kappa = kappa;
  p.eta = eta.value_or(cplx(kappa, 0.0));
  p.domain = domain;
  p.coefficient = gaussian_bump;
  const double w = 2.0 * std::numbers::pi * kappa;
  auto u = [w](double x, double y) { return std::exp(kI * w * (x + y)); };
  p.exact = u;
  // -Δu = 2w²u, so s = (2w² - κ²c)u.
  p.body_load = [u, w, kappa](double x, double y) {
    return (2.0 * w * w - kappa * kappa * gaussian_bump(x, y)) * u(x, y);
  };
  const cplx e = p.eta;
  p.boundary_data = [u, w, e](double x, double y, double nx, double ny) {
    return (kI * w * (nx + ny) + kI * e) * u(x, y);
  };
  return p;
}

ProblemSpec plane_wave_problem(double kappa, double angle, std::optional<cplx> eta, Rect domain) {
  ProblemSpec p;
  p.name = "plane_wave";
  p.kappa = kappa;
  p.eta = eta.value_or(cplx(kappa, 0.0));
  p.domain = domain;
  p.coefficient = [](double, double) { return 1.0; };
  const double dx = std::cos(angle), dy = std::sin(angle);
  auto u = [kappa, dx, dy](double x, double y) { return std::exp(kI * kappa * (dx * x + dy * y)); };
  p.exact = u;
  const cplx e = p.eta;
  p.boundary_data = [u, kappa, dx, dy, e](double x, double y, double nx, double ny) {
    return kI * (kappa * (dx * nx + dy * ny) + e) * u(x, y);
  };
  return p;
}

ProblemSpec constant_problem(cplx eta, Rect domain) {
  ProblemSpec p;
  p.name = "constant";
  p.kappa = 0.0;
  p.eta = eta;
  p.domain = domain;
  p.coefficient = [](double, double) { return 0.0; };
  p.exact = [](double, double) { return cplx(1.0, 0.0); };
  p.boundary_data = [eta](double, double, double, double) { return kI * eta; };
  return p;
}

ProblemSpec zero_problem(double kappa, std::optional<cplx> eta, Rect domain) {
  ProblemSpec p;
  p.name = "zero";
  p.kappa = kappa;
  p.eta = eta.value_or(cplx(kappa == 0.0 ? 1.0 : kappa, 0.0));
  p.domain = domain;
  p.coefficient = gaussian_bump;
  p.exact = [](double, double) { return cplx(0.0, 0.0); };
  return p;
}

}  // namespace hps
