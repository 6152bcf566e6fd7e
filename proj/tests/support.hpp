#pragma once

// Small builders shared by the test binaries.

#include "fraclab/domain.hpp"
#include "fraclab/operator.hpp"
#include "fraclab/problem.hpp"

namespace fraclab::testing {

inline DomainSpec interval(int resolution) { return {DomainKind::interval, 1, std::nullopt, resolution}; }
inline DomainSpec disk(int resolution) { return {DomainKind::disk, 2, std::nullopt, resolution}; }
inline DomainSpec half_space(double radius, int resolution) {
  return {DomainKind::half_space, 2, radius, resolution};
}

inline ProblemSpec problem(const DomainSpec& domain, double s, double p,
                           NonlinearitySpec f = NonlinearitySpec::zero(), WeightMode weight = WeightMode::x1) {
  ProblemSpec out;
  out.s = s;
  out.p = p;
  out.f = f;
  out.domain = domain;
  out.weight = weight;
  return out;
}

struct Lab {
  GridPtr<double> grid;
  NonlocalOperator<double> op;
};

inline Lab lab(const DomainSpec& domain, double s) {
  auto grid = build_grid<double>(domain);
  auto op = assemble_operator<double>(grid, s);
  return {grid, std::move(op)};
}

}  // namespace fraclab::testing
