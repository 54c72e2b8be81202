// Minimal programmatic use of the library: solve the square-load benchmark on
// its initial mesh, print the estimator value and the center deflection.

#include <cstdio>

#include "platefem/assembly.hpp"
#include "platefem/builtin.hpp"
#include "platefem/estimator.hpp"
#include "platefem/oracle.hpp"

int main() {
  using namespace platefem;
  const CaseSetup setup = make_builtin(BuiltinCase::square);
  const PlateProblem problem = setup.problem();
  const Solution sol = solve(problem);
  const EstimatorReport rep = global_estimate(sol, problem);

  const double center = sol.field.value({0.5, 0.5});
  const double exact = navier_deflection(*setup.navier, 0.5, 0.5, 400).value;
  std::printf("ndofs        %ld\n", mesh_statistics(*problem.mesh).N);
  std::printf("eta          %.6g\n", rep.eta);
  std::printf("u_h(1/2,1/2) %.8f\n", center);
  std::printf("u(1/2,1/2)   %.8f (series)\n", exact);
  return 0;
}
