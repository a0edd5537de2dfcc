// Six-state and BB84 key rates at Q = 0.05 for growing blocklength.

#include <cmath>
#include <cstdio>

#include "qkdrate/dv_protocols.hpp"

int main() {
  using namespace qkdrate;
  const double Q = 0.05;
  SecondOrderParams params;
  params.n = INFINITY;
  std::printf("asymptote: six-state %.9f  bb84 %.9f\n", dv::six_state_rate(Q, params).total,
              dv::bb84_rate(Q, params).total);
  std::printf("%12s %14s %14s\n", "n", "six-state", "bb84");
  for (double n = 1e4; n <= 1e12; n *= 10.0) {
    params.n = n;
    std::printf("%12.0e %14.9f %14.9f\n", n, dv::six_state_rate(Q, params).total, dv::bb84_rate(Q, params).total);
  }
}
