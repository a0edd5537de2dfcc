// Eve's heterodyne-conditioned ensemble for a thermal-loss channel, evaluated
// in closed form and by quadrature.

#include <cstdio>

#include "qkdrate/cv_protocol.hpp"
#include "qkdrate/oracles/quadrature.hpp"

int main() {
  using namespace qkdrate;
  const cv::CvParams p{5.0, 0.2, 0.01};
  const auto ensemble = cv::cv_eve_ensemble(p);
  const auto closed = gaussian::gaussian_holevo(ensemble);
  const auto quad = oracles::quadrature_holevo(ensemble, 40);
  std::printf("SNR P          %.12f\n", cv::snr(p));
  std::printf("I(X;Y)         %.12f\n", cv::cv_ab_terms(p).i_xy);
  std::printf("I(Y;E)         %.12f  (entropy route %.12f, quadrature %.12f)\n", closed.information,
              gaussian::gaussian_holevo_entropy_route(ensemble), quad.information);
  std::printf("V(Y;E)         %.12f  (quadrature %.12f)\n", closed.variance, quad.variance);
  for (double n : {1e6, 1e8, 1e10}) {
    SecondOrderParams params;
    params.n = n;
    std::printf("K(n = %.0e)   %.12f\n", n, cv::cv_key_rate(p, params).total);
  }
}
