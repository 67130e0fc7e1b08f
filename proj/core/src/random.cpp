#include "evopagator/random.hpp"

namespace evo {

CVector Rng::complex_vector(Eigen::Index n) {
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = uniform(-1.0, 1.0);
    const double im = uniform(-1.0, 1.0);
    v[i] = cplx(re, im);
  }
  return v;
}

CMatrix Rng::hermitian(Eigen::Index n) {
  CMatrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = uniform(-1.0, 1.0);
      const double im = uniform(-1.0, 1.0);
      m(i, j) = cplx(re, im);
    }
  }
  return 0.5 * (m + m.adjoint());
}

}  // namespace evo
