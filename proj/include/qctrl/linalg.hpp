#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

namespace qctrl {

using Complex = std::complex<double>;
using Matrix4c = Eigen::Matrix4cd;
using Matrix16c = Eigen::Matrix<Complex, 16, 16>;
using Vector16c = Eigen::Matrix<Complex, 16, 1>;

namespace detail {

template <class Mat>
void pade_approximant(const Mat& a, int order, Mat& u, Mat& v) {
  const Eigen::Index n = a.rows();
  const Mat id = Mat::Identity(n, n);
  const Mat a2 = a * a;
  switch (order) {
    case 3: {
      constexpr double b[] = {120., 60., 12., 1.};
      u = a * (b[3] * a2 + b[1] * id);
      v = b[2] * a2 + b[0] * id;
      break;
    }
    case 5: {
      constexpr double b[] = {30240., 15120., 3360., 420., 30., 1.};
      const Mat a4 = a2 * a2;
      u = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
      v = b[4] * a4 + b[2] * a2 + b[0] * id;
      break;
    }
    case 7: {
      constexpr double b[] = {17297280., 8648640., 1995840., 277200.,
                              25200.,    1512.,    56.,      1.};
      const Mat a4 = a2 * a2;
      const Mat a6 = a4 * a2;
      u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
      v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
      break;
    }
    case 9: {
      constexpr double b[] = {17643225600., 8821612800., 2075673600.,
                              302702400.,   30270240.,   2162160.,
                              110880.,      3960.,       90.,
                              1.};
      const Mat a4 = a2 * a2;
      const Mat a6 = a4 * a2;
      const Mat a8 = a6 * a2;
      u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
      v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
      break;
    }
    default: {  // 13
      constexpr double b[] = {64764752532480000., 32382376266240000.,
                              7771770303897600.,  1187353796428800.,
                              129060195264000.,   10559470521600.,
                              670442572800.,      33522128640.,
                              1323241920.,        40840800.,
                              960960.,            16380.,
                              182.,               1.};
      const Mat a4 = a2 * a2;
      const Mat a6 = a4 * a2;
      Mat w = b[13] * a6 + b[11] * a4 + b[9] * a2;
      u = a * (a6 * w + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
      w = b[12] * a6 + b[10] * a4 + b[8] * a2;
      v = a6 * w + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
      break;
    }
  }
}

}  // namespace detail

/// Matrix exponential by scaling-and-squaring with Pade approximants
/// (orders and switch-over norms from Higham 2005).
template <class Mat>
Mat expm(const Mat& a) {
  const double l1norm = a.cwiseAbs().colwise().sum().maxCoeff();
  Mat u, v;
  int squarings = 0;
  if (l1norm < 1.495585217958292e-2) {
    detail::pade_approximant(a, 3, u, v);
  } else if (l1norm < 2.539398330063230e-1) {
    detail::pade_approximant(a, 5, u, v);
  } else if (l1norm < 9.504178996162932e-1) {
    detail::pade_approximant(a, 7, u, v);
  } else if (l1norm < 2.097847961257068e0) {
    detail::pade_approximant(a, 9, u, v);
  } else {
    constexpr double theta13 = 5.371920351148152;
    std::frexp(l1norm / theta13, &squarings);
    if (squarings < 0) squarings = 0;
    const Mat scaled = a * std::ldexp(1.0, -squarings);
    detail::pade_approximant(scaled, 13, u, v);
  }
  Mat numer = v + u;
  Mat denom = v - u;
  Mat result = denom.partialPivLu().solve(numer);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

/// Column-major vectorization: vec(rho) stacks the columns of rho.
inline Vector16c vectorize(const Matrix4c& rho) {
  return Eigen::Map<const Vector16c>(rho.data());
}

inline Matrix4c unvectorize(const Vector16c& v) {
  return Eigen::Map<const Matrix4c>(v.data());
}

}  // namespace qctrl
