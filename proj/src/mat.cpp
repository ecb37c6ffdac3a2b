#include "cartan/mat.hpp"

namespace cartan {

Mat<double> mat_exp_general(const Mat<double>& X, double tol) {
  double nx = X.norm();
  int s = 0;
  while (nx / std::ldexp(1.0, s) > 0.5) ++s;
  Mat<double> A = X.scaled(std::ldexp(1.0, -s));
  Mat<double> I = Mat<double>::identity(X.n, X.ring);
  Mat<double> S = I, P = I;
  for (int j = 1; j <= 30; ++j) {
    P = (P * A).scaled(1.0 / j);
    S += P;
    if (P.norm() < 1e-18) break;
  }
  for (int k = 0; k < s; ++k) S = S * S;

  // residual check uses the same routine on -X without recursion
  Mat<double> Ai = X.scaled(-std::ldexp(1.0, -s));
  Mat<double> Si = I, Pi = I;
  for (int j = 1; j <= 30; ++j) {
    Pi = (Pi * Ai).scaled(1.0 / j);
    Si += Pi;
    if (Pi.norm() < 1e-18) break;
  }
  for (int k = 0; k < s; ++k) Si = Si * Si;
  double res = (S * Si - I).norm();
  if (!(res < tol * std::max(1.0, S.norm() * Si.norm()))) throw Error("NonConvergence", "exp residual " + std::to_string(res));
  return S;
}

}  // namespace cartan
