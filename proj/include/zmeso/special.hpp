#pragma once

#include <complex>

namespace zmeso {

// Principal branch of log Gamma(z) for Re z > 0, continuous from the real axis.
std::complex<double> log_gamma(std::complex<double> z);

// Digamma psi(z) = Gamma'/Gamma for Re z > 0.
std::complex<double> digamma(std::complex<double> z);

// sin(pi x)/(pi x)
double sinc(double x);

}  // namespace zmeso
