#pragma once

namespace unitloc {

double log_beta(double a, double b);

// Regularized incomplete beta function I_x(a, b) for x in [0,1], a,b > 0.
// Continued-fraction evaluation (modified Lentz), relative accuracy ~1e-14.
double betainc(double x, double a, double b);

// Upper-tail probability P(T > t) for Student's t with df degrees of
// freedom. Handles +/-infinity.
double student_t_sf(double t, double df);

}  // namespace unitloc
