#pragma once

namespace wk {

double unit_ball_volume(int n);
// Surface area of the unit sphere in R^n.
double sphere_area(int n);

double incomplete_beta_regularized(double a, double b, double x);

// Fraction of the unit sphere S^{n-1} with x_1 >= c.
double sphere_cap_fraction(int n, double c);
// Fraction of the unit ball B^n with x_1 >= u.
double ball_cap_fraction(int n, double u);

// Fraction of the sphere |y| = rho lying in B(x, t) where |x| = d.
double shell_fraction_in_ball(int n, double rho, double d, double t);

// |B(c, h) ∩ B(x, t)| / |B(c, h)| with |x - c| = dist.
double lens_fraction(int n, double h, double dist, double t);

}  // namespace wk
