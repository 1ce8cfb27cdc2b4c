#pragma once

namespace nlbe {

double norm_pdf(double z);
double norm_cdf(double z);
// Upper tail P(Z > z), accurate far into the tail.
double norm_sf(double z);
// Inverse of norm_cdf on (0, 1). Wichura's PPND16 rational approximation.
double inv_norm_cdf(double p);

}  // namespace nlbe
