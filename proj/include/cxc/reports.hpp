#pragma once

#include "cxc/combmod.hpp"
#include "cxc/gamma.hpp"
#include "cxc/homnorm.hpp"
#include "cxc/json_io.hpp"

#include <string>

namespace cxc {

/// Report builders shared by the C API and the CLI. Every report carries
/// schema "v1" and a "kind" field.

Json build_report(const GammaGraph& g);
/// Two columns n,size.
std::string sphere_csv(const GammaGraph& g);

Json hyperbolicity_report(const GammaGraph& g, const std::string& mode, uint64_t seed, uint64_t samples,
                          uint64_t vertex_cap);
Json measure_report(const GammaGraph& g, double epsilon, double tol);
/// xi given by label; empty picks the first vertex of S(1). periodic_n = 0 skips the periodic measure.
Json equidistribute_report(const GammaGraph& g, const std::string& xi, int n_lo, int n_hi, int periodic_n,
                           int shadow_level);
Json axioms_report(const GammaGraph& g, double epsilon);

/// family: "t", "s" or "both".
Json modulus_report(const AnnulusProblem& p, const std::string& family, double tol);
/// annulus: "band" (square rule) or "vertex" (ring around the branch vertex).
Json scan_report(const SystemSpec& spec, const std::string& annulus, int base_level, int n1, int n2, double tol);

}  // namespace cxc
