#ifndef NSVAR_CATALOG_HPP
#define NSVAR_CATALOG_HPP

#include <json.hpp>

#include <string>
#include <vector>

#include "nsvar/expr.hpp"
#include "nsvar/integrand.hpp"
#include "nsvar/sets.hpp"

namespace nsvar {

using json = nlohmann::ordered_json;

// Built-in integrand family. Every constructor fills in the analytic
// conjugate, subdifferential and Lipschitz modulus where a closed form
// exists, so the numeric paths always have an independent reference.

// f_t(x) = 1/2 sum_i w_i (x_i - c_i(t))^2 + d(t)
IntegrandOracle make_quadratic(std::vector<Expr> center, std::vector<double> weights, Expr offset);
// f_t(x) = <a(t), x> + b(t)
IntegrandOracle make_affine(std::vector<Expr> a, Expr b);
// f_t(x) = |x_j - c(t)|
IntegrandOracle make_abs(int dim, int coord, Expr center);
// f_t(x) = ||x||
IntegrandOracle make_norm(int dim);
// f_t(x) = -||x|| (Lipschitz, nonconvex)
IntegrandOracle make_neg_norm(int dim);
// f_t(x) = ||x||^p / p, p > 1
IntegrandOracle make_norm_power(int dim, double p);
// f_t = indicator of C(t)
IntegrandOracle make_indicator(MovingSet C);
// f_t(x) = sigma_{[lo(t), hi(t)]}(x) = max(lo(t) x, hi(t) x), 1D
IntegrandOracle make_support_interval(Expr lo, Expr hi);
// f_t(x) = min{(x+1)^2, (x-1)^2 + shift(t)}, 1D, nonconvex
IntegrandOracle make_min_quadratics(Expr shift);
// f_t(x) = d(t), constant in x
IntegrandOracle make_offset(int dim, Expr d);
// sum of terms; the conjugate stays analytic when at most one term is
// neither affine nor constant in x
IntegrandOracle make_sum(std::vector<IntegrandOracle> terms);
// alpha * f, alpha > 0
IntegrandOracle make_scaled(double alpha, IntegrandOracle f);

IntegrandOracle with_box(IntegrandOracle f, Box box);
IntegrandOracle with_dual_box(IntegrandOracle f, Box dual);

// Declarative construction, e.g.
//   {"kind":"quadratic","center":["sin(t)"],"weights":[2],"offset":"0"}
//   {"kind":"sum","terms":[{"kind":"abs","coord":1},{"kind":"affine","a":["1","0"]}]}
// Optional on any node: "box": [[lo,hi],...] and "dual_box": [[lo,hi],...]
// with expression strings or numbers for bounds.
IntegrandOracle integrand_from_json(const json& spec);

// {"kind":"interval","lo":"t","hi":"t+1"} | {"kind":"ball","center":[...],"radius":"1"}
// | {"kind":"box","lo":[...],"hi":[...]} | {"kind":"point","at":[...]}
// | {"kind":"halfspaces","normals":[[...]],"offsets":[...],"bbox":[[lo,hi],...]}
// plus optional "jumps":[{"t":0.5, <set spec>}].
MovingSet moving_set_from_json(const json& spec);

// Rejects keys outside `allowed`; context names the offending object.
void require_keys(const json& obj, const std::vector<std::string>& allowed,
                  const std::string& context);

}  // namespace nsvar

#endif
