#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hde/rng.hpp"
#include "hde/tensor.hpp"

namespace hde {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_index = -1;
  int coords_checked = 0;
  bool finite = true;
  std::string diagnostic;

  bool ok(double tol) const { return finite && max_rel_err < tol; }
};

struct GradCheckOptions {
  double epsilon = 1e-5;
  int max_coords = 200;  // random subsample when the parameter set is larger
  uint64_t seed = 0x9d5c;
};

/// Compares analytic gradients against central differences.
///
/// `loss` evaluates the scalar objective at the current parameter values;
/// when want_grad is true it must also run a backward pass so that each
/// parameter's grad buffer holds the analytic gradient. Relative error per
/// coordinate uses denominator max(|analytic|, |numeric|, 1e-8). Meant for
/// the 64-bit instantiation; epsilon below ~1e-7 drowns in rounding.
template <typename T>
GradCheckReport grad_check(const std::function<double(bool want_grad)>& loss,
                           const std::vector<Parameter<T>*>& params,
                           const GradCheckOptions& opt = {}) {
  GradCheckReport rep;
  for (Parameter<T>* p : params) p->zero_grad();
  double base = loss(true);
  if (!std::isfinite(base)) {
    rep.finite = false;
    rep.diagnostic = "non-finite loss at the unperturbed point";
    return rep;
  }

  struct Coord {
    Parameter<T>* p;
    int idx;
  };
  std::vector<Coord> coords;
  for (Parameter<T>* p : params)
    for (int i = 0; i < static_cast<int>(p->value.size()); ++i) coords.push_back({p, i});

  if (static_cast<int>(coords.size()) > opt.max_coords) {
    std::mt19937_64 rng(opt.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(opt.max_coords);
  }

  const double eps = opt.epsilon;
  for (const Coord& c : coords) {
    T saved = c.p->value.data()[c.idx];
    c.p->value.data()[c.idx] = saved + static_cast<T>(eps);
    double fp = loss(false);
    c.p->value.data()[c.idx] = saved - static_cast<T>(eps);
    double fm = loss(false);
    c.p->value.data()[c.idx] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      rep.finite = false;
      rep.diagnostic = "non-finite loss while perturbing parameter " + c.p->name;
      return rep;
    }
    double numeric = (fp - fm) / (2.0 * eps);
    double analytic = static_cast<double>(c.p->grad.data()[c.idx]);
    double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    double rel = std::abs(analytic - numeric) / denom;
    if (rel > rep.max_rel_err) {
      rep.max_rel_err = rel;
      rep.worst_param = c.p->name;
      rep.worst_index = c.idx;
    }
    ++rep.coords_checked;
  }
  return rep;
}

}  // namespace hde
