#include "bound_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace monoguard::detail {

namespace {

// form layout: dim coefficients followed by the constant term.
double FormMax(const double* form, const double* lo, const double* hi,
               int dim) {
  double v = form[dim];
  for (int i = 0; i < dim; ++i) {
    v += form[i] > 0.0 ? form[i] * hi[i] : form[i] * lo[i];
  }
  return v;
}

double FormMin(const double* form, const double* lo, const double* hi,
               int dim) {
  double v = form[dim];
  for (int i = 0; i < dim; ++i) {
    v += form[i] > 0.0 ? form[i] * lo[i] : form[i] * hi[i];
  }
  return v;
}

void Axpy(double* dst, double a, const double* src, int n) {
  for (int i = 0; i < n; ++i) dst[i] += a * src[i];
}

}  // namespace

double MaximizeLinear(const double* coef, double constant, const double* lo,
                      const double* hi, int dim,
                      const std::optional<OrderConstraint>& order,
                      double* argmax) {
  double value = constant;
  for (int i = 0; i < dim; ++i) {
    if (order && (i == order->first || i == order->second)) continue;
    argmax[i] = coef[i] >= 0.0 ? hi[i] : lo[i];
    value += coef[i] * argmax[i];
  }
  if (!order) return value;

  const int a = order->first;
  const int b = order->second;
  const double candidates_a[] = {lo[a], lo[a], hi[a], hi[a]};
  const double candidates_b[] = {lo[b], hi[b], lo[b], hi[b]};
  double best = -std::numeric_limits<double>::infinity();
  double best_a = lo[a];
  double best_b = hi[b];
  auto consider = [&](double xa, double xb) {
    if (xa > xb || xa < lo[a] || xa > hi[a] || xb < lo[b] || xb > hi[b]) {
      return;
    }
    const double v = coef[a] * xa + coef[b] * xb;
    if (v > best) {
      best = v;
      best_a = xa;
      best_b = xb;
    }
  };
  for (int c = 0; c < 4; ++c) consider(candidates_a[c], candidates_b[c]);
  for (double v : {lo[a], hi[a], lo[b], hi[b]}) consider(v, v);
  argmax[a] = best_a;
  argmax[b] = best_b;
  return value + best;
}

bool TightenForOrder(double* lo, double* hi,
                     const std::optional<OrderConstraint>& order) {
  if (!order) return true;
  const int a = order->first;
  const int b = order->second;
  hi[a] = std::min(hi[a], hi[b]);
  lo[b] = std::max(lo[b], lo[a]);
  return lo[a] <= hi[a] && lo[b] <= hi[b];
}

void ProjectForOrder(double* x, const std::optional<OrderConstraint>& order) {
  if (order && x[order->first] > x[order->second]) {
    x[order->first] = x[order->second];
  }
}

BoundEngine::BoundEngine(const FlatNet& net, double stability_slack)
    : net_(net), slack_(stability_slack), dim_(net.input_dim) {
  const std::size_t stride = static_cast<std::size_t>(dim_) + 1;
  const std::size_t width = static_cast<std::size_t>(net.max_width);
  for (auto* v : {&lo_form_a_, &up_form_a_, &lo_form_b_, &up_form_b_}) {
    v->assign(width * stride, 0.0);
  }
  for (auto* v : {&ilo_a_, &ihi_a_, &ilo_b_, &ihi_b_}) v->assign(width, 0.0);
  argmax_.assign(static_cast<std::size_t>(dim_), 0.0);
}

BoundEngine::Bounds BoundEngine::Compute(
    const double* lo, const double* hi,
    const std::optional<OrderConstraint>& order) {
  const int k = dim_;
  const int stride = k + 1;
  double* cur_lo = lo_form_a_.data();
  double* cur_up = up_form_a_.data();
  double* nxt_lo = lo_form_b_.data();
  double* nxt_up = up_form_b_.data();
  double* cur_ilo = ilo_a_.data();
  double* cur_ihi = ihi_a_.data();
  double* nxt_ilo = ilo_b_.data();
  double* nxt_ihi = ihi_b_.data();

  for (int i = 0; i < k; ++i) {
    std::fill(cur_lo + i * stride, cur_lo + (i + 1) * stride, 0.0);
    std::fill(cur_up + i * stride, cur_up + (i + 1) * stride, 0.0);
    cur_lo[i * stride + i] = 1.0;
    cur_up[i * stride + i] = 1.0;
    cur_ilo[i] = lo[i];
    cur_ihi[i] = hi[i];
  }

  Bounds out;
  out.exact = true;
  out.resolved = true;
  status_.clear();
  unstable_ = 0;
  for (const FlatLayer& layer : net_.layers) {
    const double* w = layer.w.data();
    for (int r = 0; r < layer.out; ++r, w += layer.in) {
      double* pu = nxt_up + r * stride;
      double* pl = nxt_lo + r * stride;
      std::fill(pu, pu + stride, 0.0);
      std::fill(pl, pl + stride, 0.0);
      pu[k] = layer.b[r];
      pl[k] = layer.b[r];
      double iu = layer.b[r];
      double il = layer.b[r];
      for (int j = 0; j < layer.in; ++j) {
        const double wj = w[j];
        if (wj > 0.0) {
          Axpy(pu, wj, cur_up + j * stride, stride);
          Axpy(pl, wj, cur_lo + j * stride, stride);
          iu += wj * cur_ihi[j];
          il += wj * cur_ilo[j];
        } else if (wj < 0.0) {
          Axpy(pu, wj, cur_lo + j * stride, stride);
          Axpy(pl, wj, cur_up + j * stride, stride);
          iu += wj * cur_ilo[j];
          il += wj * cur_ihi[j];
        }
      }
      double u = std::min(iu, FormMax(pu, lo, hi, k));
      double l = std::max(il, FormMin(pl, lo, hi, k));
      if (l > u) l = u;  // round-off on degenerate boxes

      if (!layer.relu) {
        nxt_ilo[r] = l;
        nxt_ihi[r] = u;
        continue;
      }
      if (l >= 0.0) {
        status_.push_back(1);
        nxt_ilo[r] = l;
        nxt_ihi[r] = u;
      } else if (u <= 0.0) {
        status_.push_back(0);
        std::fill(pu, pu + stride, 0.0);
        std::fill(pl, pl + stride, 0.0);
        nxt_ilo[r] = 0.0;
        nxt_ihi[r] = 0.0;
      } else {
        status_.push_back(-1);
        ++unstable_;
        out.exact = false;
        if (u - l >= slack_) out.resolved = false;
        const double lambda = u / (u - l);
        for (int i = 0; i < stride; ++i) pu[i] *= lambda;
        pu[k] -= lambda * l;
        if (u < -l) std::fill(pl, pl + stride, 0.0);
        nxt_ilo[r] = 0.0;
        nxt_ihi[r] = u;
      }
    }
    std::swap(cur_lo, nxt_lo);
    std::swap(cur_up, nxt_up);
    std::swap(cur_ilo, nxt_ilo);
    std::swap(cur_ihi, nxt_ihi);
  }

  const double form_max =
      MaximizeLinear(cur_up, cur_up[k], lo, hi, k, order, argmax_.data());
  out.upper = std::min(cur_ihi[0], form_max);
  return out;
}

}  // namespace monoguard::detail
