#include "region_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace monoguard::detail {

namespace {

// Affine function of the free coordinates: coef[0..k) then the constant.
using Form = std::vector<double>;

// a . x + b >= 0 as a half-space.
struct HalfSpace {
  Form form;
};

double Eval(const Form& f, const double* x, int k) {
  double v = f[k];
  for (int i = 0; i < k; ++i) v += f[i] * x[i];
  return v;
}

double Scale(const Form& f, const double* lo, const double* hi, int k) {
  double s = std::abs(f[k]);
  for (int i = 0; i < k; ++i) {
    s += std::abs(f[i]) * std::max(std::abs(lo[i]), std::abs(hi[i]));
  }
  return s;
}

// Solves the k x k system rows . x = rhs by Gaussian elimination with partial
// pivoting. Returns false when (numerically) singular.
bool SolveSmall(double a[3][3], double b[3], int k, double* x) {
  for (int c = 0; c < k; ++c) {
    int p = c;
    for (int r = c + 1; r < k; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    if (std::abs(a[p][c]) < 1e-14) return false;
    if (p != c) {
      for (int j = 0; j < k; ++j) std::swap(a[p][j], a[c][j]);
      std::swap(b[p], b[c]);
    }
    for (int r = c + 1; r < k; ++r) {
      const double m = a[r][c] / a[c][c];
      for (int j = c; j < k; ++j) a[r][j] -= m * a[c][j];
      b[r] -= m * b[c];
    }
  }
  for (int r = k - 1; r >= 0; --r) {
    double s = b[r];
    for (int j = r + 1; j < k; ++j) s -= a[r][j] * x[j];
    x[r] = s / a[r][r];
  }
  return true;
}

double Choose(int n, int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c;
}

}  // namespace

RegionSolver::RegionSolver(const FlatNet& net)
    : net_(net), dim_(net.input_dim) {}

double RegionSolver::Cost(int unstable) const {
  const int planes = 2 * dim_ + unstable + 1;
  return std::ldexp(Choose(planes, dim_), unstable);
}

double RegionSolver::Solve(const double* lo, const double* hi,
                           const std::optional<OrderConstraint>& order,
                           const std::vector<signed char>& status,
                           double* argmax) {
  const int k = dim_;
  std::vector<int> undecided;
  for (std::size_t j = 0; j < status.size(); ++j) {
    if (status[j] < 0) undecided.push_back(static_cast<int>(j));
  }
  const int u = static_cast<int>(undecided.size());

  // Planes bounding the box (and the order constraint), as a . x + b >= 0.
  std::vector<HalfSpace> fixed_planes;
  for (int i = 0; i < k; ++i) {
    Form f(k + 1, 0.0);
    f[i] = 1.0;
    f[k] = -lo[i];
    fixed_planes.push_back({f});
    f[i] = -1.0;
    f[k] = hi[i];
    fixed_planes.push_back({f});
  }
  if (order) {
    Form f(k + 1, 0.0);
    f[order->second] = 1.0;
    f[order->first] = -1.0;
    fixed_planes.push_back({f});
  }

  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> point(static_cast<std::size_t>(std::max(k, 1)));
  const auto width = static_cast<std::size_t>(net_.max_width);
  std::vector<Form> cur(width, Form(k + 1, 0.0));
  std::vector<Form> nxt(width, Form(k + 1, 0.0));

  for (long mask = 0; mask < (1L << u); ++mask) {
    // Affine propagation under the pattern; collect the pattern's cuts.
    std::vector<HalfSpace> planes = fixed_planes;
    for (int i = 0; i < k; ++i) {
      std::fill(cur[i].begin(), cur[i].end(), 0.0);
      cur[i][i] = 1.0;
    }
    int neuron = 0;
    int next_undecided = 0;
    for (const FlatLayer& layer : net_.layers) {
      const double* w = layer.w.data();
      for (int r = 0; r < layer.out; ++r, w += layer.in) {
        Form& z = nxt[r];
        std::fill(z.begin(), z.end(), 0.0);
        z[k] = layer.b[r];
        for (int c = 0; c < layer.in; ++c) {
          if (w[c] == 0.0) continue;
          for (int i = 0; i <= k; ++i) z[i] += w[c] * cur[c][i];
        }
        if (!layer.relu) continue;
        bool on = status[neuron] > 0;
        if (status[neuron] < 0) {
          on = (mask >> next_undecided) & 1L;
          ++next_undecided;
          Form cut = z;
          if (!on) {
            for (double& v : cut) v = -v;
          }
          planes.push_back({cut});
        }
        if (!on) std::fill(z.begin(), z.end(), 0.0);
        ++neuron;
      }
      std::swap(cur, nxt);
    }
    const Form& objective = cur[0];

    auto feasible = [&](const double* x) {
      for (const HalfSpace& h : planes) {
        const double tol = 1e-9 * (1.0 + Scale(h.form, lo, hi, k));
        if (Eval(h.form, x, k) < -tol) return false;
      }
      return true;
    };
    auto consider = [&](const double* x) {
      if (!feasible(x)) return;
      const double v = Eval(objective, x, k);
      if (v > best) {
        best = v;
        for (int i = 0; i < k; ++i) {
          argmax[i] = std::clamp(x[i], lo[i], hi[i]);
        }
      }
    };

    if (k == 0) {
      consider(point.data());
      continue;
    }
    const int n = static_cast<int>(planes.size());
    std::vector<int> pick(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      double a[3][3];
      double b[3];
      for (int r = 0; r < k; ++r) {
        const Form& f = planes[pick[r]].form;
        for (int c = 0; c < k; ++c) a[r][c] = f[c];
        b[r] = -f[k];
      }
      if (SolveSmall(a, b, k, point.data())) consider(point.data());
      int i = k - 1;
      while (i >= 0 && pick[i] == n - k + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return best;
}

}  // namespace monoguard::detail
