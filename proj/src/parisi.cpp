#include "cspglass/parisi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "cspglass/rng.hpp"

namespace cspglass {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kZeroZeta = 1e-7;    // below this the Cole-Hopf transform is ill-conditioned
constexpr double kMinVariance = 1e-14;
constexpr double kMinSeparation = 1e-3;  // breakpoint separation kept by the optimizer

double std_normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * kPi); }
double std_normal_tail(double u) { return 0.5 * std::erfc(u / std::sqrt(2.0)); }

// log Q(u) for the standard normal tail, stable for large |u|
double log_normal_tail(double u) {
  if (u < 8.0) return std::log(std_normal_tail(u));
  const double u2 = u * u;
  return -0.5 * u2 - 0.5 * std::log(2.0 * kPi) - std::log(u) + std::log1p(-1.0 / u2 + 3.0 / (u2 * u2));
}

// Linear extension of the solution outside the grid: Φ(x,t) − |x| is
// asymptotically constant, so slope ±1 is exact up to Gaussian tail mass.
double sample_extended(const std::vector<double>& phi, double lo, double dx, double y) {
  const int n = static_cast<int>(phi.size());
  const double hi = lo + (n - 1) * dx;
  if (y <= lo) return phi.front() + (lo - y);
  if (y >= hi) return phi.back() + (y - hi);
  double u = (y - lo) / dx;
  int j = static_cast<int>(u);
  if (j >= n - 1) j = n - 2;
  double w = u - j;
  return phi[j] * (1.0 - w) + phi[j + 1] * w;
}

// One exact heat step of variance sigma² for the interval parameter z.
//
// z = 0: Φ ← K_σ * Φ, direct windowed quadrature on a slope-±1 linear
// extension of the grid (tails beyond 10σ are negligible without the
// exponential weight).
//
// z > 0: under u = exp(zΦ) the flow is linear, so Φ ← (1/z)·log(K_σ * e^{zΦ}).
// The weight e^{zΦ} tilts the kernel: since |∂Φ/∂x| ≤ 1, the integrand's
// maximum sits within zσ² of the output point, so the quadrature window is
// zσ² + 10σ and every sum runs in shifted log-domain. The part of the
// integral beyond the grid is the Gaussian×exponential integral of the
// linear extension, added in closed form via the normal tail.
void heat_step(std::vector<double>& phi, double left_x, double dx, double sigma, double z) {
  const int n = static_cast<int>(phi.size());
  const double right_x = left_x + (n - 1) * dx;

  if (z <= kZeroZeta && sigma >= 4.0 * dx) {
    const int pad = static_cast<int>(std::ceil(10.0 * sigma / dx));
    const int ext_n = n + 2 * pad;
    std::vector<double> ext(ext_n);
    for (int i = 0; i < pad; ++i) ext[i] = phi.front() + (pad - i) * dx;
    std::copy(phi.begin(), phi.end(), ext.begin() + pad);
    for (int i = 0; i < pad; ++i) ext[pad + n + i] = phi.back() + (i + 1) * dx;
    std::vector<double> ker(2 * pad + 1);
    double ksum = 0.0;
    for (int d = -pad; d <= pad; ++d) {
      ker[d + pad] = std::exp(-0.5 * (d * dx / sigma) * (d * dx / sigma));
      ksum += ker[d + pad];
    }
    for (double& v : ker) v /= ksum;
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      const double* e = ext.data() + i;
      for (int d = 0; d <= 2 * pad; ++d) acc += ker[d] * e[d];
      out[i] = acc;
    }
    phi.swap(out);
    return;
  }

  if (z <= kZeroZeta) {
    // near-degenerate step: offset lattice finer than the grid with linear
    // interpolation of Φ
    const double h = sigma / 4.0;
    const int q_max = 40;  // 10σ in units of h
    std::vector<double> w(2 * q_max + 1);
    double wsum = 0.0;
    for (int q = -q_max; q <= q_max; ++q) {
      w[q + q_max] = std::exp(-q * q / 32.0);
      wsum += w[q + q_max];
    }
    for (double& v : w) v /= wsum;
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
      const double x = left_x + i * dx;
      double acc = 0.0;
      for (int q = -q_max; q <= q_max; ++q)
        acc += w[q + q_max] * sample_extended(phi, left_x, dx, x + q * h);
      out[i] = acc;
    }
    phi.swap(out);
    return;
  }

  const double drift = z * sigma * sigma;
  const double half_zs2 = 0.5 * z * z * sigma * sigma;
  const double phi_l = phi.front(), phi_r = phi.back();

  if (sigma < 4.0 * dx) {
    // fine offset lattice, per-output log-domain sum; the window covers the
    // tilted kernel support so the linear-extension samples are exact enough
    const double h = sigma / 4.0;
    const int q_max = 40 + static_cast<int>(std::ceil(drift / h));
    std::vector<double> logw(2 * q_max + 1);
    double wsum = 0.0;
    for (int q = -q_max; q <= q_max; ++q) {
      const double g = std::exp(-0.5 * (q * h / sigma) * (q * h / sigma));
      wsum += g;
    }
    for (int q = -q_max; q <= q_max; ++q)
      logw[q + q_max] = -0.5 * (q * h / sigma) * (q * h / sigma) - std::log(wsum);
    std::vector<double> out(n);
    std::vector<double> g(2 * q_max + 1);
    for (int i = 0; i < n; ++i) {
      const double x = left_x + i * dx;
      double m = -std::numeric_limits<double>::infinity();
      for (int q = -q_max; q <= q_max; ++q) {
        g[q + q_max] = z * sample_extended(phi, left_x, dx, x + q * h) + logw[q + q_max];
        m = std::max(m, g[q + q_max]);
      }
      double acc = 0.0;
      for (double v : g) acc += std::exp(v - m);
      out[i] = (std::log(acc) + m) / z;
    }
    phi.swap(out);
    return;
  }

  const int window = static_cast<int>(std::ceil((drift + 10.0 * sigma) / dx));
  const double log_norm = std::log(dx / (sigma * std::sqrt(2.0 * kPi)));
  const double inv_two_var = 0.5 / (sigma * sigma);

  std::vector<double> a(n);
  for (int j = 0; j < n; ++j) a[j] = z * phi[j];

  std::vector<double> out(n);
  std::vector<double> g(2 * static_cast<std::size_t>(window) + 1);
  for (int i = 0; i < n; ++i) {
    const double x = left_x + i * dx;
    const int jlo = std::max(0, i - window);
    const int jhi = std::min(n - 1, i + window);
    double m = -std::numeric_limits<double>::infinity();
    for (int j = jlo; j <= jhi; ++j) {
      const double d = (j - i) * dx;
      const double v = a[j] - d * d * inv_two_var;
      g[j - jlo] = v;
      if (v > m) m = v;
    }
    double acc = 0.0;
    for (int j = jlo; j <= jhi; ++j) acc += std::exp(g[j - jlo] - m);
    const double body = m + std::log(acc) + log_norm;

    const double tail_r =
        z * phi_r + z * (x - right_x) + half_zs2 + log_normal_tail((right_x - x) / sigma - z * sigma);
    const double tail_l =
        z * phi_l + z * (left_x - x) + half_zs2 + log_normal_tail((x - left_x) / sigma - z * sigma);

    double top = std::max(body, std::max(tail_r, tail_l));
    const double total =
        top + std::log(std::exp(body - top) + std::exp(tail_r - top) + std::exp(tail_l - top));
    out[i] = total / z;
  }
  phi.swap(out);
}

double half_width_for(const MixturePolynomial& xi, const ParisiGrid& grid) {
  if (grid.half_width > 0.0) return grid.half_width;
  return 8.0 * std::sqrt(xi.derivative(1.0));
}

// Backward solve of the HJB flow followed by the Gaussian field average of
// Φ(·, 0); returns the Φ term of the functional.
double solve_phi_term(const MixturePolynomial& xi, const OrderParameter& zeta, double half_width,
                      int spatial_points, int time_steps) {
  const int n = spatial_points + 1;
  const double L = half_width;
  const double dx = 2.0 * L / spatial_points;

  std::vector<double> phi(n);
  for (int j = 0; j < n; ++j) phi[j] = std::abs(-L + j * dx);

  const int m = zeta.atoms();
  for (int i = m; i >= 1; --i) {
    const double z = zeta.values[i - 1];
    const double a = zeta.breakpoints[i - 1];
    const double b = zeta.breakpoints[i];
    for (int s = time_steps; s >= 1; --s) {
      const double t_hi = a + (b - a) * s / time_steps;
      const double t_lo = a + (b - a) * (s - 1) / time_steps;
      const double v = xi.derivative(t_hi) - xi.derivative(t_lo);
      if (v <= kMinVariance) continue;
      heat_step(phi, -L, dx, std::sqrt(v), z);
    }
  }

  const double field_sd = std::sqrt(std::max(xi.derivative(0.0), 0.0));
  if (field_sd < 1e-12) return phi[spatial_points / 2];

  // E_{y~N(0, ξ'(0))} Φ(y, 0): trapezoid over the grid plus the exact
  // contribution of the linear extensions
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double x = -L + j * dx;
    const double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;
    acc += w * phi[j] * std_normal_pdf(x / field_sd) / field_sd * dx;
  }
  const double q = std_normal_tail(L / field_sd);
  const double tail_mean = field_sd * std_normal_pdf(L / field_sd) - L * q;
  acc += (phi.back() * q + tail_mean) + (phi.front() * q + tail_mean);
  return acc;
}

// ½ ∫₀¹ s ξ''(s) ζ(s) ds in closed form: Σ_i z_i Σ_p (p−1) c_p² (t_i^p − t_{i−1}^p) / 2
double correction_term(const MixturePolynomial& xi, const OrderParameter& zeta) {
  double acc = 0.0;
  for (int i = 0; i < zeta.atoms(); ++i) {
    const double a = zeta.breakpoints[i];
    const double b = zeta.breakpoints[i + 1];
    double interval = 0.0;
    for (int p = 2; p <= xi.max_degree; ++p)
      interval += (p - 1) * xi.coefficient(p) * (std::pow(b, p) - std::pow(a, p));
    acc += zeta.values[i] * interval;
  }
  return 0.5 * acc;
}

}  // namespace

double OrderParameter::at(double t) const {
  for (int i = atoms() - 1; i >= 0; --i)
    if (t >= breakpoints[i]) return values[i];
  return values.front();
}

void OrderParameter::validate() const {
  if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size())
    throw std::invalid_argument("order parameter needs m values and m+1 breakpoints");
  if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
    throw std::invalid_argument("order parameter breakpoints must start at 0 and end at 1");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw std::invalid_argument("order parameter breakpoints must be strictly increasing");
  for (double z : values)
    if (!(z >= 0.0)) throw std::invalid_argument("order parameter values must be nonnegative");
  if (zeta_class == ZetaClass::Monotone)
    for (std::size_t i = 1; i < values.size(); ++i)
      if (values[i] + 1e-12 < values[i - 1])
        throw std::invalid_argument("class-U order parameter must be non-decreasing");
}

OrderParameter OrderParameter::constant(double z, ZetaClass cls) {
  OrderParameter op;
  op.values = {z};
  op.zeta_class = cls;
  return op;
}

ParisiEvaluation evaluate_parisi(const MixturePolynomial& xi, const OrderParameter& zeta,
                                 const ParisiGrid& grid) {
  zeta.validate();
  if (xi.is_zero()) throw std::invalid_argument("mixture polynomial must have a nonzero coefficient");
  if (grid.spatial_points < 64 || grid.spatial_points % 2 != 0)
    throw std::invalid_argument("spatial_points must be even and at least 64");
  if (grid.time_steps_per_interval < 1)
    throw std::invalid_argument("time_steps_per_interval must be positive");

  const double L = half_width_for(xi, grid);
  const double diffusion_sd = std::sqrt(std::max(xi.derivative(1.0) - xi.derivative(0.0), 0.0));
  const double field_sd = std::sqrt(std::max(xi.derivative(0.0), 0.0));
  if (L < 4.0 * field_sd + 5.0 * diffusion_sd)
    throw GridError("grid half-width too small for this mixture: boundary influence above tolerance");

  ParisiEvaluation out;
  out.correction = correction_term(xi, zeta);
  out.phi_at_origin =
      solve_phi_term(xi, zeta, L, grid.spatial_points, grid.time_steps_per_interval);
  out.value = out.phi_at_origin - out.correction;
  if (grid.with_diagnostics) {
    const double coarse =
        solve_phi_term(xi, zeta, L, grid.spatial_points / 2, grid.time_steps_per_interval);
    out.grid_delta = std::abs(out.phi_at_origin - coarse);
  }
  return out;
}

double rs_value(const MixturePolynomial& xi) {
  return std::sqrt(2.0 * xi.derivative(1.0) / kPi);
}

namespace {

// ---- functional minimization over piecewise-constant ζ ----

struct Candidate {
  std::vector<double> t;  // interior breakpoints, size m-1
  std::vector<double> z;  // size m
  double value = std::numeric_limits<double>::infinity();
  bool converged = true;  // final descent finished inside its round budget
};

struct Objective {
  const MixturePolynomial* xi;
  ParisiGrid grid;
  ZetaClass cls;

  double operator()(const std::vector<double>& t, const std::vector<double>& z) const {
    OrderParameter op;
    op.breakpoints.assign(1, 0.0);
    op.breakpoints.insert(op.breakpoints.end(), t.begin(), t.end());
    op.breakpoints.push_back(1.0);
    op.values = z;
    op.zeta_class = cls;
    return evaluate_parisi(*xi, op, grid).value;
  }
};

OrderParameter to_order_parameter(const Candidate& c, ZetaClass cls) {
  OrderParameter op;
  op.breakpoints.assign(1, 0.0);
  op.breakpoints.insert(op.breakpoints.end(), c.t.begin(), c.t.end());
  op.breakpoints.push_back(1.0);
  op.values = c.z;
  op.zeta_class = cls;
  return op;
}

// 1-D minimize: short scan to bracket, then golden-section refine
template <typename F>
std::pair<double, double> line_min(F&& f, double lo, double hi, int scan_pts = 5,
                                   int golden_iters = 14) {
  if (!(hi > lo)) return {lo, f(lo)};
  std::vector<double> xs(scan_pts);
  double best_x = lo, best_f = std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < scan_pts; ++i) {
    xs[i] = lo + (hi - lo) * i / (scan_pts - 1);
    double v = f(xs[i]);
    if (v < best_f) {
      best_f = v;
      best_x = xs[i];
      best_i = i;
    }
  }
  double a = xs[std::max(0, best_i - 1)];
  double b = xs[std::min(scan_pts - 1, best_i + 1)];
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < golden_iters; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  if (f1 < best_f) {
    best_f = f1;
    best_x = x1;
  }
  if (f2 < best_f) {
    best_f = f2;
    best_x = x2;
  }
  return {best_x, best_f};
}

// coordinate descent over (values, breakpoints) with feasibility boxes;
// class U keeps monotonicity because each z_i moves inside [z_{i-1}, z_{i+1}]
bool coordinate_descent(Candidate& c, const Objective& obj, const MinimizeOptions& opts,
                        double z_cap) {
  const int m = static_cast<int>(c.z.size());
  if (c.value == std::numeric_limits<double>::infinity()) c.value = obj(c.t, c.z);
  for (int round = 0; round < opts.descent_rounds; ++round) {
    const double before = c.value;
    for (int i = 0; i < m; ++i) {
      double lo = 0.0, hi = z_cap;
      if (obj.cls == ZetaClass::Monotone) {
        if (i > 0) lo = c.z[i - 1];
        if (i + 1 < m) hi = c.z[i + 1];
      }
      if (hi - lo < 1e-12) continue;
      const double z_old = c.z[i];
      // log1p scale: fine resolution near 0, reach for large z
      auto f = [&](double y) {
        c.z[i] = std::expm1(y);
        return obj(c.t, c.z);
      };
      auto [y_best, f_best] = line_min(f, std::log1p(lo), std::log1p(hi));
      if (f_best < c.value) {
        c.z[i] = std::min(std::max(std::expm1(y_best), lo), hi);
        c.value = f_best;
      } else {
        c.z[i] = z_old;
      }
    }
    for (int j = 0; j < m - 1; ++j) {
      double lo = (j == 0 ? 0.0 : c.t[j - 1]) + kMinSeparation;
      double hi = (j == m - 2 ? 1.0 : c.t[j + 1]) - kMinSeparation;
      if (hi - lo < 1e-9) continue;
      const double t_old = c.t[j];
      auto f = [&](double x) {
        c.t[j] = x;
        return obj(c.t, c.z);
      };
      auto [x_best, f_best] = line_min(f, lo, hi);
      if (f_best < c.value) {
        c.t[j] = x_best;
        c.value = f_best;
      } else {
        c.t[j] = t_old;
      }
    }
    if (before - c.value < opts.value_tol) return true;
  }
  return false;
}

// downhill-simplex polish on [t..., log1p(z)...] with projection to the
// feasible set before each evaluation
void nelder_mead_polish(Candidate& c, const Objective& obj, const MinimizeOptions& opts,
                        double z_cap) {
  const int m = static_cast<int>(c.z.size());
  const int dim = 2 * m - 1;
  if (dim == 0 || opts.polish_evals <= 0) return;

  auto project_eval = [&](std::vector<double>& v) {
    std::vector<double> t(m - 1), z(m);
    for (int j = 0; j < m - 1; ++j) t[j] = v[j];
    std::sort(t.begin(), t.end());
    for (int j = 0; j < m - 1; ++j) {
      double lo = (j == 0 ? 0.0 : t[j - 1]) + kMinSeparation;
      double hi = 1.0 - kMinSeparation * (m - 1 - j);
      t[j] = std::min(std::max(t[j], lo), hi);
    }
    for (int i = 0; i < m; ++i) {
      double zi = std::expm1(std::min(std::max(v[m - 1 + i], 0.0), std::log1p(z_cap)));
      z[i] = zi;
    }
    if (obj.cls == ZetaClass::Monotone)
      for (int i = 1; i < m; ++i) z[i] = std::max(z[i], z[i - 1]);
    for (int j = 0; j < m - 1; ++j) v[j] = t[j];
    for (int i = 0; i < m; ++i) v[m - 1 + i] = std::log1p(z[i]);
    return obj(t, z);
  };

  std::vector<double> base(dim);
  for (int j = 0; j < m - 1; ++j) base[j] = c.t[j];
  for (int i = 0; i < m; ++i) base[m - 1 + i] = std::log1p(c.z[i]);

  std::vector<std::vector<double>> pts(dim + 1, base);
  std::vector<double> fv(dim + 1);
  int evals = 0;
  fv[0] = c.value;
  for (int d = 0; d < dim; ++d) {
    pts[d + 1][d] += (d < m - 1) ? 0.02 : 0.08;
    fv[d + 1] = project_eval(pts[d + 1]);
    ++evals;
  }

  while (evals < opts.polish_evals) {
    std::vector<int> ord(dim + 1);
    for (int i = 0; i <= dim; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = ord[0], worst = ord[dim], second = ord[dim - 1];
    if (fv[worst] - fv[best] < opts.value_tol * 0.1) break;

    std::vector<double> centroid(dim, 0.0);
    for (int i = 0; i <= dim; ++i)
      if (i != worst)
        for (int d = 0; d < dim; ++d) centroid[d] += pts[i][d] / dim;

    auto blend = [&](double coef) {
      std::vector<double> p(dim);
      for (int d = 0; d < dim; ++d) p[d] = centroid[d] + coef * (pts[worst][d] - centroid[d]);
      return p;
    };

    auto refl = blend(-1.0);
    double f_refl = project_eval(refl);
    ++evals;
    if (f_refl < fv[best]) {
      auto expa = blend(-2.0);
      double f_expa = project_eval(expa);
      ++evals;
      if (f_expa < f_refl) {
        pts[worst] = expa;
        fv[worst] = f_expa;
      } else {
        pts[worst] = refl;
        fv[worst] = f_refl;
      }
    } else if (f_refl < fv[second]) {
      pts[worst] = refl;
      fv[worst] = f_refl;
    } else {
      auto contr = blend(0.5);
      double f_contr = project_eval(contr);
      ++evals;
      if (f_contr < fv[worst]) {
        pts[worst] = contr;
        fv[worst] = f_contr;
      } else {
        for (int i = 0; i <= dim; ++i) {
          if (i == best) continue;
          for (int d = 0; d < dim; ++d) pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
          fv[i] = project_eval(pts[i]);
          ++evals;
        }
      }
    }
  }

  int best = 0;
  for (int i = 1; i <= dim; ++i)
    if (fv[i] < fv[best]) best = i;
  if (fv[best] < c.value) {
    std::vector<double> v = pts[best];
    double fb = project_eval(v);
    std::vector<double> t(m - 1), z(m);
    for (int j = 0; j < m - 1; ++j) t[j] = v[j];
    for (int i = 0; i < m; ++i) z[i] = std::expm1(v[m - 1 + i]);
    if (obj.cls == ZetaClass::Monotone)
      for (int i = 1; i < m; ++i) z[i] = std::max(z[i], z[i - 1]);
    if (fb <= c.value) {
      c.t = t;
      c.z = z;
      c.value = fb;
    }
  }
}

struct SweepOutcome {
  std::vector<Candidate> best_per_atoms;
  std::vector<double> per_atom_values;
};

SweepOutcome atom_sweep(const MixturePolynomial& xi, const MinimizeOptions& opts, ZetaClass cls,
                        const std::vector<Candidate>* warm) {
  Objective obj{&xi, opts.search_grid, cls};
  const double z_cap = opts.z_cap_scale / std::sqrt(xi.variance());
  SplitMix64 rng(opts.seed);
  SweepOutcome out;

  // one atom: scan the constant ζ ≡ z over a log-spaced range
  Candidate one;
  one.z = {0.0};
  {
    double best_z = 0.0, best_f = obj({}, {0.0});
    for (int i = 0; i <= 24; ++i) {
      double z = std::exp(std::log(1e-2) + (std::log(z_cap) - std::log(1e-2)) * i / 24.0);
      double f = obj({}, {z});
      if (f < best_f) {
        best_f = f;
        best_z = z;
      }
    }
    one.z = {best_z};
    one.value = best_f;
    one.converged = coordinate_descent(one, obj, opts, z_cap);
  }
  if (warm && !warm->empty() && (*warm)[0].z.size() == 1) {
    Candidate w = (*warm)[0];
    w.value = obj(w.t, w.z);
    w.converged = coordinate_descent(w, obj, opts, z_cap);
    if (w.value < one.value) one = w;
  }
  out.best_per_atoms.push_back(one);
  out.per_atom_values.push_back(one.value);

  for (int m = 2; m <= opts.max_atoms; ++m) {
    const Candidate prev = out.best_per_atoms.back();
    const int prev_atoms = static_cast<int>(prev.z.size());
    std::vector<Candidate> starts;

    // embed the previous solution: split each of its intervals at the midpoint
    for (int j = 0; j < prev_atoms; ++j) {
      Candidate s;
      s.t = prev.t;
      double lo = (j == 0) ? 0.0 : prev.t[j - 1];
      double hi = (j == prev_atoms - 1) ? 1.0 : prev.t[j];
      s.t.insert(s.t.begin() + j, 0.5 * (lo + hi));
      s.z = prev.z;
      s.z.insert(s.z.begin() + j, prev.z[j]);
      s.value = obj(s.t, s.z);
      starts.push_back(std::move(s));
    }
    if (warm && static_cast<int>(warm->size()) >= m &&
        static_cast<int>((*warm)[m - 1].z.size()) == m) {
      Candidate w = (*warm)[m - 1];
      w.value = obj(w.t, w.z);
      starts.push_back(std::move(w));
    }
    if (cls == ZetaClass::Free) {
      for (int r = 0; r < opts.restarts; ++r) {
        Candidate s;
        s.t.resize(m - 1);
        for (double& x : s.t) x = 0.05 + 0.9 * rng.next_double();
        std::sort(s.t.begin(), s.t.end());
        for (int j = 0; j < m - 1; ++j)
          s.t[j] = std::max(s.t[j], (j == 0 ? 0.0 : s.t[j - 1]) + kMinSeparation);
        s.z.resize(m);
        for (double& z : s.z) z = std::exp(std::log(1e-1) + rng.next_double() * std::log(10.0 * z_cap));
        for (double& z : s.z) z = std::min(z, z_cap);
        s.value = obj(s.t, s.z);
        starts.push_back(std::move(s));
      }
    }

    int pick = 0;
    for (std::size_t i = 1; i < starts.size(); ++i)
      if (starts[i].value < starts[pick].value) pick = static_cast<int>(i);
    Candidate best_m = starts[pick];
    best_m.converged = coordinate_descent(best_m, obj, opts, z_cap);
    // give one alternative start a shorter descent for class L, whose
    // landscape is not unimodal
    if (cls == ZetaClass::Free && starts.size() > 1) {
      int alt = (pick + 1) % static_cast<int>(starts.size());
      Candidate other = starts[alt];
      MinimizeOptions half = opts;
      half.descent_rounds = std::max(2, opts.descent_rounds / 3);
      coordinate_descent(other, obj, half, z_cap);
      if (other.value < best_m.value) {
        best_m = other;
        best_m.converged = coordinate_descent(best_m, obj, opts, z_cap);
      }
    }
    nelder_mead_polish(best_m, obj, opts, z_cap);

    // the m-atom class embeds the (m-1)-atom class, so never report worse
    if (best_m.value > out.per_atom_values.back()) {
      Candidate carried = prev;
      carried.value = out.per_atom_values.back();
      out.best_per_atoms.push_back(carried);
      out.per_atom_values.push_back(carried.value);
    } else {
      out.per_atom_values.push_back(best_m.value);
      out.best_per_atoms.push_back(std::move(best_m));
    }

    const double gain =
        out.per_atom_values[out.per_atom_values.size() - 2] - out.per_atom_values.back();
    if (m >= 3 && gain < opts.atom_gain_tol) break;
  }
  return out;
}

MinimizeResult finish(const MixturePolynomial& xi, const MinimizeOptions& opts, ZetaClass cls,
                      const SweepOutcome& sweep) {
  int best = 0;
  for (std::size_t i = 1; i < sweep.best_per_atoms.size(); ++i)
    if (sweep.best_per_atoms[i].value < sweep.best_per_atoms[best].value)
      best = static_cast<int>(i);

  MinimizeResult res;
  res.zeta = to_order_parameter(sweep.best_per_atoms[best], cls);
  res.evaluation = evaluate_parisi(xi, res.zeta, opts.report_grid);
  res.value = res.evaluation.value;
  res.grid_delta = res.evaluation.grid_delta;
  res.per_atom_values = sweep.per_atom_values;
  res.converged = sweep.best_per_atoms[best].converged;
  return res;
}

}  // namespace

MinimizeResult minimize_gsed(const MixturePolynomial& xi, const MinimizeOptions& opts) {
  if (xi.is_zero()) throw std::invalid_argument("mixture polynomial must be nonzero");
  SweepOutcome sweep = atom_sweep(xi, opts, ZetaClass::Monotone, nullptr);
  return finish(xi, opts, ZetaClass::Monotone, sweep);
}

MinimizeResult minimize_alg(const MixturePolynomial& xi, const MinimizeOptions& opts) {
  if (xi.is_zero()) throw std::invalid_argument("mixture polynomial must be nonzero");
  // warm-start from the monotone minimizer: L ⊇ U, so the result can only
  // improve on the GSED bound, never exceed it
  SweepOutcome u_sweep = atom_sweep(xi, opts, ZetaClass::Monotone, nullptr);
  SweepOutcome l_sweep = atom_sweep(xi, opts, ZetaClass::Free, &u_sweep.best_per_atoms);
  MinimizeResult u = finish(xi, opts, ZetaClass::Monotone, u_sweep);
  MinimizeResult l = finish(xi, opts, ZetaClass::Free, l_sweep);
  if (u.value < l.value) {
    u.zeta.zeta_class = ZetaClass::Free;
    u.per_atom_values = l.per_atom_values;
    return u;
  }
  return l;
}

CspValue csp_value_formula(const PredicateDistribution& lambda, double alpha,
                           const MinimizeOptions& opts) {
  if (!(alpha > 0.0)) throw std::invalid_argument("clause density alpha must be positive");
  MixturePolynomial xi = mixture_of_distribution(lambda);
  MinimizeResult r = minimize_gsed(xi, opts);
  CspValue out;
  out.mean_term = xi.mean_term;
  out.gsed = r.value;
  out.grid_delta = r.grid_delta;
  out.converged = r.converged;
  out.value = xi.mean_term + r.value / std::sqrt(alpha);
  return out;
}

CspValue csp_value_formula(const Predicate& p, double alpha, const MinimizeOptions& opts) {
  return csp_value_formula(PredicateDistribution(p), alpha, opts);
}

}  // namespace cspglass
