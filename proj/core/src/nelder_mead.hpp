#pragma once

// Box-projected Nelder-Mead simplex minimizer (internal).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace loglindley::detail {

template <std::size_t N>
using Point = std::array<double, N>;

template <std::size_t N>
struct NelderMeadOptions {
  Point<N> lower{};
  Point<N> upper{};
  double initial_step = 0.25;
  double f_rel_tol = 1e-10;
  double diameter_tol = 1e-8;
  int max_iterations = 2000;
};

template <std::size_t N>
struct NelderMeadResult {
  Point<N> x{};
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <std::size_t N, class F>
NelderMeadResult<N> nelder_mead(F&& f, Point<N> start, const NelderMeadOptions<N>& opt) {
  auto project = [&](Point<N> p) {
    for (std::size_t k = 0; k < N; ++k) p[k] = std::clamp(p[k], opt.lower[k], opt.upper[k]);
    return p;
  };
  auto eval = [&](const Point<N>& p) {
    const double v = f(p);
    return std::isnan(v) ? HUGE_VAL : v;
  };

  std::array<Point<N>, N + 1> v;
  std::array<double, N + 1> fv;
  v[0] = project(start);
  for (std::size_t i = 1; i <= N; ++i) {
    v[i] = v[0];
    v[i][i - 1] += opt.initial_step;
    if (v[i][i - 1] > opt.upper[i - 1]) v[i][i - 1] = v[0][i - 1] - opt.initial_step;
    v[i] = project(v[i]);
  }
  for (std::size_t i = 0; i <= N; ++i) fv[i] = eval(v[i]);

  NelderMeadResult<N> result;
  result.iterations = opt.max_iterations;
  std::array<std::size_t, N + 1> order;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    for (std::size_t i = 0; i <= N; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    {
      auto vs = v;
      auto fs = fv;
      for (std::size_t i = 0; i <= N; ++i) {
        v[i] = vs[order[i]];
        fv[i] = fs[order[i]];
      }
    }
    double diameter = 0.0;
    for (std::size_t i = 1; i <= N; ++i)
      for (std::size_t k = 0; k < N; ++k) diameter = std::max(diameter, std::abs(v[i][k] - v[0][k]));
    const double spread = std::abs(fv[N] - fv[0]);
    if (spread <= opt.f_rel_tol * std::max(1.0, std::abs(fv[0])) && diameter <= opt.diameter_tol) {
      result.converged = true;
      result.iterations = iter;
      break;
    }

    Point<N> centroid{};
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) centroid[k] += v[i][k] / static_cast<double>(N);
    auto along = [&](double t) {
      Point<N> p;
      for (std::size_t k = 0; k < N; ++k) p[k] = centroid[k] + t * (v[N][k] - centroid[k]);
      return project(p);
    };

    const Point<N> xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      const Point<N> xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        v[N] = xe;
        fv[N] = fe;
      } else {
        v[N] = xr;
        fv[N] = fr;
      }
      continue;
    }
    if (fr < fv[N - 1]) {
      v[N] = xr;
      fv[N] = fr;
      continue;
    }
    const bool outside = fr < fv[N];
    const Point<N> xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if ((outside && fc <= fr) || (!outside && fc < fv[N])) {
      v[N] = xc;
      fv[N] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= N; ++i) {
      for (std::size_t k = 0; k < N; ++k) v[i][k] = v[0][k] + 0.5 * (v[i][k] - v[0][k]);
      fv[i] = eval(v[i]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  result.x = v[best];
  result.value = fv[best];
  return result;
}

}  // namespace loglindley::detail
