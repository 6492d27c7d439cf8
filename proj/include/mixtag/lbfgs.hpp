// Copyright 2026 The mixtag Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Limited-memory BFGS with a strong-Wolfe line search (bracketing + zoom,
// safeguarded cubic interpolation). Every accepted step satisfies the
// sufficient-decrease condition, so accepted objective values never increase.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mixtag/error.hpp"

namespace mixtag::lbfgs {

struct Options {
  std::size_t memory = 10;
  std::size_t max_iterations = 200;
  /// Stop when |f_prev - f| / max(|f_prev|, |f|, 1) < tolerance.
  double tolerance = 1e-5;
  double c1 = 1e-4;  // sufficient decrease
  double c2 = 0.9;   // curvature
  std::size_t max_line_search = 40;
};

enum class Status { max_iterations, converged, line_search_stalled };

struct Result {
  Status status = Status::max_iterations;
  std::size_t iterations = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
};

/// f(x, grad) -> value; must fill grad.
using Function = std::function<double(std::span<const double>, std::span<double>)>;
/// Called after every accepted step with (iteration, objective, gradient norm).
using Progress = std::function<void(std::size_t, double, double)>;

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct Point {
  double step = 0.0;
  double f = 0.0;
  double slope = 0.0;  // directional derivative along the search direction
  std::vector<double> x;
  std::vector<double> g;
};

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), kept
// inside the middle 80% of [a, b]; falls back to bisection.
inline double interpolate(const Point& a, const Point& b) {
  const double lo = std::min(a.step, b.step), hi = std::max(a.step, b.step);
  const double margin = 0.1 * (hi - lo);
  double t = 0.5 * (a.step + b.step);
  if (std::isfinite(a.f) && std::isfinite(b.f)) {
    const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.step - b.step);
    const double disc = d1 * d1 - a.slope * b.slope;
    if (disc >= 0.0) {
      const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
      const double denom = b.slope - a.slope + 2.0 * d2;
      if (denom != 0.0) {
        const double c = b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
        if (std::isfinite(c)) t = c;
      }
    }
  }
  return std::clamp(t, lo + margin, hi - margin);
}

}  // namespace detail

/// Minimizes `f` starting from `x`, which receives the final iterate.
/// Throws NumericError if the objective is non-finite at the start point or
/// at every trial point of a failed line search.
inline Result minimize(const Function& f, std::vector<double>& x, const Options& opt,
                       const Progress& progress = {}) {
  using detail::dot;
  using detail::Point;
  const std::size_t n = x.size();

  Point cur;
  cur.x = x;
  cur.g.assign(n, 0.0);
  cur.f = f(cur.x, cur.g);
  if (!std::isfinite(cur.f)) throw NumericError("objective is not finite at the start point");

  Result res;
  res.objective = cur.f;
  res.gradient_norm = detail::norm(cur.g);
  if (opt.max_iterations == 0 || res.gradient_norm == 0.0) {
    res.status = opt.max_iterations == 0 ? Status::max_iterations : Status::converged;
    return res;
  }

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> dir(n), alpha_buf;

  bool saw_finite = false;
  auto evaluate = [&](double step) {
    Point p;
    p.step = step;
    p.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.x[i] = cur.x[i] + step * dir[i];
    p.g.assign(n, 0.0);
    p.f = f(p.x, p.g);
    p.slope = std::isfinite(p.f) ? dot(p.g, dir) : 0.0;
    if (std::isfinite(p.f)) saw_finite = true;
    return p;
  };

  for (std::size_t iter = 1; iter <= opt.max_iterations; ++iter) {
    // Two-loop recursion: dir = -H g.
    for (std::size_t i = 0; i < n; ++i) dir[i] = -cur.g[i];
    const std::size_t m = s_hist.size();
    alpha_buf.assign(m, 0.0);
    for (std::size_t k = m; k-- > 0;) {
      alpha_buf[k] = rho_hist[k] * dot(s_hist[k], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha_buf[k] * y_hist[k][i];
    }
    if (m > 0) {
      const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
      for (auto& d : dir) d *= gamma;
    }
    for (std::size_t k = 0; k < m; ++k) {
      const double beta = rho_hist[k] * dot(y_hist[k], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha_buf[k] - beta) * s_hist[k][i];
    }

    Point start;
    start.f = cur.f;
    start.slope = dot(cur.g, dir);
    if (!(start.slope < 0.0)) {
      // Not a descent direction; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -cur.g[i];
      start.slope = dot(cur.g, dir);
    }
    const double f0 = cur.f, slope0 = start.slope;
    auto armijo = [&](const Point& p) { return p.f <= f0 + opt.c1 * p.step * slope0; };
    auto curvature = [&](const Point& p) { return std::abs(p.slope) <= -opt.c2 * slope0; };

    // Line search.
    std::optional<Point> accepted;
    saw_finite = false;
    {
      Point prev = start;
      double step = m == 0 ? std::min(1.0, 1.0 / detail::norm(cur.g)) : 1.0;
      std::size_t evals = 0;

      auto zoom = [&](Point lo, Point hi) -> std::optional<Point> {
        while (evals < opt.max_line_search) {
          Point p = evaluate(detail::interpolate(lo, hi));
          ++evals;
          if (!std::isfinite(p.f) || !armijo(p) || p.f >= lo.f) {
            hi = std::move(p);
          } else {
            if (curvature(p)) return p;
            if (p.slope * (hi.step - lo.step) >= 0.0) hi = std::move(lo);
            lo = std::move(p);
          }
        }
        // Out of budget: fall back to the best point with sufficient decrease.
        if (lo.step > 0.0 && armijo(lo) && lo.f < f0) return lo;
        return std::nullopt;
      };

      while (evals < opt.max_line_search) {
        Point p = evaluate(step);
        ++evals;
        if (!std::isfinite(p.f) || !armijo(p) || (prev.step > 0.0 && p.f >= prev.f)) {
          accepted = zoom(std::move(prev), std::move(p));
          break;
        }
        if (curvature(p)) {
          accepted = std::move(p);
          break;
        }
        if (p.slope >= 0.0) {
          accepted = zoom(std::move(p), std::move(prev));
          break;
        }
        prev = std::move(p);
        step *= 2.0;
      }
    }

    if (!accepted) {
      if (!saw_finite) throw NumericError("objective diverged during line search");
      res.status = Status::line_search_stalled;
      break;
    }

    Point& next = *accepted;
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = next.x[i] - cur.x[i];
      y[i] = next.g[i] - cur.g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * detail::norm(s) * detail::norm(y)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > std::max<std::size_t>(opt.memory, 1)) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double f_prev = cur.f;
    cur.x = std::move(next.x);
    cur.g = std::move(next.g);
    cur.f = next.f;

    res.iterations = iter;
    res.objective = cur.f;
    res.gradient_norm = detail::norm(cur.g);
    if (progress) progress(iter, res.objective, res.gradient_norm);

    const double scale = std::max({std::abs(f_prev), std::abs(cur.f), 1.0});
    if ((f_prev - cur.f) / scale < opt.tolerance || res.gradient_norm == 0.0) {
      res.status = Status::converged;
      break;
    }
  }

  x = cur.x;
  return res;
}

}  // namespace mixtag::lbfgs
