#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "olqr/errors.hpp"
#include "olqr/rng.hpp"

namespace olqr {

namespace detail {

// Ordinary least squares y = slope * f + intercept.
struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline Line fit_line(const std::vector<double>& f, const std::vector<double>& y) {
  const std::size_t n = f.size();
  double mf = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mf += f[i];
    my += y[i];
  }
  mf /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sff = 0.0, sfy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sff += (f[i] - mf) * (f[i] - mf);
    sfy += (f[i] - mf) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  Line line;
  line.slope = sfy / sff;
  line.intercept = my - line.slope * mf;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (line.slope * f[i] + line.intercept);
    ss_res += e * e;
  }
  line.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return line;
}

inline double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

// Mean regret per horizon, ignoring failed (NaN) trials, then a log-log line
// through the shifted means. The shift keeps every mean positive: +1 when any
// mean is nonpositive, enlarged to 1 - min when +1 is not enough.
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double shift = 0.0;
};

inline LogLogFit fit_log_log(const std::vector<long long>& T_grid,
                             const std::vector<double>& means) {
  double min_mean = std::numeric_limits<double>::infinity();
  for (double m : means) min_mean = std::min(min_mean, m);
  LogLogFit out;
  if (min_mean <= 0.0) out.shift = 1.0;
  if (min_mean + out.shift <= 0.0) out.shift = 1.0 - min_mean;
  std::vector<double> lt, lr;
  lt.reserve(T_grid.size());
  lr.reserve(T_grid.size());
  for (std::size_t i = 0; i < T_grid.size(); ++i) {
    lt.push_back(std::log(static_cast<double>(T_grid[i])));
    lr.push_back(std::log(means[i] + out.shift));
  }
  const Line line = fit_line(lt, lr);
  out.slope = line.slope;
  out.intercept = line.intercept;
  return out;
}

}  // namespace detail

struct ExponentFit {
  double beta = 0.0;       // log-log slope
  double intercept = 0.0;
  double ci_low = 0.0;     // bootstrap 95% interval over seed resamples
  double ci_high = 0.0;
  double shift = 0.0;      // applied to keep means positive; 0 when unused
  long long n_boot = 0;
};

// Fits mean regret ~ T^beta from per-(horizon, seed) regrets. Failed trials
// enter as NaN and are skipped. The confidence interval resamples seed
// columns with replacement (the same resample across horizons, since a seed
// indexes the shared noise realization) using the provided stream.
inline ExponentFit fit_exponent(const std::vector<long long>& T_grid,
                                const std::vector<std::vector<double>>& regrets,
                                RngStream& boot_stream, long long n_boot = 1000) {
  if (T_grid.size() < 3)
    throw InvalidBound("exponent fit needs at least 3 horizons");
  if (regrets.size() != T_grid.size())
    throw DimensionMismatch("one regret row per horizon required");
  const std::size_t n_seeds = regrets.front().size();
  for (const auto& row : regrets)
    if (row.size() != n_seeds)
      throw DimensionMismatch("regret rows must have equal seed counts");
  if (n_seeds < 1) throw InvalidBound("need at least one seed");

  auto means_for = [&](const std::vector<std::size_t>* pick) {
    std::vector<double> means(T_grid.size(), 0.0);
    for (std::size_t i = 0; i < T_grid.size(); ++i) {
      double sum = 0.0;
      long long n_ok = 0;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const double r = regrets[i][pick ? (*pick)[s] : s];
        if (std::isnan(r)) continue;
        sum += r;
        ++n_ok;
      }
      means[i] = n_ok > 0 ? sum / static_cast<double>(n_ok)
                          : std::numeric_limits<double>::quiet_NaN();
      if (n_ok == 0) throw InvalidBound("a horizon lost all its trials");
    }
    return means;
  };

  const detail::LogLogFit point = detail::fit_log_log(T_grid, means_for(nullptr));
  ExponentFit fit;
  fit.beta = point.slope;
  fit.intercept = point.intercept;
  fit.shift = point.shift;
  fit.n_boot = n_boot;
  if (n_boot < 1 || n_seeds < 2) {
    fit.ci_low = fit.ci_high = fit.beta;
    return fit;
  }
  std::vector<double> betas;
  betas.reserve(static_cast<std::size_t>(n_boot));
  std::vector<std::size_t> pick(n_seeds);
  for (long long b = 0; b < n_boot; ++b) {
    for (std::size_t s = 0; s < n_seeds; ++s)
      pick[s] = static_cast<std::size_t>(boot_stream.uniform_below(n_seeds));
    try {
      betas.push_back(detail::fit_log_log(T_grid, means_for(&pick)).slope);
    } catch (const InvalidBound&) {
      // resample emptied a horizon (only possible with failed trials); skip
    }
  }
  fit.ci_low = detail::percentile(betas, 0.025);
  fit.ci_high = detail::percentile(betas, 0.975);
  return fit;
}

struct ModelFit {
  double coefficient = 0.0;  // leading coefficient
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least squares of mean regret against log^2 T (polylogarithmic model).
inline ModelFit fit_log_squared(const std::vector<long long>& T_grid,
                                const std::vector<double>& means) {
  if (T_grid.size() < 3 || means.size() != T_grid.size())
    throw InvalidBound("model fit needs at least 3 horizons");
  std::vector<double> f;
  f.reserve(T_grid.size());
  for (long long T : T_grid) {
    const double l = std::log(static_cast<double>(T));
    f.push_back(l * l);
  }
  const detail::Line line = detail::fit_line(f, means);
  return {line.slope, line.intercept, line.r_squared};
}

// Least squares of mean regret against sqrt(T).
inline ModelFit fit_sqrt(const std::vector<long long>& T_grid,
                         const std::vector<double>& means) {
  if (T_grid.size() < 3 || means.size() != T_grid.size())
    throw InvalidBound("model fit needs at least 3 horizons");
  std::vector<double> f;
  f.reserve(T_grid.size());
  for (long long T : T_grid) f.push_back(std::sqrt(static_cast<double>(T)));
  const detail::Line line = detail::fit_line(f, means);
  return {line.slope, line.intercept, line.r_squared};
}

}  // namespace olqr
