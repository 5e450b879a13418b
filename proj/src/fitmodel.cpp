// Copyright 2026 The Unitarity Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unitarity/fitmodel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace unitarity {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kIllConditioned = 1e12;
constexpr double kMinRateGap = 1e-3;
constexpr double kMinAmplitude = 1e-6;

double logistic(double a) { return 1.0 / (1.0 + std::exp(-a)); }

double logit(double p) {
  const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::log(q / (1.0 - q));
}

// x^{k} and d/dx x^{k} for k = m - 1 >= 0, with 0^0 = 1.
double power(double x, double k) { return k == 0.0 ? 1.0 : std::pow(x, k); }
double power_derivative(double x, double k) {
  if (k == 0.0) return 0.0;
  if (k == 1.0) return 1.0;
  return k * std::pow(x, k - 1.0);
}

/*
 * Model in natural parameters p, optimized over transformed parameters t with
 * p = natural(t). Rates go through logistic maps so they stay inside [0, 1].
 */
struct Model {
  std::string tag;
  std::vector<std::string> names;
  std::function<RVector(const RVector &)> natural;
  std::function<RMatrix(const RVector &)> natural_jacobian;  // dp/dt
  std::function<RVector(const RVector &)> transformed;       // inverse of natural
  // f(m; p) and its gradient in p.
  std::function<double(double, const RVector &, RVector *)> eval;
};

Model tp_model() {
  Model m;
  m.tag = "tp";
  m.names = {"A", "B", "u"};
  m.natural = [](const RVector &t) { return RVector((RVector(3) << t(0), t(1), logistic(t(2))).finished()); };
  m.natural_jacobian = [](const RVector &t) {
    RMatrix j = RMatrix::Identity(3, 3);
    const double u = logistic(t(2));
    j(2, 2) = u * (1.0 - u);
    return j;
  };
  m.transformed = [](const RVector &p) { return RVector((RVector(3) << p(0), p(1), logit(p(2))).finished()); };
  m.eval = [](double len, const RVector &p, RVector *grad) {
    const double k = len - 1.0;
    const double uk = power(p(2), k);
    if (grad) {
      grad->resize(3);
      (*grad) << 1.0, uk, p(1) * power_derivative(p(2), k);
    }
    return p(0) + p(1) * uk;
  };
  return m;
}

Model td_model() {
  Model m;
  m.tag = "td";
  m.names = {"A", "B", "lambda_plus", "lambda_minus"};
  m.natural = [](const RVector &t) {
    const double lp = logistic(t(2));
    return RVector((RVector(4) << t(0), t(1), lp, lp * logistic(t(3))).finished());
  };
  m.natural_jacobian = [](const RVector &t) {
    RMatrix j = RMatrix::Identity(4, 4);
    const double lp = logistic(t(2));
    const double r = logistic(t(3));
    j(2, 2) = lp * (1.0 - lp);
    j(3, 2) = r * lp * (1.0 - lp);
    j(3, 3) = lp * r * (1.0 - r);
    return j;
  };
  m.transformed = [](const RVector &p) {
    const double ratio = p(2) > 0.0 ? p(3) / p(2) : 0.5;
    return RVector((RVector(4) << p(0), p(1), logit(p(2)), logit(ratio)).finished());
  };
  m.eval = [](double len, const RVector &p, RVector *grad) {
    const double k = len - 1.0;
    const double a = power(p(2), k);
    const double b = power(p(3), k);
    if (grad) {
      grad->resize(4);
      (*grad) << a, b, p(0) * power_derivative(p(2), k), p(1) * power_derivative(p(3), k);
    }
    return p(0) * a + p(1) * b;
  };
  return m;
}

Model loss_model() {
  Model m;
  m.tag = "loss";
  m.names = {"C", "S"};
  m.natural = [](const RVector &t) { return RVector((RVector(2) << t(0), logistic(t(1))).finished()); };
  m.natural_jacobian = [](const RVector &t) {
    RMatrix j = RMatrix::Identity(2, 2);
    const double s = logistic(t(1));
    j(1, 1) = s * (1.0 - s);
    return j;
  };
  m.transformed = [](const RVector &p) { return RVector((RVector(2) << p(0), logit(p(1))).finished()); };
  m.eval = [](double len, const RVector &p, RVector *grad) {
    const double k = len - 1.0;
    const double sk = power(p(1), k);
    if (grad) {
      grad->resize(2);
      (*grad) << sk, p(0) * power_derivative(p(1), k);
    }
    return p(0) * sk;
  };
  return m;
}

bool has_sigma(const FitData &data) {
  if (data.sigma.size() != data.y.size() || data.sigma.empty()) return false;
  return std::all_of(data.sigma.begin(), data.sigma.end(),
                     [](double s) { return std::isfinite(s) && s > 0.0; });
}

RVector weights(const FitData &data) {
  RVector w = RVector::Ones(static_cast<Eigen::Index>(data.y.size()));
  if (has_sigma(data)) {
    for (std::size_t i = 0; i < data.y.size(); ++i) w(i) = 1.0 / (data.sigma[i] * data.sigma[i]);
  }
  return w;
}

void validate(const FitData &data, std::size_t min_distinct, const std::string &who) {
  if (data.m.size() != data.y.size()) throw std::invalid_argument(who + ": m and y sizes differ");
  if (!data.sigma.empty() && data.sigma.size() != data.y.size()) {
    throw std::invalid_argument(who + ": sigma size differs from y");
  }
  for (std::size_t i = 0; i < data.y.size(); ++i) {
    if (!std::isfinite(data.m[i]) || !std::isfinite(data.y[i]) || data.m[i] < 1.0) {
      throw std::invalid_argument(who + ": point " + std::to_string(i) + " is not finite or has m < 1");
    }
  }
  const std::set<double> distinct(data.m.begin(), data.m.end());
  if (distinct.size() < min_distinct) {
    throw std::invalid_argument(who + ": need at least " + std::to_string(min_distinct) +
                                " distinct sequence lengths, got " + std::to_string(distinct.size()));
  }
}

double cost_of(const Model &model, const FitData &data, const RVector &w, const RVector &p) {
  double c = 0.0;
  for (std::size_t i = 0; i < data.y.size(); ++i) {
    const double r = data.y[i] - model.eval(data.m[i], p, nullptr);
    c += w(i) * r * r;
  }
  return 0.5 * c;
}

struct LmOutcome {
  RVector theta;
  double cost = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> history;
};

LmOutcome levenberg_marquardt(const Model &model, const FitData &data, const RVector &w,
                              RVector theta, const FitOptions &options) {
  const Eigen::Index n = static_cast<Eigen::Index>(data.y.size());
  const Eigen::Index k = theta.size();
  auto linearize = [&](const RVector &t, RVector &resid, RMatrix &jac) {
    const RVector p = model.natural(t);
    const RMatrix dp = model.natural_jacobian(t);
    resid.resize(n);
    jac.resize(n, k);
    RVector grad;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sw = std::sqrt(w(i));
      resid(i) = sw * (data.y[i] - model.eval(data.m[i], p, &grad));
      jac.row(i) = -sw * (grad.transpose() * dp);
    }
  };

  LmOutcome out;
  out.theta = theta;
  out.cost = cost_of(model, data, w, model.natural(theta));
  out.history.push_back(out.cost);
  double mu = 1e-3;
  RVector resid;
  RMatrix jac;
  linearize(out.theta, resid, jac);
  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    if (out.cost <= 1e-32) {
      out.converged = true;
      break;
    }
    const RMatrix h = jac.transpose() * jac;
    const RVector g = jac.transpose() * resid;
    const double floor = std::max(h.diagonal().maxCoeff(), 1.0) * 1e-15;
    bool accepted = false;
    while (mu < 1e20) {
      RMatrix damped = h;
      for (Eigen::Index d = 0; d < k; ++d) damped(d, d) += mu * std::max(h(d, d), floor);
      const RVector step = -damped.ldlt().solve(g);
      if (!step.allFinite()) {
        mu *= 10.0;
        continue;
      }
      const RVector trial = out.theta + step;
      const double trial_cost = cost_of(model, data, w, model.natural(trial));
      if (std::isfinite(trial_cost) && trial_cost <= out.cost) {
        const double change = out.cost - trial_cost;
        out.theta = trial;
        const double previous = out.cost;
        out.cost = trial_cost;
        out.history.push_back(out.cost);
        mu = std::max(mu / 10.0, 1e-12);
        accepted = true;
        if (change <= options.tolerance * std::max(previous, std::numeric_limits<double>::min()) ||
            step.norm() <= options.tolerance * (out.theta.norm() + options.tolerance)) {
          out.converged = true;
        }
        break;
      }
      mu *= 10.0;
    }
    if (!accepted) {
      // No descent direction left at any damping: a stationary point (possibly on a saturated bound).
      out.converged = g.lpNorm<Eigen::Infinity>() <= 1e-8 * std::max(1.0, std::sqrt(2.0 * out.cost));
      break;
    }
    if (out.converged) break;
    linearize(out.theta, resid, jac);
  }
  return out;
}

// Weighted linear least squares on the given basis columns; returns coefficients and cost.
std::pair<RVector, double> linear_solve(const RMatrix &basis, const FitData &data, const RVector &w) {
  const RVector sw = w.cwiseSqrt();
  const RVector y = Eigen::Map<const RVector>(data.y.data(), static_cast<Eigen::Index>(data.y.size()));
  const RMatrix a = sw.asDiagonal() * basis;
  const RVector coeffs = a.completeOrthogonalDecomposition().solve(sw.cwiseProduct(y));
  const double cost = 0.5 * (a * coeffs - sw.cwiseProduct(y)).squaredNorm();
  return {coeffs, cost};
}

std::vector<double> rate_grid() {
  std::vector<double> out;
  for (int i = 1; i <= 40; ++i) out.push_back(i / 41.0);
  for (int i = 1; i <= 60; ++i) out.push_back(1.0 - std::pow(10.0, -1.0 - 4.0 * i / 60.0));
  return out;
}

RMatrix power_columns(const FitData &data, const std::vector<double> &rates, bool constant) {
  const Eigen::Index n = static_cast<Eigen::Index>(data.m.size());
  const Eigen::Index c = static_cast<Eigen::Index>(rates.size()) + (constant ? 1 : 0);
  RMatrix basis(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index j = 0;
    if (constant) basis(i, j++) = 1.0;
    for (double r : rates) basis(i, j++) = power(r, data.m[i] - 1.0);
  }
  return basis;
}

// Seeds following the documented heuristic: tail mean, first-point amplitude, log-linear rate.
RVector heuristic_tp_seed(const FitData &data) {
  std::vector<std::size_t> order(data.m.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data.m[a] < data.m[b]; });
  const std::size_t tail = std::max<std::size_t>(1, order.size() / 10);
  double a0 = 0.0;
  for (std::size_t i = order.size() - tail; i < order.size(); ++i) a0 += data.y[order[i]];
  a0 /= static_cast<double>(tail);
  const double b0 = data.y[order.front()] - a0;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  const double scale = std::max(std::abs(b0), 1e-300);
  for (std::size_t i = 0; i < data.m.size(); ++i) {
    const double dev = std::abs(data.y[i] - a0);
    if (dev <= 1e-9 * scale) continue;
    const double x = data.m[i] - 1.0;
    const double yy = std::log(dev);
    sx += x;
    sy += yy;
    sxx += x * x;
    sxy += x * yy;
    ++count;
  }
  double u0 = 0.9;
  if (count >= 2) {
    const double denom = count * sxx - sx * sx;
    if (std::abs(denom) > 0.0) u0 = std::exp((count * sxy - sx * sy) / denom);
  }
  u0 = std::clamp(u0, 1e-6, 1.0 - 1e-6);
  // Amplitude at m = 1 given the chosen rate.
  const double m_first = data.m[order.front()];
  const double b_adj = b0 / power(u0, m_first - 1.0);
  return (RVector(3) << a0, std::isfinite(b_adj) ? b_adj : b0, u0).finished();
}

struct Fitted {
  LmOutcome lm;
  RVector natural;
};

Fitted best_of(const Model &model, const FitData &data, const RVector &w,
               const std::vector<RVector> &natural_seeds, const FitOptions &options) {
  Fitted best;
  bool have = false;
  for (const auto &seed : natural_seeds) {
    if (!seed.allFinite()) continue;
    LmOutcome lm = levenberg_marquardt(model, data, w, model.transformed(seed), options);
    if (!have || lm.cost < best.lm.cost || (lm.cost == best.lm.cost && lm.converged && !best.lm.converged)) {
      best.lm = std::move(lm);
      have = true;
    }
  }
  if (!have) throw std::runtime_error(model.tag + " fit: no finite starting point");
  best.natural = model.natural(best.lm.theta);
  return best;
}

FitResult summarize(const Model &model, const FitData &data, const RVector &w, const Fitted &fit) {
  FitResult out;
  out.model = model.tag;
  out.cost = fit.lm.cost;
  out.converged = fit.lm.converged;
  out.iterations = fit.lm.iterations;
  out.cost_history = fit.lm.history;
  const Eigen::Index n = static_cast<Eigen::Index>(data.y.size());
  const Eigen::Index k = fit.natural.size();

  RMatrix jac(n, k);
  double rss = 0.0;
  RVector grad;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = data.y[i] - model.eval(data.m[i], fit.natural, &grad);
    rss += r * r;
    jac.row(i) = std::sqrt(w(i)) * grad.transpose();
  }
  out.rms_residual = std::sqrt(rss / static_cast<double>(n));

  const RMatrix h = jac.transpose() * jac;
  RVector scale = h.diagonal().cwiseSqrt();
  if ((scale.array() <= 0.0).any()) {
    out.condition_number = std::numeric_limits<double>::infinity();
  } else {
    const RMatrix corr = scale.cwiseInverse().asDiagonal() * h * scale.cwiseInverse().asDiagonal();
    const RVector ev = Eigen::SelfAdjointEigenSolver<RMatrix>(corr).eigenvalues();
    out.condition_number =
        ev(0) > 0.0 ? ev(ev.size() - 1) / ev(0) : std::numeric_limits<double>::infinity();
  }
  out.covariance = h.completeOrthogonalDecomposition().pseudoInverse();
  if (!has_sigma(data)) {
    const double s2 = n > k ? 2.0 * fit.lm.cost / static_cast<double>(n - k) : 0.0;
    out.covariance *= s2;
  }
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());

  for (Eigen::Index j = 0; j < k; ++j) {
    FitParameter p;
    p.name = model.names[j];
    p.value = fit.natural(j);
    p.std_error = std::sqrt(std::max(0.0, out.covariance(j, j)));
    p.ci_low = p.value - kZ95 * p.std_error;
    p.ci_high = p.value + kZ95 * p.std_error;
    const bool rate = p.name != "A" && p.name != "B" && p.name != "C";
    if (rate) {
      p.ci_low = std::max(0.0, p.ci_low);
      p.ci_high = std::min(1.0, p.ci_high);
    }
    out.params.push_back(p);
  }
  if (!out.converged) out.warnings.push_back(model.tag + " fit did not converge");
  return out;
}

FitResult fit_tp_impl(const FitData &data, const FitOptions &options) {
  validate(data, 3, "fit_tp_decay");
  const Model model = tp_model();
  const RVector w = weights(data);
  std::vector<RVector> seeds{heuristic_tp_seed(data)};
  double best_cost = std::numeric_limits<double>::infinity();
  RVector grid_seed;
  for (double u : rate_grid()) {
    const auto [coeffs, cost] = linear_solve(power_columns(data, {u}, true), data, w);
    if (cost < best_cost) {
      best_cost = cost;
      grid_seed = (RVector(3) << coeffs(0), coeffs(1), u).finished();
    }
  }
  seeds.push_back(grid_seed);
  return summarize(model, data, w, best_of(model, data, w, seeds, options));
}

FitResult fit_td_impl(const FitData &data, const FitOptions &options) {
  validate(data, 5, "fit_td_decay");
  const Model model = td_model();
  const RVector w = weights(data);
  const FitResult tp = fit_tp_impl(data, options);

  std::vector<RVector> seeds;
  const double lp0 = 1.0 - 1e-6;
  seeds.push_back((RVector(4) << tp.value("A"), tp.value("B"), lp0, std::min(tp.value("u"), lp0)).finished());
  double best_cost = std::numeric_limits<double>::infinity();
  RVector grid_seed;
  const auto grid = rate_grid();
  for (double lp : grid) {
    for (double ratio : grid) {
      const double lm = lp * ratio;
      const auto [coeffs, cost] = linear_solve(power_columns(data, {lp, lm}, false), data, w);
      if (cost < best_cost) {
        best_cost = cost;
        grid_seed = (RVector(4) << coeffs(0), coeffs(1), lp, lm).finished();
      }
    }
  }
  seeds.push_back(grid_seed);
  FitResult td = summarize(model, data, w, best_of(model, data, w, seeds, options));
  const double lp = td.value("lambda_plus");
  const double lm = td.value("lambda_minus");
  td.lambda_sum = lp + lm;

  const bool close = lp - lm <= kMinRateGap * std::max(lp, 1e-300);
  // A rate whose amplitude vanishes is not determined by the data.
  const double a = std::abs(td.value("A")), b = std::abs(td.value("B"));
  const bool silent = std::min(a, b) <= kMinAmplitude * std::max(a + b, 1e-300);
  if (close || silent || !(td.condition_number < kIllConditioned)) {
    FitResult fallback = tp;
    fallback.fallback = true;
    fallback.warnings.push_back(
        "td fit ill-conditioned (condition number " + std::to_string(td.condition_number) +
        ", lambda_plus " + std::to_string(lp) + ", lambda_minus " + std::to_string(lm) +
        "); reporting the single-rate tp fit");
    return fallback;
  }
  return td;
}

FitResult loss_impl(const FitData &data, const FitOptions &options) {
  validate(data, 3, "loss_fit");
  const Model model = loss_model();
  const RVector w = weights(data);
  std::vector<RVector> seeds;
  double best_cost = std::numeric_limits<double>::infinity();
  RVector grid_seed;
  auto grid = rate_grid();
  grid.push_back(1.0);
  for (double s : grid) {
    const auto [coeffs, cost] = linear_solve(power_columns(data, {s}, false), data, w);
    if (cost < best_cost) {
      best_cost = cost;
      grid_seed = (RVector(2) << coeffs(0), std::min(s, 1.0 - 1e-9)).finished();
    }
  }
  seeds.push_back(grid_seed);
  return summarize(model, data, w, best_of(model, data, w, seeds, options));
}

using FitFn = FitResult (*)(const FitData &, const FitOptions &);

// Percentile bootstrap over the per-sequence raw records, resampled within each length.
void apply_bootstrap(FitResult &result, const DecayDataset &data, const FitOptions &options,
                     FitFn fit) {
  std::map<int, std::vector<double>> groups;
  for (const auto &r : data.raw) groups[r.m].push_back(r.value);
  if (groups.empty()) {
    result.warnings.push_back("bootstrap requested but the dataset has no raw records");
    return;
  }
  FitOptions inner = options;
  inner.bootstrap_samples = 0;
  std::vector<std::vector<double>> draws(result.params.size());
  for (int b = 0; b < options.bootstrap_samples; ++b) {
    RngStream rng(options.bootstrap_seed, {static_cast<std::uint64_t>(b)});
    FitData resampled;
    for (const auto &[m, values] : groups) {
      double sum = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[rng.index(values.size())];
        sum += v;
        sq += v * v;
      }
      const double k = static_cast<double>(values.size());
      const double mean = sum / k;
      const double var = k > 1 ? std::max(0.0, (sq - k * mean * mean) / (k - 1.0)) : 0.0;
      resampled.m.push_back(m);
      resampled.y.push_back(mean);
      resampled.sigma.push_back(std::sqrt(var / k));
    }
    try {
      const FitResult r = fit(resampled, inner);
      if (r.model != result.model) continue;
      for (std::size_t j = 0; j < result.params.size(); ++j) draws[j].push_back(r.params[j].value);
    } catch (const std::exception &) {
      // Degenerate resample; skip it.
    }
  }
  for (std::size_t j = 0; j < result.params.size(); ++j) {
    auto &d = draws[j];
    if (d.size() < 2) continue;
    std::sort(d.begin(), d.end());
    const auto at = [&](double q) { return d[static_cast<std::size_t>(std::floor(q * (d.size() - 1)))]; };
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(d.size());
    double var = 0.0;
    for (double v : d) var += (v - mean) * (v - mean);
    result.params[j].std_error = std::sqrt(var / static_cast<double>(d.size() - 1));
    result.params[j].ci_low = at(0.025);
    result.params[j].ci_high = at(0.975);
  }
}

FitResult with_dataset(const DecayDataset &data, const FitOptions &options, FitFn fit) {
  FitResult result = fit(FitData::from_dataset(data), options);
  if (options.bootstrap_samples > 0) apply_bootstrap(result, data, options, fit);
  return result;
}

}  // namespace

FitData FitData::from_dataset(const DecayDataset &data) {
  FitData out;
  for (const auto &row : data.rows) {
    out.m.push_back(row.m);
    out.y.push_back(row.mean);
    out.sigma.push_back(row.std_error);
  }
  return out;
}

const FitParameter &FitResult::param(const std::string &name) const {
  for (const auto &p : params) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("fit result has no parameter '" + name + "'");
}

double FitResult::predict(double m) const {
  const double k = m - 1.0;
  if (model == "tp") return value("A") + value("B") * power(value("u"), k);
  if (model == "td") {
    return value("A") * power(value("lambda_plus"), k) + value("B") * power(value("lambda_minus"), k);
  }
  return value("C") * power(value("S"), k);
}

FitResult fit_tp_decay(const FitData &data, const FitOptions &options) {
  return fit_tp_impl(data, options);
}
FitResult fit_tp_decay(const DecayDataset &data, const FitOptions &options) {
  return with_dataset(data, options, &fit_tp_impl);
}

FitResult fit_td_decay(const FitData &data, const FitOptions &options) {
  return fit_td_impl(data, options);
}
FitResult fit_td_decay(const DecayDataset &data, const FitOptions &options) {
  return with_dataset(data, options, &fit_td_impl);
}

FitResult loss_fit(const FitData &data, const FitOptions &options) { return loss_impl(data, options); }
FitResult loss_fit(const DecayDataset &data, const FitOptions &options) {
  return with_dataset(data, options, &loss_impl);
}

}  // namespace unitarity
