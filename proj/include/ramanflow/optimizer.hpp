// optimizer.hpp - adaptive step-size random search (Schumer-Steiglitz)
//
// Works in box-normalised coordinates u = (x - lower) / (upper - lower).
// Each generation draws `batch` random unit directions; the best proposal is
// accepted if it improves on the incumbent, in which case the step expands,
// otherwise it contracts. Component i of the direction of candidate k is drawn
// from an RNG seeded with (seed, k, label_i), so results do not depend on the
// worker count, and relabelling the components permutes the result exactly.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"

namespace ramanflow {

struct DesignVector {
  std::vector<double> values;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> min_step;  // absolute step floor per component
  std::vector<std::uint64_t> labels;  // stable component identities; empty means 0..n-1

  std::size_t size() const { return values.size(); }

  void validate() const {
    const std::size_t n = values.size();
    if (lower.size() != n || upper.size() != n || min_step.size() != n)
      throw ConfigError("design vector bounds do not match its size");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(lower[i] < upper[i])) throw ConfigError("design bound is empty");
      if (values[i] < lower[i] || values[i] > upper[i])
        throw ConfigError("design vector starts outside its bounds");
      if (min_step[i] < 0.0) throw ConfigError("negative minimum step");
    }
    if (!labels.empty()) {
      if (labels.size() != n) throw ConfigError("design labels do not match its size");
      std::vector<std::uint64_t> sorted = labels;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ConfigError("design labels must be unique");
    }
  }

  std::vector<std::uint64_t> label_list() const {
    if (!labels.empty()) return labels;
    std::vector<std::uint64_t> l(values.size());
    for (std::size_t i = 0; i < l.size(); ++i) l[i] = i;
    return l;
  }

  bool operator==(const DesignVector&) const = default;
};

struct SearchConfig {
  double initial_step = 0.1;  // fraction of the box
  double expansion = 1.5;
  double contraction = 0.7;
  std::size_t max_evaluations = 1000;
  double target_value = std::numeric_limits<double>::infinity();  // stop once reached
  std::size_t patience = 0;  // stop after this many failures at the step floor (0: never)
  std::uint64_t seed = 1;
  std::size_t batch = 1;  // candidates per generation
  unsigned threads = 1;

  void validate() const {
    if (!(expansion > 1.0) || !(contraction > 0.0) || !(contraction < 1.0))
      throw ConfigError("search needs expansion > 1 > contraction > 0");
    if (max_evaluations < 1) throw ConfigError("search needs at least one evaluation");
    if (!(initial_step > 0.0)) throw ConfigError("initial step must be positive");
    if (batch < 1) throw ConfigError("search batch must be at least 1");
  }
};

struct ObjectiveReport {
  DesignVector best;
  double best_value = -std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  std::vector<double> trace;  // best-so-far after each evaluation
  double final_step = 0.0;    // normalised

  bool operator==(const ObjectiveReport&) const = default;
};

using Objective = std::function<double(const DesignVector&)>;

namespace detail {

// splitmix64 finaliser, used to fold (seed, candidate, label) into one RNG seed.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Unit direction for candidate `index` of a run seeded with `seed`.
inline std::vector<double> search_direction(std::uint64_t seed, std::uint64_t index,
                                            const std::vector<std::uint64_t>& labels) {
  const std::size_t n = labels.size();
  std::vector<double> u(n);
  // Sum squares in label order so the norm is independent of component order.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  for (std::uint64_t attempt = 0;; ++attempt) {
    for (std::size_t i = 0; i < n; ++i) {
      std::mt19937_64 rng(detail::mix(detail::mix(detail::mix(seed) ^ index) ^ labels[i]) ^ attempt);
      u[i] = std::normal_distribution<double>{}(rng);
    }
    double norm = 0.0;
    for (std::size_t i : order) norm += u[i] * u[i];
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& v : u) v /= norm;
      return u;
    }
  }
}

inline std::vector<double> search_direction(std::uint64_t seed, std::uint64_t index, std::size_t n) {
  DesignVector x;
  x.values.resize(n);
  return search_direction(seed, index, x.label_list());
}

inline ObjectiveReport random_search(const Objective& objective, const DesignVector& x0,
                                     const SearchConfig& cfg) {
  x0.validate();
  cfg.validate();
  const std::size_t n = x0.size();
  ObjectiveReport rep;
  rep.best = x0;

  auto safe_eval = [&](const DesignVector& x) {
    double v;
    try {
      v = objective(x);
    } catch (const NumericalError&) {
      v = -std::numeric_limits<double>::infinity();
    }
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };

  rep.best_value = safe_eval(x0);
  rep.evaluations = 1;
  rep.trace.push_back(rep.best_value);
  if (n == 0) return rep;

  const std::vector<std::uint64_t> labels = x0.label_list();
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    floor = std::min(floor, x0.min_step[i] / (x0.upper[i] - x0.lower[i]));
  double step = cfg.initial_step;
  std::size_t failures_at_floor = 0;

  std::vector<DesignVector> cand;
  std::vector<double> value;
  while (rep.evaluations < cfg.max_evaluations && rep.best_value < cfg.target_value) {
    const std::size_t k = std::min(cfg.batch, cfg.max_evaluations - rep.evaluations);
    cand.assign(k, rep.best);
    value.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      const auto u = search_direction(cfg.seed, rep.evaluations + c, labels);
      DesignVector& x = cand[c];
      for (std::size_t i = 0; i < n; ++i) {
        const double span = x.upper[i] - x.lower[i];
        x.values[i] = std::clamp(x.values[i] + step * u[i] * span, x.lower[i], x.upper[i]);
      }
    }
    parallel_for(k, cfg.threads, [&](std::size_t b, std::size_t e, std::size_t) {
      for (std::size_t c = b; c < e; ++c) value[c] = safe_eval(cand[c]);
    });
    std::size_t pick = 0;
    for (std::size_t c = 0; c < k; ++c) {
      if (value[c] > value[pick]) pick = c;
    }
    bool improved = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (c == pick && value[c] > rep.best_value) {
        rep.best_value = value[c];
        rep.best = cand[c];
        improved = true;
      }
      ++rep.evaluations;
      rep.trace.push_back(rep.best_value);
    }
    if (improved) {
      step = std::min(step * cfg.expansion, 1.0);
      failures_at_floor = 0;
    } else {
      step = std::max(step * cfg.contraction, floor);
      if (step <= floor && cfg.patience > 0 && ++failures_at_floor >= cfg.patience) break;
    }
  }
  rep.final_step = step;
  return rep;
}

}  // namespace ramanflow
