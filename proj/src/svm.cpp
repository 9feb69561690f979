#include <algorithm>
#include <cmath>
#include <random>

#include "walksense/predictors.hpp"

namespace walksense {

namespace {

double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
  double d2 = 0.0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    const double d = a[f] - b[f];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

// Full Gram matrices stay affordable up to a few thousand rows; larger
// problems fall back to on-demand kernel evaluation.
constexpr std::size_t kGramCacheRows = 3000;

struct SmoProblem {
  const std::vector<std::vector<double>>& x;
  std::vector<double> y;  // +1 / -1
  double gamma;
  std::vector<double> gram;  // empty when uncached
  std::size_t n;

  double k(std::size_t i, std::size_t j) const {
    if (!gram.empty()) return gram[i * n + j];
    return rbf(x[i], x[j], gamma);
  }
};

}  // namespace

void SvmModel::train(const Table& data) {
  if (data.rows() == 0) throw EmptyTrain("svm: empty training set");
  if (data.distinct_labels() < 2)
    throw SingleClass("svm: training labels are all one class");

  const std::size_t n = data.rows();
  num_classes_ = data.num_classes();
  gamma_ = params_.gamma > 0.0 ? params_.gamma : 1.0 / data.num_features();
  machines_.clear();
  dual_trace_.clear();

  SmoProblem prob{data.x, std::vector<double>(n), gamma_, {}, n};
  if (n <= kGramCacheRows) {
    prob.gram.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      prob.gram[i * n + i] = 1.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = rbf(data.x[i], data.x[j], gamma_);
        prob.gram[i * n + j] = v;
        prob.gram[j * n + i] = v;
      }
    }
  }

  const double c_cap = params_.c;
  const double tol = params_.epsilon;

  auto solve = [&](int positive_class, bool trace) -> Machine {
    for (std::size_t i = 0; i < n; ++i)
      prob.y[i] = data.y[i] == positive_class ? 1.0 : -1.0;

    std::vector<double> alpha(n, 0.0);
    std::vector<double> err(n);  // f(x_i) - y_i, with f == 0 initially
    for (std::size_t i = 0; i < n; ++i) err[i] = -prob.y[i];
    double b = 0.0;
    std::mt19937_64 rng(params_.seed + positive_class);

    auto take_step = [&](std::size_t i, std::size_t j) -> bool {
      if (i == j) return false;
      const double ai_old = alpha[i], aj_old = alpha[j];
      const double yi = prob.y[i], yj = prob.y[j];
      double lo, hi;
      if (yi != yj) {
        lo = std::max(0.0, aj_old - ai_old);
        hi = std::min(c_cap, c_cap + aj_old - ai_old);
      } else {
        lo = std::max(0.0, ai_old + aj_old - c_cap);
        hi = std::min(c_cap, ai_old + aj_old);
      }
      if (lo >= hi) return false;
      const double kii = prob.k(i, i), kjj = prob.k(j, j), kij = prob.k(i, j);
      const double eta = kii + kjj - 2.0 * kij;
      if (eta <= 1e-12) return false;
      double aj = aj_old + yj * (err[i] - err[j]) / eta;
      aj = std::clamp(aj, lo, hi);
      if (std::abs(aj - aj_old) < 1e-12 * (aj + aj_old + 1e-12)) return false;
      const double ai = ai_old + yi * yj * (aj_old - aj);
      const double b1 = b - err[i] - yi * (ai - ai_old) * kii -
                        yj * (aj - aj_old) * kij;
      const double b2 = b - err[j] - yi * (ai - ai_old) * kij -
                        yj * (aj - aj_old) * kjj;
      double b_new;
      if (ai > 0.0 && ai < c_cap)
        b_new = b1;
      else if (aj > 0.0 && aj < c_cap)
        b_new = b2;
      else
        b_new = 0.5 * (b1 + b2);
      const double db = b_new - b;
      for (std::size_t k = 0; k < n; ++k)
        err[k] += yi * (ai - ai_old) * prob.k(i, k) +
                  yj * (aj - aj_old) * prob.k(j, k) + db;
      alpha[i] = ai;
      alpha[j] = aj;
      b = b_new;
      return true;
    };

    auto examine = [&](std::size_t i) -> bool {
      const double r = err[i] * prob.y[i];
      if (!((r < -tol && alpha[i] < c_cap) || (r > tol && alpha[i] > 0.0)))
        return false;
      // Second-choice heuristic: largest |E_i - E_j| among non-bound points.
      std::size_t best = n;
      double best_gap = -1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (alpha[j] <= 0.0 || alpha[j] >= c_cap) continue;
        const double gap = std::abs(err[i] - err[j]);
        if (gap > best_gap) {
          best_gap = gap;
          best = j;
        }
      }
      if (best < n && take_step(i, best)) return true;
      const std::size_t start = rng() % n;
      for (std::size_t off = 0; off < n; ++off) {
        const std::size_t j = (start + off) % n;
        if (alpha[j] > 0.0 && alpha[j] < c_cap && take_step(i, j)) return true;
      }
      for (std::size_t off = 0; off < n; ++off) {
        const std::size_t j = (start + off) % n;
        if (take_step(i, j)) return true;
      }
      return false;
    };

    auto dual_objective = [&]() {
      double sum = 0.0, quad = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] == 0.0) continue;
        sum += alpha[i];
        for (std::size_t j = 0; j < n; ++j) {
          if (alpha[j] == 0.0) continue;
          quad += alpha[i] * alpha[j] * prob.y[i] * prob.y[j] * prob.k(i, j);
        }
      }
      return sum - 0.5 * quad;
    };

    bool examine_all = true;
    int passes = 0;
    while (true) {
      long changed = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!examine_all && (alpha[i] <= 0.0 || alpha[i] >= c_cap)) continue;
        if (examine(i)) ++changed;
      }
      if (trace && n <= 500) dual_trace_.push_back(dual_objective());
      if (++passes > params_.max_passes)
        throw NoConvergence("svm: SMO exceeded " +
                            std::to_string(params_.max_passes) + " sweeps");
      if (examine_all) {
        if (changed == 0) break;
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }

    Machine m;
    m.b = b;
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] > 1e-12) {
        m.sv.push_back(data.x[i]);
        m.alpha_y.push_back(alpha[i] * prob.y[i]);
      }
    }
    return m;
  };

  if (num_classes_ == 2) {
    // The class-0 machine is the mirror of the class-1 machine.
    machines_.resize(2);
    machines_[1] = solve(1, true);
  } else {
    machines_.resize(num_classes_);
    bool first = true;
    for (int c = 0; c < num_classes_; ++c) {
      const bool present =
          std::find(data.y.begin(), data.y.end(), c) != data.y.end();
      if (!present) {
        machines_[c].b = -1e9;  // absent class never wins the vote
        continue;
      }
      machines_[c] = solve(c, first);
      first = false;
    }
  }
}

double SvmModel::decision(const Machine& m, const std::vector<double>& features) const {
  double f = m.b;
  for (std::size_t s = 0; s < m.sv.size(); ++s)
    f += m.alpha_y[s] * rbf(m.sv[s], features, gamma_);
  return f;
}

int SvmModel::predict(const std::vector<double>& features) const {
  if (machines_.empty()) throw UntrainedModel("svm: predict before train");
  if (num_classes_ == 2) return decision(machines_[1], features) >= 0.0 ? 1 : 0;
  int best = 0;
  double best_f = -1e300;
  for (int c = 0; c < num_classes_; ++c) {
    const double f = decision(machines_[c], features);
    if (f > best_f) {
      best_f = f;
      best = c;
    }
  }
  return best;
}

double SvmModel::score(const std::vector<double>& features, int cls) const {
  if (machines_.empty()) throw UntrainedModel("svm: score before train");
  if (cls < 0 || cls >= num_classes_) return 0.0;
  std::vector<double> s(num_classes_);
  double sum = 0.0;
  for (int c = 0; c < num_classes_; ++c) {
    double f;
    if (num_classes_ == 2)
      f = c == 1 ? decision(machines_[1], features)
                 : -decision(machines_[1], features);
    else
      f = decision(machines_[c], features);
    s[c] = 1.0 / (1.0 + std::exp(-f));
    sum += s[c];
  }
  return sum > 0.0 ? s[cls] / sum : 1.0 / num_classes_;
}

}  // namespace walksense
