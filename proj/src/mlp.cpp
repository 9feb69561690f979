#include <algorithm>
#include <cmath>
#include <random>

#include "walksense/predictors.hpp"

namespace walksense {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void MlpModel::train(const Table& data) {
  if (data.rows() == 0) throw EmptyTrain("mlp: empty training set");
  if (data.distinct_labels() < 2)
    throw SingleClass("mlp: training labels are all one class");

  const int n = static_cast<int>(data.rows());
  in_ = data.num_features();
  out_ = data.num_classes();
  const int hid = params_.hidden;

  mean_.assign(in_, 0.0);
  sd_.assign(in_, 0.0);
  for (const auto& row : data.x)
    for (int f = 0; f < in_; ++f) mean_[f] += row[f];
  for (int f = 0; f < in_; ++f) mean_[f] /= n;
  for (const auto& row : data.x)
    for (int f = 0; f < in_; ++f) {
      const double d = row[f] - mean_[f];
      sd_[f] += d * d;
    }
  for (int f = 0; f < in_; ++f) {
    sd_[f] = std::sqrt(sd_[f] / n);
    if (sd_[f] < 1e-12) sd_[f] = 1.0;
  }

  std::vector<double> xs(static_cast<std::size_t>(n) * in_);
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < in_; ++f)
      xs[i * in_ + f] = (data.x[i][f] - mean_[f]) / sd_[f];

  std::mt19937_64 rng(params_.seed);
  std::uniform_real_distribution<double> init(-0.5, 0.5);
  w1_.assign(static_cast<std::size_t>(hid) * in_, 0.0);
  b1_.assign(hid, 0.0);
  w2_.assign(static_cast<std::size_t>(out_) * hid, 0.0);
  b2_.assign(out_, 0.0);
  for (double& w : w1_) w = init(rng);
  for (double& w : b1_) w = init(rng);
  for (double& w : w2_) w = init(rng);
  for (double& w : b2_) w = init(rng);

  std::vector<double> dw1(w1_.size()), db1(b1_.size());
  std::vector<double> dw2(w2_.size()), db2(b2_.size());
  std::vector<double> vw1(w1_.size(), 0.0), vb1(b1_.size(), 0.0);
  std::vector<double> vw2(w2_.size(), 0.0), vb2(b2_.size(), 0.0);
  std::vector<double> h(hid), o(out_), dh(hid);

  loss_trace_.clear();
  loss_trace_.reserve(params_.epochs);
  for (int epoch = 0; epoch < params_.epochs; ++epoch) {
    std::fill(dw1.begin(), dw1.end(), 0.0);
    std::fill(db1.begin(), db1.end(), 0.0);
    std::fill(dw2.begin(), dw2.end(), 0.0);
    std::fill(db2.begin(), db2.end(), 0.0);
    double loss = 0.0;

    for (int i = 0; i < n; ++i) {
      const double* x = &xs[static_cast<std::size_t>(i) * in_];
      for (int j = 0; j < hid; ++j) {
        double z = b1_[j];
        const double* w = &w1_[static_cast<std::size_t>(j) * in_];
        for (int f = 0; f < in_; ++f) z += w[f] * x[f];
        h[j] = sigmoid(z);
      }
      double zmax = -1e300;
      for (int c = 0; c < out_; ++c) {
        double z = b2_[c];
        const double* w = &w2_[static_cast<std::size_t>(c) * hid];
        for (int j = 0; j < hid; ++j) z += w[j] * h[j];
        o[c] = z;
        zmax = std::max(zmax, z);
      }
      double zsum = 0.0;
      for (int c = 0; c < out_; ++c) {
        o[c] = std::exp(o[c] - zmax);
        zsum += o[c];
      }
      for (int c = 0; c < out_; ++c) o[c] /= zsum;
      loss -= std::log(std::max(o[data.y[i]], 1e-300));

      // Backprop of the mean cross-entropy: delta_out = softmax - onehot.
      std::fill(dh.begin(), dh.end(), 0.0);
      for (int c = 0; c < out_; ++c) {
        const double dc = o[c] - (data.y[i] == c ? 1.0 : 0.0);
        double* w = &w2_[static_cast<std::size_t>(c) * hid];
        double* g = &dw2[static_cast<std::size_t>(c) * hid];
        for (int j = 0; j < hid; ++j) {
          g[j] += dc * h[j];
          dh[j] += dc * w[j];
        }
        db2[c] += dc;
      }
      for (int j = 0; j < hid; ++j) {
        const double dj = dh[j] * h[j] * (1.0 - h[j]);
        double* g = &dw1[static_cast<std::size_t>(j) * in_];
        for (int f = 0; f < in_; ++f) g[f] += dj * x[f];
        db1[j] += dj;
      }
    }

    loss /= n;
    if (!std::isfinite(loss))
      throw NonFiniteLoss("mlp: loss diverged at epoch " + std::to_string(epoch));
    loss_trace_.push_back(loss);

    auto step = [&](std::vector<double>& w, std::vector<double>& v,
                    const std::vector<double>& g) {
      for (std::size_t k = 0; k < w.size(); ++k) {
        v[k] = params_.momentum * v[k] - params_.learning_rate * g[k] / n;
        w[k] += v[k];
      }
    };
    step(w1_, vw1, dw1);
    step(b1_, vb1, db1);
    step(w2_, vw2, dw2);
    step(b2_, vb2, db2);
  }
}

std::vector<double> MlpModel::forward(const std::vector<double>& features) const {
  if (w1_.empty()) throw UntrainedModel("mlp: predict before train");
  if (static_cast<int>(features.size()) < in_)
    throw Error("mlp: feature vector narrower than training data");
  std::vector<double> h(params_.hidden), o(out_);
  for (int j = 0; j < params_.hidden; ++j) {
    double z = b1_[j];
    const double* w = &w1_[static_cast<std::size_t>(j) * in_];
    for (int f = 0; f < in_; ++f) z += w[f] * (features[f] - mean_[f]) / sd_[f];
    h[j] = sigmoid(z);
  }
  double zmax = -1e300;
  for (int c = 0; c < out_; ++c) {
    double z = b2_[c];
    const double* w = &w2_[static_cast<std::size_t>(c) * params_.hidden];
    for (int j = 0; j < params_.hidden; ++j) z += w[j] * h[j];
    o[c] = z;
    zmax = std::max(zmax, z);
  }
  double zsum = 0.0;
  for (int c = 0; c < out_; ++c) {
    o[c] = std::exp(o[c] - zmax);
    zsum += o[c];
  }
  for (int c = 0; c < out_; ++c) o[c] /= zsum;
  return o;
}

int MlpModel::predict(const std::vector<double>& features) const {
  const std::vector<double> o = forward(features);
  return static_cast<int>(std::max_element(o.begin(), o.end()) - o.begin());
}

double MlpModel::score(const std::vector<double>& features, int cls) const {
  if (cls < 0 || cls >= out_) return 0.0;
  return forward(features)[cls];
}

}  // namespace walksense
