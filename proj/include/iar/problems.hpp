#pragma once

#include "iar/common.hpp"
#include "iar/finite_sum.hpp"

#include <memory>
#include <random>
#include <vector>

namespace iar {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Binary-labelled samples: one feature row per sample, labels in {0, 1}.
struct Dataset {
  FeatureMatrix features;
  Vector labels;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }

  /// Throws ContractError unless labels match rows and lie in {0, 1}.
  void validate() const;
};

/// Feed-forward layout: input_dim -> hidden_sizes... -> 1.
///
/// With no hidden layers the model is sigma(a^T x) without bias (n = d).
/// Otherwise every layer carries a bias and its parameters are stored as a
/// row-major weight block followed by the bias vector.
class NetworkSpec {
 public:
  struct Layer {
    Index in;
    Index out;
    Index weight_offset;
    Index bias_offset;  // -1 when the layer has no bias
  };

  NetworkSpec(Index input_dim, std::vector<Index> hidden_sizes = {});

  Index input_dim() const { return input_dim_; }
  const std::vector<Index>& hidden_sizes() const { return hidden_; }
  const std::vector<Layer>& layers() const { return layers_; }
  Index parameter_count() const { return parameter_count_; }
  bool is_linear() const { return hidden_.empty(); }

 private:
  Index input_dim_;
  std::vector<Index> hidden_;
  std::vector<Layer> layers_;
  Index parameter_count_ = 0;
};

/// Per-sample forward pass workspace; activations[0] is the input.
struct PredictionTrace {
  std::vector<Vector> activations;
  double output_pre = 0.0;
  double output = 0.5;
};

/// Logistic function with its argument clamped to [-500, 500].
double sigmoid(double z);

double predict(const NetworkSpec& spec, const Vector& x, const Eigen::Ref<const Vector>& a);

/// Forward pass retaining hidden activations for backpropagation.
void forward(const NetworkSpec& spec, const Vector& x, const Eigen::Ref<const Vector>& a,
             PredictionTrace& trace);

/// Zero for the linear model, Glorot-uniform weights and zero biases otherwise.
Vector initial_parameters(const NetworkSpec& spec, std::mt19937_64& engine);

/// Square loss f_i(x) = (y_i - net(a_i; x))^2 over a dataset.
class NetworkLossProblem final : public FiniteSumProblem {
 public:
  NetworkLossProblem(std::shared_ptr<const Dataset> data, NetworkSpec spec);

  Index dimension() const override { return spec_.parameter_count(); }
  Index size() const override { return data_->size(); }

  double component_value(Index i, const Vector& x) const override;
  Vector component_gradient(Index i, const Vector& x) const override;
  void accumulate_gradient(Index i, const Vector& x, Vector& sum) const override;

  const NetworkSpec& spec() const { return spec_; }
  const Dataset& data() const { return *data_; }

 private:
  void check(Index i, const Vector& x) const;

  std::shared_ptr<const Dataset> data_;
  NetworkSpec spec_;
};

/// Mean square loss on a held-out set.
double testing_loss(const NetworkSpec& spec, const Vector& x, const Dataset& test);

/// Fraction of samples where (net >= 0.5) agrees with (label == 1).
double classification_rate(const NetworkSpec& spec, const Vector& x, const Dataset& test);

}  // namespace iar
