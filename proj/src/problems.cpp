#include "iar/problems.hpp"

#include "iar/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace iar {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void Dataset::validate() const {
  detail::require_size(labels.size(), features.rows(), "dataset labels");
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw ContractError("dataset label at row " + std::to_string(i) + " is not 0 or 1");
    }
  }
}

NetworkSpec::NetworkSpec(Index input_dim, std::vector<Index> hidden_sizes)
    : input_dim_(input_dim), hidden_(std::move(hidden_sizes)) {
  if (input_dim_ < 1) throw ParameterError("network input dimension must be positive");
  if (hidden_.empty()) {
    layers_.push_back({input_dim_, 1, 0, -1});
    parameter_count_ = input_dim_;
    return;
  }
  Index in = input_dim_;
  Index offset = 0;
  auto add = [&](Index out) {
    layers_.push_back({in, out, offset, offset + in * out});
    offset += (in + 1) * out;
    in = out;
  };
  for (Index width : hidden_) {
    if (width < 1) throw ParameterError("hidden layer widths must be positive");
    add(width);
  }
  add(1);
  parameter_count_ = offset;
}

double sigmoid(double z) {
  if (!std::isfinite(z)) throw NumericalError("non-finite network output pre-activation");
  z = std::clamp(z, -500.0, 500.0);
  return 1.0 / (1.0 + std::exp(-z));
}

void forward(const NetworkSpec& spec, const Vector& x, const Eigen::Ref<const Vector>& a,
             PredictionTrace& trace) {
  detail::require_size(x.size(), spec.parameter_count(), "predict: parameters");
  detail::require_size(a.size(), spec.input_dim(), "predict: features");
  const auto& layers = spec.layers();
  trace.activations.resize(layers.size());
  trace.activations[0] = a;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const auto& layer = layers[l];
    Eigen::Map<const RowMajorMatrix> w(x.data() + layer.weight_offset, layer.out, layer.in);
    trace.activations[l + 1] =
        (w * trace.activations[l] + x.segment(layer.bias_offset, layer.out)).array().tanh();
  }
  const auto& last = layers.back();
  double z = x.segment(last.weight_offset, last.in).dot(trace.activations.back());
  if (last.bias_offset >= 0) z += x[last.bias_offset];
  trace.output_pre = z;
  trace.output = sigmoid(z);
}

double predict(const NetworkSpec& spec, const Vector& x, const Eigen::Ref<const Vector>& a) {
  if (spec.is_linear()) {
    detail::require_size(x.size(), spec.parameter_count(), "predict: parameters");
    detail::require_size(a.size(), spec.input_dim(), "predict: features");
    return sigmoid(a.dot(x));
  }
  PredictionTrace trace;
  forward(spec, x, a, trace);
  return trace.output;
}

Vector initial_parameters(const NetworkSpec& spec, std::mt19937_64& engine) {
  Vector x = Vector::Zero(spec.parameter_count());
  if (spec.is_linear()) return x;
  for (const auto& layer : spec.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    for (Index k = 0; k < layer.in * layer.out; ++k) {
      x[layer.weight_offset + k] = limit * (2.0 * uniform_real(engine) - 1.0);
    }
  }
  return x;
}

NetworkLossProblem::NetworkLossProblem(std::shared_ptr<const Dataset> data, NetworkSpec spec)
    : data_(std::move(data)), spec_(std::move(spec)) {
  detail::require(data_ != nullptr, "NetworkLossProblem: null dataset");
  detail::require_size(data_->dim(), spec_.input_dim(), "NetworkLossProblem: feature dimension");
  data_->validate();
}

void NetworkLossProblem::check(Index i, const Vector& x) const {
  detail::check_index(*this, i);
  detail::require_size(x.size(), spec_.parameter_count(), "parameters");
}

double NetworkLossProblem::component_value(Index i, const Vector& x) const {
  check(i, x);
  const double r = data_->labels[i] - predict(spec_, x, data_->features.row(i).transpose());
  return r * r;
}

Vector NetworkLossProblem::component_gradient(Index i, const Vector& x) const {
  Vector g = Vector::Zero(x.size());
  accumulate_gradient(i, x, g);
  return g;
}

void NetworkLossProblem::accumulate_gradient(Index i, const Vector& x, Vector& sum) const {
  check(i, x);
  const auto a = data_->features.row(i).transpose();
  const double y = data_->labels[i];

  if (spec_.is_linear()) {
    const double p = sigmoid(a.dot(x));
    sum.noalias() += (-2.0 * (y - p) * p * (1.0 - p)) * a;
    return;
  }

  PredictionTrace trace;
  forward(spec_, x, a, trace);
  const double p = trace.output;
  const auto& layers = spec_.layers();

  // dL/dz at the output, then propagated back through the tanh layers.
  Vector delta(1);
  delta[0] = -2.0 * (y - p) * p * (1.0 - p);
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const Vector& input = trace.activations[l];
    Eigen::Map<RowMajorMatrix> grad_w(sum.data() + layer.weight_offset, layer.out, layer.in);
    grad_w.noalias() += delta * input.transpose();
    sum.segment(layer.bias_offset, layer.out) += delta;
    if (l == 0) break;
    Eigen::Map<const RowMajorMatrix> w(x.data() + layer.weight_offset, layer.out, layer.in);
    Vector back = w.transpose() * delta;
    delta = back.array() * (1.0 - input.array().square());
  }
}

double testing_loss(const NetworkSpec& spec, const Vector& x, const Dataset& test) {
  detail::require_size(test.dim(), spec.input_dim(), "testing_loss: feature dimension");
  detail::require(test.size() > 0, "testing_loss: empty dataset");
  double sum = 0.0;
  for (Index i = 0; i < test.size(); ++i) {
    const double r = test.labels[i] - predict(spec, x, test.features.row(i).transpose());
    sum += r * r;
  }
  return sum / static_cast<double>(test.size());
}

double classification_rate(const NetworkSpec& spec, const Vector& x, const Dataset& test) {
  detail::require_size(test.dim(), spec.input_dim(), "classification_rate: feature dimension");
  if (test.size() == 0) throw ContractError("classification_rate: empty dataset");
  Index correct = 0;
  for (Index i = 0; i < test.size(); ++i) {
    const bool positive = predict(spec, x, test.features.row(i).transpose()) >= 0.5;
    if (positive == (test.labels[i] == 1.0)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace iar
