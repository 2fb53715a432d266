#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rantl/config.hpp"

namespace rantl {

namespace detail {
struct DenseLayout {
  int in, out;
  std::size_t w, b;  // offsets; b unused without bias
};
struct LstmLayout {
  int in, width;
  std::size_t wx, wh, b;
};
struct Layout {
  bool has_lstm = false;
  LstmLayout lstm{};
  std::vector<DenseLayout> dense;  // hidden tanh layers, then the linear output
  std::size_t total = 0;
};
}  // namespace detail

/// Network shape. Dense kind: tanh hidden layers of the given widths, then a
/// linear output. LSTM kind: hidden[0] is an LSTM cell (gate order i, f, g, o),
/// the remaining widths are tanh dense layers, then a linear output.
struct QNetTopology {
  int input_dim = 4;
  std::vector<int> hidden{30, 30};
  int output_dim = 121;
  CellKind cell = CellKind::dense;
  bool bias = true;

  bool operator==(const QNetTopology&) const = default;
  std::size_t parameter_count() const;
};

/// One regression target on the output of `action`. `inputs` holds `steps`
/// consecutive input vectors (row-major); dense nets require steps == 1,
/// recurrent nets unroll from a zero state and are scored on the last step.
struct TdSample {
  std::span<const double> inputs;
  int steps = 1;
  int action = 0;
  double target = 0.0;
};

struct AdamParams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Small MLP / LSTM Q-function approximator with exact backpropagation.
///
/// Parameters are one flat vector. Per layer, in order: dense layers store
/// W (out x in, row-major) then b (out); the LSTM stores W_x (4H x in), W_h
/// (4H x H) then b (4H). Bias blocks are absent when `bias` is false.
class QNet {
 public:
  /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)); zero biases.
  QNet(QNetTopology topology, std::uint64_t seed, AdamParams adam = {});
  static QNet zeros(QNetTopology topology, AdamParams adam = {});

  const QNetTopology& topology() const noexcept { return topo_; }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  /// Action values for one input. LSTM kind consumes the input as the next
  /// step of its running hidden state.
  std::vector<double> forward(std::span<const double> input);
  void reset_state();

  /// Action values after unrolling `steps` inputs from a zero state. Leaves
  /// the running state untouched.
  std::vector<double> evaluate(std::span<const double> inputs, int steps) const;

  /// Mean squared error of the chosen-action outputs over the batch.
  double loss(std::span<const TdSample> batch) const;
  /// Analytic gradient of loss() with respect to parameters().
  std::vector<double> gradient(std::span<const TdSample> batch) const;

  /// One Adam step on loss(); returns the pre-step loss. Rejects non-finite
  /// targets (naming the sample) and updates that would leave a non-finite
  /// parameter.
  double train_step(std::span<const TdSample> batch);

  /// Copy parameters from an identically shaped net. Optimizer and recurrent
  /// state of the target are left as they are.
  void sync_from(const QNet& source);

  void save(std::ostream& out) const;
  static QNet load(std::istream& in);

 private:
  struct Cache;
  double run(std::span<const double> inputs, int steps, int action, Cache* cache) const;
  void backprop(const Cache& cache, std::span<const double> inputs, int steps, int action,
                double dloss, std::vector<double>& grad) const;
  void check_input(std::span<const double> inputs, int steps) const;

  QNetTopology topo_;
  detail::Layout layout_;
  AdamParams adam_;
  std::vector<double> params_;
  std::vector<double> adam_m_;
  std::vector<double> adam_v_;
  long adam_t_ = 0;
  std::vector<double> h_;  // running LSTM state
  std::vector<double> c_;
};

/// Max relative error between the analytic gradient and central differences
/// with step h. Relative error is |a - n| / max(|a|, |n|, floor).
double grad_check(QNet& net, const TdSample& sample, double h = 1e-5, double floor = 1e-7);

}  // namespace rantl
