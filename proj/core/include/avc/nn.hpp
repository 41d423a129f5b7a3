#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "avc/features.hpp"
#include "avc/rng.hpp"

namespace avc::nn {

struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> data;  // row-major

  static Tensor zeros(std::vector<size_t> shape);
  size_t size() const { return data.size(); }
};

// Parameter array plus its gradient accumulator.
struct ParamView {
  std::vector<double>* values = nullptr;
  std::vector<double>* grads = nullptr;
  std::string name;
};

// One layer of the fixed stack. forward caches whatever backward needs;
// backward accumulates parameter gradients (callers zero them per batch)
// and returns the gradient w.r.t. the layer input.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual Tensor forward(const Tensor& in, bool training, Rng& rng) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<ParamView> params() { return {}; }
};

enum class Activation { none, relu };

std::unique_ptr<Layer> make_conv1d(size_t in_channels, size_t out_channels,
                                   size_t kernel, Activation act);
std::unique_ptr<Layer> make_maxpool1d(size_t window = 2, size_t stride = 2);
std::unique_ptr<Layer> make_dense(size_t in, size_t out, Activation act);
std::unique_ptr<Layer> make_dropout(double p);
std::unique_ptr<Layer> make_flatten();
std::unique_ptr<Layer> make_relu();
std::unique_ptr<Layer> make_softmax();

struct Model {
  std::vector<std::unique_ptr<Layer>> layers;
  std::vector<size_t> input_shape;  // {channels, length}
  uint64_t rng_seed = 0;

  Tensor forward(const Tensor& in, bool training, Rng& rng);
  // Backpropagates starting at layer index `from` (inclusive, reverse order).
  Tensor backward(const Tensor& grad, size_t from);
  Tensor backward(const Tensor& grad);
  std::vector<ParamView> parameter_views();
  size_t parameter_count();
  void zero_grads();
  void set_dropout(double p);
};

struct ModelHyper {
  std::vector<size_t> conv_channels = {32, 64, 64, 128};
  size_t kernel = 3;
  std::vector<size_t> dense_widths = {256, 128, 4};
  double dropout_p = 0.3;
};

// Fixed stack: 4 x (conv1d + maxpool), flatten, dropout, dense, dropout,
// dense, dense, softmax. He-uniform weights from the seed, zero biases.
Model build_model(size_t in_channels, size_t in_length,
                  const ModelHyper& hyper = {}, uint64_t seed = 0);

struct AdamState {
  std::vector<double> m, v;
  int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update over a flat parameter array.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr);

// Replays the loss history (improvement = drop > min_delta below the best);
// returns the reduced rate when the last epoch completes a stall of
// `patience` epochs, otherwise current_lr.
double reduce_lr_on_plateau(std::span<const double> history, double current_lr,
                            int patience = 2, double factor = 0.1,
                            double min_lr = 1e-5, double min_delta = 1e-4);

double cross_entropy(std::span<const double> probs, size_t true_class);
std::vector<double> softmax(std::span<const double> logits);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double base_lr = 1e-3;
  double min_lr = 1e-5;
  int plateau_patience = 2;
  double plateau_factor = 0.1;
  double dropout_p = 0.3;
  uint64_t seed = 0;
  double validation_fraction = 0.1;
  double plateau_min_delta = 1e-4;
};

struct TrainExample {
  Tensor features;
  int label = 0;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> learning_rate;
  double wall_seconds = 0.0;
};

// Mini-batch Adam with per-epoch seeded shuffling and plateau scheduling on
// the validation loss. Deterministic for a fixed seed and input order.
TrainReport train(Model& model, std::vector<TrainExample> train_set,
                  std::vector<TrainExample> val_set, const TrainConfig& config);

// Carves a stratified validation_fraction slice out of `examples` first.
TrainReport train(Model& model, std::vector<TrainExample> examples,
                  const TrainConfig& config);

// Inference: probabilities over the 4 classes, dropout disabled.
std::vector<double> predict(Model& model, const FeatureMatrix& features);

Tensor to_tensor(const FeatureMatrix& features);  // coeffs become channels

void save_checkpoint(Model& model, const std::string& path,
                     const std::string& fingerprint = "",
                     const std::string& feature = "");
Model load_checkpoint(const std::string& path,
                      std::string* fingerprint = nullptr,
                      std::string* feature = nullptr);

}  // namespace avc::nn
