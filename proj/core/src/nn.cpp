#include "avc/nn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "avc/errors.hpp"

namespace avc::nn {

using json = nlohmann::json;

Tensor Tensor::zeros(std::vector<size_t> shape) {
  size_t n = 1;
  for (const size_t d : shape) n *= d;
  Tensor t;
  t.shape = std::move(shape);
  t.data.assign(n, 0.0);
  return t;
}

namespace {

void check(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

double apply_act(double x, Activation act) {
  return act == Activation::relu ? (x > 0.0 ? x : 0.0) : x;
}

class Conv1d final : public Layer {
 public:
  Conv1d(size_t in_ch, size_t out_ch, size_t kernel, Activation act)
      : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), act_(act),
        weights_(out_ch * in_ch * kernel, 0.0), bias_(out_ch, 0.0),
        grad_weights_(weights_.size(), 0.0), grad_bias_(bias_.size(), 0.0) {}

  std::string kind() const override { return "conv1d"; }

  Tensor forward(const Tensor& in, bool, Rng&) override {
    check(in.shape.size() == 2 && in.shape[0] == in_ch_,
          "conv1d: expected input shape {" + std::to_string(in_ch_) + ", L}");
    const size_t len = in.shape[1];
    check(len >= kernel_, "conv1d: input shorter than kernel");
    const size_t out_len = len - kernel_ + 1;

    input_ = in;
    Tensor out = Tensor::zeros({out_ch_, out_len});
    for (size_t o = 0; o < out_ch_; ++o) {
      double* dst = out.data.data() + o * out_len;
      for (size_t i = 0; i < out_len; ++i) dst[i] = bias_[o];
      for (size_t c = 0; c < in_ch_; ++c) {
        const double* src = in.data.data() + c * len;
        const double* w = weights_.data() + (o * in_ch_ + c) * kernel_;
        for (size_t j = 0; j < kernel_; ++j) {
          const double wj = w[j];
          const double* s = src + j;
          for (size_t i = 0; i < out_len; ++i) dst[i] += wj * s[i];
        }
      }
      if (act_ == Activation::relu) {
        for (size_t i = 0; i < out_len; ++i) dst[i] = apply_act(dst[i], act_);
      }
    }
    output_ = out;
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    const size_t len = input_.shape[1];
    const size_t out_len = len - kernel_ + 1;
    check(grad_out.shape.size() == 2 && grad_out.shape[0] == out_ch_ &&
              grad_out.shape[1] == out_len,
          "conv1d: gradient shape mismatch");

    Tensor g = grad_out;
    if (act_ == Activation::relu) {
      for (size_t i = 0; i < g.data.size(); ++i) {
        if (output_.data[i] <= 0.0) g.data[i] = 0.0;
      }
    }

    Tensor grad_in = Tensor::zeros(input_.shape);
    for (size_t o = 0; o < out_ch_; ++o) {
      const double* go = g.data.data() + o * out_len;
      double acc_b = 0.0;
      for (size_t i = 0; i < out_len; ++i) acc_b += go[i];
      grad_bias_[o] += acc_b;
      for (size_t c = 0; c < in_ch_; ++c) {
        const double* src = input_.data.data() + c * len;
        double* gw = grad_weights_.data() + (o * in_ch_ + c) * kernel_;
        double* gi = grad_in.data.data() + c * len;
        const double* w = weights_.data() + (o * in_ch_ + c) * kernel_;
        for (size_t j = 0; j < kernel_; ++j) {
          double acc = 0.0;
          const double* s = src + j;
          double* gij = gi + j;
          const double wj = w[j];
          for (size_t i = 0; i < out_len; ++i) {
            acc += go[i] * s[i];
            gij[i] += wj * go[i];
          }
          gw[j] += acc;
        }
      }
    }
    return grad_in;
  }

  std::vector<ParamView> params() override {
    return {{&weights_, &grad_weights_, "weights"}, {&bias_, &grad_bias_, "bias"}};
  }

  size_t in_ch_, out_ch_, kernel_;
  Activation act_;
  std::vector<double> weights_, bias_, grad_weights_, grad_bias_;
  Tensor input_, output_;
};

class MaxPool1d final : public Layer {
 public:
  MaxPool1d(size_t window, size_t stride) : window_(window), stride_(stride) {}

  std::string kind() const override { return "maxpool1d"; }

  Tensor forward(const Tensor& in, bool, Rng&) override {
    check(in.shape.size() == 2, "maxpool1d: expected {C, L} input");
    const size_t ch = in.shape[0], len = in.shape[1];
    check(len >= window_, "maxpool1d: input shorter than window");
    const size_t out_len = (len - window_) / stride_ + 1;

    in_shape_ = in.shape;
    argmax_.assign(ch * out_len, 0);
    Tensor out = Tensor::zeros({ch, out_len});
    for (size_t c = 0; c < ch; ++c) {
      const double* src = in.data.data() + c * len;
      for (size_t i = 0; i < out_len; ++i) {
        const size_t base = i * stride_;
        size_t best = base;
        double best_v = src[base];
        for (size_t j = 1; j < window_; ++j) {
          // first argmax wins on ties
          if (src[base + j] > best_v) {
            best_v = src[base + j];
            best = base + j;
          }
        }
        out.data[c * out_len + i] = best_v;
        argmax_[c * out_len + i] = best;
      }
    }
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    const size_t ch = in_shape_[0], len = in_shape_[1];
    const size_t out_len = (len - window_) / stride_ + 1;
    check(grad_out.shape.size() == 2 && grad_out.shape[0] == ch &&
              grad_out.shape[1] == out_len,
          "maxpool1d: gradient shape mismatch");
    Tensor grad_in = Tensor::zeros(in_shape_);
    for (size_t c = 0; c < ch; ++c) {
      for (size_t i = 0; i < out_len; ++i) {
        grad_in.data[c * len + argmax_[c * out_len + i]] +=
            grad_out.data[c * out_len + i];
      }
    }
    return grad_in;
  }

  size_t window_, stride_;
  std::vector<size_t> in_shape_;
  std::vector<size_t> argmax_;
};

class Dense final : public Layer {
 public:
  Dense(size_t in, size_t out, Activation act)
      : in_(in), out_(out), act_(act), weights_(out * in, 0.0), bias_(out, 0.0),
        grad_weights_(weights_.size(), 0.0), grad_bias_(bias_.size(), 0.0) {}

  std::string kind() const override { return "dense"; }

  Tensor forward(const Tensor& in, bool, Rng&) override {
    check(in.data.size() == in_, "dense: expected input of size " +
                                     std::to_string(in_) + ", got " +
                                     std::to_string(in.data.size()));
    input_ = in;
    Tensor out = Tensor::zeros({out_});
    for (size_t o = 0; o < out_; ++o) {
      const double* w = weights_.data() + o * in_;
      double acc = bias_[o];
      for (size_t i = 0; i < in_; ++i) acc += w[i] * in.data[i];
      out.data[o] = apply_act(acc, act_);
    }
    output_ = out;
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    check(grad_out.data.size() == out_, "dense: gradient shape mismatch");
    Tensor g = grad_out;
    if (act_ == Activation::relu) {
      for (size_t o = 0; o < out_; ++o) {
        if (output_.data[o] <= 0.0) g.data[o] = 0.0;
      }
    }
    Tensor grad_in = Tensor::zeros({in_});
    for (size_t o = 0; o < out_; ++o) {
      const double go = g.data[o];
      grad_bias_[o] += go;
      double* gw = grad_weights_.data() + o * in_;
      const double* w = weights_.data() + o * in_;
      for (size_t i = 0; i < in_; ++i) {
        gw[i] += go * input_.data[i];
        grad_in.data[i] += go * w[i];
      }
    }
    return grad_in;
  }

  std::vector<ParamView> params() override {
    return {{&weights_, &grad_weights_, "weights"}, {&bias_, &grad_bias_, "bias"}};
  }

  size_t in_, out_;
  Activation act_;
  std::vector<double> weights_, bias_, grad_weights_, grad_bias_;
  Tensor input_, output_;
};

class Dropout final : public Layer {
 public:
  explicit Dropout(double p) : p_(p) {
    check(p >= 0.0 && p < 1.0, "dropout: p must be in [0, 1)");
  }

  std::string kind() const override { return "dropout"; }

  Tensor forward(const Tensor& in, bool training, Rng& rng) override {
    Tensor out = in;
    mask_.assign(in.data.size(), 1.0);
    if (training && p_ > 0.0) {
      const double keep = 1.0 / (1.0 - p_);
      for (size_t i = 0; i < out.data.size(); ++i) {
        if (rng.uniform() < p_) {
          mask_[i] = 0.0;
          out.data[i] = 0.0;
        } else {
          mask_[i] = keep;
          out.data[i] *= keep;
        }
      }
    }
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    Tensor grad_in = grad_out;
    for (size_t i = 0; i < grad_in.data.size(); ++i) grad_in.data[i] *= mask_[i];
    return grad_in;
  }

  double p_;
  std::vector<double> mask_;
};

class Flatten final : public Layer {
 public:
  std::string kind() const override { return "flatten"; }

  Tensor forward(const Tensor& in, bool, Rng&) override {
    in_shape_ = in.shape;
    Tensor out = in;
    out.shape = {in.data.size()};
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    Tensor grad_in = grad_out;
    grad_in.shape = in_shape_;
    return grad_in;
  }

  std::vector<size_t> in_shape_;
};

class Relu final : public Layer {
 public:
  std::string kind() const override { return "relu"; }

  Tensor forward(const Tensor& in, bool, Rng&) override {
    Tensor out = in;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    output_ = out;
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    Tensor grad_in = grad_out;
    for (size_t i = 0; i < grad_in.data.size(); ++i) {
      if (output_.data[i] <= 0.0) grad_in.data[i] = 0.0;
    }
    return grad_in;
  }

  Tensor output_;
};

class Softmax final : public Layer {
 public:
  std::string kind() const override { return "softmax"; }

  Tensor forward(const Tensor& in, bool, Rng&) override {
    Tensor out = in;
    out.data = softmax(in.data);
    output_ = out;
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    // J^T g with J = diag(p) - p p^T
    const auto& p = output_.data;
    double dot = 0.0;
    for (size_t i = 0; i < p.size(); ++i) dot += grad_out.data[i] * p[i];
    Tensor grad_in = grad_out;
    for (size_t i = 0; i < p.size(); ++i) {
      grad_in.data[i] = p[i] * (grad_out.data[i] - dot);
    }
    return grad_in;
  }

  Tensor output_;
};

}  // namespace

std::unique_ptr<Layer> make_conv1d(size_t in_channels, size_t out_channels,
                                   size_t kernel, Activation act) {
  return std::make_unique<Conv1d>(in_channels, out_channels, kernel, act);
}
std::unique_ptr<Layer> make_maxpool1d(size_t window, size_t stride) {
  return std::make_unique<MaxPool1d>(window, stride);
}
std::unique_ptr<Layer> make_dense(size_t in, size_t out, Activation act) {
  return std::make_unique<Dense>(in, out, act);
}
std::unique_ptr<Layer> make_dropout(double p) {
  return std::make_unique<Dropout>(p);
}
std::unique_ptr<Layer> make_flatten() { return std::make_unique<Flatten>(); }
std::unique_ptr<Layer> make_relu() { return std::make_unique<Relu>(); }
std::unique_ptr<Layer> make_softmax() { return std::make_unique<Softmax>(); }

Tensor Model::forward(const Tensor& in, bool training, Rng& rng) {
  Tensor x = in;
  for (auto& layer : layers) x = layer->forward(x, training, rng);
  return x;
}

Tensor Model::backward(const Tensor& grad, size_t from) {
  Tensor g = grad;
  for (size_t i = from + 1; i-- > 0;) {
    g = layers[i]->backward(g);
  }
  return g;
}

Tensor Model::backward(const Tensor& grad) {
  return backward(grad, layers.size() - 1);
}

std::vector<ParamView> Model::parameter_views() {
  std::vector<ParamView> views;
  for (auto& layer : layers) {
    for (auto& v : layer->params()) views.push_back(v);
  }
  return views;
}

size_t Model::parameter_count() {
  size_t n = 0;
  for (const auto& v : parameter_views()) n += v.values->size();
  return n;
}

void Model::zero_grads() {
  for (const auto& v : parameter_views()) {
    std::fill(v.grads->begin(), v.grads->end(), 0.0);
  }
}

void Model::set_dropout(double p) {
  for (auto& layer : layers) {
    if (auto* d = dynamic_cast<Dropout*>(layer.get())) d->p_ = p;
  }
}

namespace {

// Shape simulation for the fixed stack; throws when a stage underflows.
size_t simulate_length(size_t in_length, size_t n_blocks, size_t kernel) {
  size_t len = in_length;
  for (size_t b = 0; b < n_blocks; ++b) {
    if (len < kernel) {
      throw InvalidArgument("build_model: input length " +
                            std::to_string(in_length) +
                            " underflows at conv block " + std::to_string(b + 1));
    }
    len = len - kernel + 1;
    if (len < 2) {
      throw InvalidArgument("build_model: input length " +
                            std::to_string(in_length) +
                            " underflows at pool block " + std::to_string(b + 1));
    }
    len = len / 2;
  }
  return len;
}

void he_uniform_init(Model& model, uint64_t seed) {
  Rng rng(seed);
  for (auto& layer : model.layers) {
    size_t fan_in = 0;
    if (auto* c = dynamic_cast<Conv1d*>(layer.get())) {
      fan_in = c->in_ch_ * c->kernel_;
    } else if (auto* d = dynamic_cast<Dense*>(layer.get())) {
      fan_in = d->in_;
    } else {
      continue;
    }
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    auto views = layer->params();
    for (double& w : *views[0].values) w = rng.uniform(-limit, limit);
    // biases stay zero
  }
}

}  // namespace

Model build_model(size_t in_channels, size_t in_length, const ModelHyper& hyper,
                  uint64_t seed) {
  check(hyper.conv_channels.size() == 4, "build_model: expected 4 conv widths");
  check(hyper.dense_widths.size() == 3, "build_model: expected 3 dense widths");
  check(hyper.dense_widths.back() == 4, "build_model: output width must be 4");

  const size_t final_len =
      simulate_length(in_length, hyper.conv_channels.size(), hyper.kernel);
  const size_t flat = final_len * hyper.conv_channels.back();

  Model model;
  model.input_shape = {in_channels, in_length};
  model.rng_seed = seed;

  size_t ch = in_channels;
  for (const size_t out_ch : hyper.conv_channels) {
    model.layers.push_back(make_conv1d(ch, out_ch, hyper.kernel, Activation::relu));
    model.layers.push_back(make_maxpool1d());
    ch = out_ch;
  }
  model.layers.push_back(make_flatten());
  model.layers.push_back(make_dropout(hyper.dropout_p));
  model.layers.push_back(make_dense(flat, hyper.dense_widths[0], Activation::relu));
  model.layers.push_back(make_dropout(hyper.dropout_p));
  model.layers.push_back(
      make_dense(hyper.dense_widths[0], hyper.dense_widths[1], Activation::relu));
  model.layers.push_back(
      make_dense(hyper.dense_widths[1], hyper.dense_widths[2], Activation::none));
  model.layers.push_back(make_softmax());

  he_uniform_init(model, seed);
  return model;
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr) {
  check(params.size() == grads.size(), "adam_step: size mismatch");
  if (state.m.size() != params.size()) {
    check(state.m.empty() && state.t == 0,
          "adam_step: state size does not match parameters");
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

namespace {

struct PlateauState {
  double best = std::numeric_limits<double>::infinity();
  int wait = 0;
  bool first = true;

  // Returns the (possibly reduced) learning rate after observing `loss`.
  double step(double loss, double lr, int patience, double factor,
              double min_lr, double min_delta) {
    if (first) {
      best = loss;
      first = false;
      return lr;
    }
    if (loss < best - min_delta) {
      best = loss;
      wait = 0;
      return lr;
    }
    ++wait;
    if (wait >= patience) {
      wait = 0;
      return std::max(lr * factor, min_lr);
    }
    return lr;
  }
};

}  // namespace

double reduce_lr_on_plateau(std::span<const double> history, double current_lr,
                            int patience, double factor, double min_lr,
                            double min_delta) {
  check(!history.empty(), "reduce_lr_on_plateau: empty history");
  PlateauState state;
  double lr = current_lr;
  for (size_t i = 0; i + 1 < history.size(); ++i) {
    // replay earlier epochs only for the stall counter; lr already reflects
    // any past reductions via current_lr
    state.step(history[i], lr, patience, factor, min_lr, min_delta);
  }
  return state.step(history.back(), current_lr, patience, factor, min_lr,
                    min_delta);
}

std::vector<double> softmax(std::span<const double> logits) {
  check(!logits.empty(), "softmax: empty input");
  double mx = -std::numeric_limits<double>::infinity();
  for (const double v : logits) mx = std::max(mx, v);
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double cross_entropy(std::span<const double> probs, size_t true_class) {
  check(true_class < probs.size(), "cross_entropy: class out of range");
  return -std::log(std::max(probs[true_class], 1e-12));
}

namespace {

std::vector<size_t> stratified_val_indices(
    const std::vector<TrainExample>& examples, double fraction, uint64_t seed) {
  Rng rng(seed);
  std::map<int, std::vector<size_t>> groups;
  for (size_t i = 0; i < examples.size(); ++i) {
    groups[examples[i].label].push_back(i);
  }
  std::vector<size_t> val;
  for (auto& [label, idx] : groups) {
    (void)label;
    const auto take = static_cast<size_t>(
        std::llround(fraction * static_cast<double>(idx.size())));
    rng.shuffle(idx);
    for (size_t j = 0; j < take; ++j) val.push_back(idx[j]);
  }
  std::sort(val.begin(), val.end());
  return val;
}

double mean_loss(Model& model, const std::vector<TrainExample>& set, Rng& rng) {
  if (set.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& ex : set) {
    const Tensor probs = model.forward(ex.features, false, rng);
    acc += cross_entropy(probs.data, static_cast<size_t>(ex.label));
  }
  return acc / static_cast<double>(set.size());
}

// Locates the first layer whose forward output is non-finite, for the NaN
// abort diagnostic.
std::string first_nonfinite_layer(Model& model, const Tensor& x, Rng& rng) {
  Tensor cur = x;
  for (size_t i = 0; i < model.layers.size(); ++i) {
    cur = model.layers[i]->forward(cur, false, rng);
    for (const double v : cur.data) {
      if (!std::isfinite(v)) {
        return "layer " + std::to_string(i) + " (" + model.layers[i]->kind() + ")";
      }
    }
  }
  return "loss";
}

}  // namespace

TrainReport train(Model& model, std::vector<TrainExample> train_set,
                  std::vector<TrainExample> val_set, const TrainConfig& config) {
  if (train_set.empty()) throw InvalidArgument("train: empty training set");
  check(config.epochs >= 0, "train: epochs must be >= 0");
  check(config.batch_size >= 1, "train: batch_size must be >= 1");
  check(config.min_lr > 0.0 && config.min_lr <= config.base_lr,
        "train: need 0 < min_lr <= base_lr");
  check(config.dropout_p >= 0.0 && config.dropout_p < 1.0,
        "train: dropout_p must be in [0, 1)");
  check(config.plateau_factor > 0.0 && config.plateau_factor <= 1.0,
        "train: plateau_factor must be in (0, 1]");

  const auto start = std::chrono::steady_clock::now();
  TrainReport report;
  if (config.epochs == 0) return report;

  model.set_dropout(config.dropout_p);
  Rng rng(config.seed);
  AdamState adam(model.parameter_count());
  auto views = model.parameter_views();
  std::vector<double> flat_params(adam.m.size());
  std::vector<double> flat_grads(adam.m.size());

  auto gather = [&](bool params_too) {
    size_t off = 0;
    for (const auto& v : views) {
      if (params_too) {
        std::copy(v.values->begin(), v.values->end(), flat_params.begin() + off);
      }
      std::copy(v.grads->begin(), v.grads->end(), flat_grads.begin() + off);
      off += v.values->size();
    }
  };
  auto scatter = [&]() {
    size_t off = 0;
    for (const auto& v : views) {
      std::copy(flat_params.begin() + off,
                flat_params.begin() + off + static_cast<ptrdiff_t>(v.values->size()),
                v.values->begin());
      off += v.values->size();
    }
  };

  const size_t n = train_set.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  PlateauState plateau;
  double lr = config.base_lr;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    const size_t batch = static_cast<size_t>(config.batch_size);
    for (size_t b0 = 0; b0 < n; b0 += batch) {
      const size_t b1 = std::min(n, b0 + batch);
      const double inv = 1.0 / static_cast<double>(b1 - b0);
      model.zero_grads();
      for (size_t i = b0; i < b1; ++i) {
        const auto& ex = train_set[order[i]];
        const Tensor probs = model.forward(ex.features, true, rng);
        const double loss = cross_entropy(probs.data, static_cast<size_t>(ex.label));
        if (!std::isfinite(loss)) {
          throw TrainError("train: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(b0 / batch) + "; first non-finite at " +
                           first_nonfinite_layer(model, ex.features, rng));
        }
        epoch_loss += loss;
        // fused softmax + cross-entropy gradient
        Tensor dlogits = probs;
        for (size_t c = 0; c < dlogits.data.size(); ++c) {
          const double y = c == static_cast<size_t>(ex.label) ? 1.0 : 0.0;
          dlogits.data[c] = (dlogits.data[c] - y) * inv;
        }
        model.backward(dlogits, model.layers.size() - 2);
      }
      gather(true);
      adam_step(flat_params, flat_grads, adam, lr);
      scatter();
    }

    const double train_loss = epoch_loss / static_cast<double>(n);
    const double val_loss =
        val_set.empty() ? train_loss : mean_loss(model, val_set, rng);
    report.train_loss.push_back(train_loss);
    report.val_loss.push_back(val_loss);
    report.learning_rate.push_back(lr);
    lr = plateau.step(val_loss, lr, config.plateau_patience,
                      config.plateau_factor, config.min_lr,
                      config.plateau_min_delta);
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

TrainReport train(Model& model, std::vector<TrainExample> examples,
                  const TrainConfig& config) {
  std::vector<TrainExample> train_set, val_set;
  if (config.validation_fraction > 0.0 && examples.size() > 1) {
    const auto val_idx = stratified_val_indices(
        examples, config.validation_fraction, config.seed);
    size_t next = 0;
    for (size_t i = 0; i < examples.size(); ++i) {
      if (next < val_idx.size() && val_idx[next] == i) {
        val_set.push_back(std::move(examples[i]));
        ++next;
      } else {
        train_set.push_back(std::move(examples[i]));
      }
    }
  } else {
    train_set = std::move(examples);
  }
  return train(model, std::move(train_set), std::move(val_set), config);
}

Tensor to_tensor(const FeatureMatrix& fm) {
  Tensor t = Tensor::zeros({fm.n_coeffs, fm.n_frames});
  for (size_t c = 0; c < fm.n_coeffs; ++c) {
    for (size_t f = 0; f < fm.n_frames; ++f) {
      t.data[c * fm.n_frames + f] = fm.at(f, c);
    }
  }
  return t;
}

std::vector<double> predict(Model& model, const FeatureMatrix& features) {
  const Tensor x = to_tensor(features);
  if (x.shape != model.input_shape) {
    throw InvalidArgument("predict: feature shape {" +
                          std::to_string(x.shape[0]) + ", " +
                          std::to_string(x.shape[1]) +
                          "} does not match model input {" +
                          std::to_string(model.input_shape[0]) + ", " +
                          std::to_string(model.input_shape[1]) + "}");
  }
  Rng rng(0);  // unused in inference
  return model.forward(x, false, rng).data;
}

namespace {

constexpr char kCheckpointMagic[8] = {'A', 'V', 'C', 'M', '0', '0', '0', '1'};

json describe_layer(Layer* layer) {
  json j;
  j["kind"] = layer->kind();
  if (auto* c = dynamic_cast<Conv1d*>(layer)) {
    j["in_channels"] = c->in_ch_;
    j["out_channels"] = c->out_ch_;
    j["kernel"] = c->kernel_;
    j["activation"] = c->act_ == Activation::relu ? "relu" : "none";
  } else if (auto* p = dynamic_cast<MaxPool1d*>(layer)) {
    j["window"] = p->window_;
    j["stride"] = p->stride_;
  } else if (auto* d = dynamic_cast<Dense*>(layer)) {
    j["in"] = d->in_;
    j["out"] = d->out_;
    j["activation"] = d->act_ == Activation::relu ? "relu" : "none";
  } else if (auto* dr = dynamic_cast<Dropout*>(layer)) {
    j["p"] = dr->p_;
  }
  return j;
}

std::unique_ptr<Layer> layer_from_json(const json& j) {
  const std::string kind = j.at("kind");
  const auto act = [&]() {
    return j.value("activation", "none") == std::string("relu")
               ? Activation::relu
               : Activation::none;
  };
  if (kind == "conv1d") {
    return make_conv1d(j.at("in_channels"), j.at("out_channels"), j.at("kernel"),
                       act());
  }
  if (kind == "maxpool1d") return make_maxpool1d(j.at("window"), j.at("stride"));
  if (kind == "dense") return make_dense(j.at("in"), j.at("out"), act());
  if (kind == "dropout") return make_dropout(j.at("p"));
  if (kind == "flatten") return make_flatten();
  if (kind == "relu") return make_relu();
  if (kind == "softmax") return make_softmax();
  throw InvalidArgument("checkpoint: unknown layer kind '" + kind + "'");
}

}  // namespace

void save_checkpoint(Model& model, const std::string& path,
                     const std::string& fingerprint, const std::string& feature) {
  json header;
  header["input_shape"] = model.input_shape;
  header["seed"] = model.rng_seed;
  if (!fingerprint.empty()) header["config_fingerprint"] = fingerprint;
  if (!feature.empty()) header["feature"] = feature;
  json layers = json::array();
  for (auto& layer : model.layers) layers.push_back(describe_layer(layer.get()));
  header["layers"] = layers;

  const std::string head = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  const uint32_t head_len = static_cast<uint32_t>(head.size());
  out.write(reinterpret_cast<const char*>(&head_len), 4);
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (auto& layer : model.layers) {
    for (const auto& v : layer->params()) {
      for (const double d : *v.values) {
        const float f = static_cast<float>(d);
        out.write(reinterpret_cast<const char*>(&f), 4);
      }
    }
  }
  if (!out) throw IoError("short write: " + path);
}

Model load_checkpoint(const std::string& path, std::string* fingerprint,
                      std::string* feature) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw DecodeError("not an avc checkpoint: " + path);
  }
  uint32_t head_len = 0;
  in.read(reinterpret_cast<char*>(&head_len), 4);
  std::string head(head_len, '\0');
  in.read(head.data(), head_len);
  if (!in) throw DecodeError("truncated checkpoint header: " + path);

  json header = json::parse(head);
  Model model;
  model.input_shape = header.at("input_shape").get<std::vector<size_t>>();
  model.rng_seed = header.at("seed").get<uint64_t>();
  if (fingerprint) *fingerprint = header.value("config_fingerprint", "");
  if (feature) *feature = header.value("feature", "");
  for (const auto& j : header.at("layers")) {
    model.layers.push_back(layer_from_json(j));
  }
  for (auto& layer : model.layers) {
    for (const auto& v : layer->params()) {
      for (double& d : *v.values) {
        float f = 0.0f;
        in.read(reinterpret_cast<char*>(&f), 4);
        d = static_cast<double>(f);
      }
    }
  }
  if (!in) throw DecodeError("truncated checkpoint payload: " + path);
  return model;
}

}  // namespace avc::nn
