#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "ecgf/scores.hpp"

namespace ecgf::nn {

/// Channels x height x width, stored channel-major then row-major. 1D signals
/// use height 1.
struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

enum class LayerKind : std::uint32_t { conv2d = 1, relu = 2, max_pool = 3, flatten = 4, dense = 5, softmax = 6 };

const char* to_string(LayerKind kind);

/// A layer owns its parameters (weights first, then biases) and is otherwise
/// stateless: activations and caches live in the caller's workspace.
template <typename T>
class Layer {
 public:
  Layer(Shape in, Shape out) : in_(in), out_(out) {}
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

  /// Kind-specific construction arguments, enough to rebuild the layer from
  /// its input shape.
  virtual std::array<std::uint32_t, 3> descriptor() const { return {0, 0, 0}; }

  /// `cache` is per-sample scratch the matching backward call gets back.
  virtual void forward(std::span<const T> in, std::span<T> out, std::vector<T>& cache) const = 0;

  /// Adds parameter gradients into `grad`. Writes dL/din into `din` unless it
  /// is empty. `scratch` is free for temporaries.
  virtual void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din,
                        const std::vector<T>& cache, std::vector<T>& scratch, std::span<T> grad) const = 0;

  Shape input_shape() const noexcept { return in_; }
  Shape output_shape() const noexcept { return out_; }

  std::span<T> params() noexcept { return params_; }
  std::span<const T> params() const noexcept { return params_; }

  /// Number of leading parameters that are weights (subject to L2).
  std::size_t weight_count() const noexcept { return weight_count_; }

 protected:
  Shape in_;
  Shape out_;
  std::vector<T> params_;
  std::size_t weight_count_ = 0;
};

/// Stride-1 convolution with "same" zero padding and odd kernel sides,
/// lowered to a GEMM over an im2col buffer.
template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(Shape in, int filters, int kernel_h, int kernel_w);

  LayerKind kind() const override { return LayerKind::conv2d; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv2d>(*this); }
  std::array<std::uint32_t, 3> descriptor() const override;
  void forward(std::span<const T> in, std::span<T> out, std::vector<T>& cache) const override;
  void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din,
                const std::vector<T>& cache, std::vector<T>& scratch, std::span<T> grad) const override;

 private:
  int filters_;
  int kernel_h_;
  int kernel_w_;
};

template <typename T>
class Relu final : public Layer<T> {
 public:
  explicit Relu(Shape in) : Layer<T>(in, in) {}

  LayerKind kind() const override { return LayerKind::relu; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Relu>(*this); }
  void forward(std::span<const T> in, std::span<T> out, std::vector<T>& cache) const override;
  void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din,
                const std::vector<T>& cache, std::vector<T>& scratch, std::span<T> grad) const override;
};

/// Non-overlapping max pooling; trailing rows/columns that do not fill a
/// window are dropped. Gradient goes to the first maximum in scan order.
template <typename T>
class MaxPool final : public Layer<T> {
 public:
  MaxPool(Shape in, int pool_h, int pool_w);

  LayerKind kind() const override { return LayerKind::max_pool; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<MaxPool>(*this); }
  std::array<std::uint32_t, 3> descriptor() const override;
  void forward(std::span<const T> in, std::span<T> out, std::vector<T>& cache) const override;
  void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din,
                const std::vector<T>& cache, std::vector<T>& scratch, std::span<T> grad) const override;

 private:
  int pool_h_;
  int pool_w_;
};

template <typename T>
class Flatten final : public Layer<T> {
 public:
  explicit Flatten(Shape in) : Layer<T>(in, Shape{static_cast<int>(in.size()), 1, 1}) {}

  LayerKind kind() const override { return LayerKind::flatten; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Flatten>(*this); }
  void forward(std::span<const T> in, std::span<T> out, std::vector<T>& cache) const override;
  void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din,
                const std::vector<T>& cache, std::vector<T>& scratch, std::span<T> grad) const override;
};

template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(Shape in, int units);

  LayerKind kind() const override { return LayerKind::dense; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dense>(*this); }
  std::array<std::uint32_t, 3> descriptor() const override;
  void forward(std::span<const T> in, std::span<T> out, std::vector<T>& cache) const override;
  void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din,
                const std::vector<T>& cache, std::vector<T>& scratch, std::span<T> grad) const override;

 private:
  int units_;
};

template <typename T>
class Softmax final : public Layer<T> {
 public:
  explicit Softmax(Shape in) : Layer<T>(in, in) {}

  LayerKind kind() const override { return LayerKind::softmax; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Softmax>(*this); }
  void forward(std::span<const T> in, std::span<T> out, std::vector<T>& cache) const override;
  void backward(std::span<const T> in, std::span<const T> out, std::span<const T> dout, std::span<T> din,
                const std::vector<T>& cache, std::vector<T>& scratch, std::span<T> grad) const override;
};

/// Parameter-shaped buffers, one per layer.
template <typename T>
struct Gradients {
  std::vector<std::vector<T>> layers;

  void zero();
  void scale(T factor);
  void add(const Gradients& other);
};

/// Sequential stack of layers ending in a softmax over the five classes.
template <typename T>
class Network {
 public:
  explicit Network(Shape input);
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  Network& conv(int filters, int kernel_h, int kernel_w);
  Network& relu();
  Network& max_pool(int pool_h, int pool_w);
  Network& flatten();
  Network& dense(int units);
  Network& softmax();
  Network& add(LayerKind kind, const std::array<std::uint32_t, 3>& descriptor);

  Shape input_shape() const noexcept { return input_; }
  Shape output_shape() const noexcept;
  std::size_t parameter_count() const noexcept;

  const std::vector<std::unique_ptr<Layer<T>>>& layers() const noexcept { return layers_; }
  std::vector<std::unique_ptr<Layer<T>>>& layers() noexcept { return layers_; }

  /// He-uniform weights (limit sqrt(6 / fan_in)), zero biases.
  void init_he_uniform(std::uint64_t seed);

  /// Throws shape_mismatch when `input` does not match input_shape().
  std::vector<T> forward(std::span<const T> input) const;
  ScoreVector predict(std::span<const T> input) const;

  Gradients<T> zero_gradients() const;

  /// Sum of squared weights, biases excluded.
  double weight_norm_squared() const;

  template <typename U>
  Network<U> cast() const;

 private:
  Shape input_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

/// Per-sample activation storage reused across forward/backward passes.
template <typename T>
class Workspace {
 public:
  /// Runs forward and backward for one sample, adds the cross-entropy gradient
  /// into `grads`, and returns the sample's cross-entropy. The network must
  /// end in a softmax; its backward is folded into p - onehot.
  double accumulate(const Network<T>& net, std::span<const T> input, int target, Gradients<T>& grads);

  /// Forward only; returns the network output held in this workspace.
  std::span<const T> forward(const Network<T>& net, std::span<const T> input);

 private:
  std::vector<std::vector<T>> activations_;
  std::vector<std::vector<T>> caches_;
  std::vector<T> delta_;
  std::vector<T> delta_next_;
  std::vector<T> scratch_;
};

/// Gradient of cross-entropy + (l2 / 2) * ||W||^2 for a single sample.
template <typename T>
Gradients<T> backward(const Network<T>& net, std::span<const T> input, int target, double l2);

/// Adds l2 * W to the weight part of every layer's gradient.
template <typename T>
void add_weight_decay(const Network<T>& net, Gradients<T>& grads, double l2);

/// 116x116x1 input, three conv(3x3)/ReLU/maxpool(2) blocks with 16, 32 and 64
/// filters, then dense 128, ReLU, dense 5, softmax.
template <typename T = float>
Network<T> build_2d_cnn(std::uint64_t seed);

/// 116x1 input: conv 7x16, ReLU, pool 2, conv 5x32, ReLU, pool 2, dense 64,
/// ReLU, dense 5, softmax.
template <typename T = float>
Network<T> build_1d_cnn(std::uint64_t seed);

/// Flat binary: "ECGF", u32 version, u32 input c/h/w, u32 class count,
/// u32 layer count, then per layer u32 kind, three u32 descriptor fields and a
/// u64 parameter count, followed by every parameter as little-endian f32.
void save_model(const Network<float>& net, const std::filesystem::path& path);
Network<float> load_model(const std::filesystem::path& path);

inline constexpr std::uint32_t kModelFormatVersion = 1;

}  // namespace ecgf::nn
