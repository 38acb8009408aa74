#include "ecgf/nn.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "ecgf/error.hpp"

namespace ecgf::nn {

namespace {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::shape_mismatch, message);
}

// Fixed-lane dot product. The summation order depends only on n, never on
// pointer alignment, so repeated runs agree bit for bit.
template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  constexpr std::size_t kLanes = 16;
  T acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    for (std::size_t k = 0; k < kLanes; ++k) acc[k] += a[i + k] * b[i + k];
  T tail = T(0);
  for (; i < n; ++i) tail += a[i] * b[i];
  for (std::size_t w = kLanes / 2; w > 0; w /= 2)
    for (std::size_t k = 0; k < w; ++k) acc[k] += acc[k + w];
  return acc[0] + tail;
}

template <typename T>
T sum(const T* a, std::size_t n) {
  constexpr std::size_t kLanes = 16;
  T acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    for (std::size_t k = 0; k < kLanes; ++k) acc[k] += a[i + k];
  T tail = T(0);
  for (; i < n; ++i) tail += a[i];
  for (std::size_t w = kLanes / 2; w > 0; w /= 2)
    for (std::size_t k = 0; k < w; ++k) acc[k] += acc[k + w];
  return acc[0] + tail;
}

}  // namespace

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::relu: return "relu";
    case LayerKind::max_pool: return "max_pool";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
    case LayerKind::softmax: return "softmax";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Conv2d

template <typename T>
Conv2d<T>::Conv2d(Shape in, int filters, int kernel_h, int kernel_w)
    : Layer<T>(in, Shape{filters, in.height, in.width}), filters_(filters), kernel_h_(kernel_h), kernel_w_(kernel_w) {
  if (filters < 1 || kernel_h < 1 || kernel_w < 1 || kernel_h % 2 == 0 || kernel_w % 2 == 0)
    throw Error(ErrorCode::invalid_argument, "conv2d needs positive filters and odd kernel sides");
  this->weight_count_ = static_cast<std::size_t>(filters) * static_cast<std::size_t>(in.channels) *
                        static_cast<std::size_t>(kernel_h) * static_cast<std::size_t>(kernel_w);
  this->params_.assign(this->weight_count_ + static_cast<std::size_t>(filters), T(0));
}

template <typename T>
std::array<std::uint32_t, 3> Conv2d<T>::descriptor() const {
  return {static_cast<std::uint32_t>(filters_), static_cast<std::uint32_t>(kernel_h_),
          static_cast<std::uint32_t>(kernel_w_)};
}

template <typename T>
void Conv2d<T>::forward(std::span<const T> in, std::span<T> out, std::vector<T>& cache) const {
  const int C = this->in_.channels, H = this->in_.height, W = this->in_.width;
  const int ph = kernel_h_ / 2, pw = kernel_w_ / 2;
  const Eigen::Index K = static_cast<Eigen::Index>(C) * kernel_h_ * kernel_w_;
  const Eigen::Index P = static_cast<Eigen::Index>(H) * W;
  cache.resize(static_cast<std::size_t>(K * P));

  // im2col: row (c, ky, kx) holds the input pixel feeding each output pixel.
  T* col = cache.data();
  for (int c = 0; c < C; ++c) {
    const T* plane = in.data() + static_cast<std::size_t>(c) * H * W;
    for (int ky = 0; ky < kernel_h_; ++ky) {
      for (int kx = 0; kx < kernel_w_; ++kx, col += P) {
        const int dx = kx - pw;
        const int x_lo = std::max(0, -dx);
        const int x_hi = std::min(W, W - dx);
        for (int y = 0; y < H; ++y) {
          T* dst = col + static_cast<std::ptrdiff_t>(y) * W;
          const int yy = y + ky - ph;
          if (yy < 0 || yy >= H) {
            std::fill(dst, dst + W, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::ptrdiff_t>(yy) * W;
          std::fill(dst, dst + x_lo, T(0));
          std::copy(src + x_lo + dx, src + x_hi + dx, dst + x_lo);
          std::fill(dst + x_hi, dst + W, T(0));
        }
      }
    }
  }

  Eigen::Map<const MatRM<T>> weights(this->params_.data(), filters_, K);
  Eigen::Map<const Vec<T>> bias(this->params_.data() + this->weight_count_, filters_);
  Eigen::Map<const MatRM<T>> cols(cache.data(), K, P);
  Eigen::Map<MatRM<T>> result(out.data(), filters_, P);
  result.noalias() = weights * cols;
  result.colwise() += bias;
}

template <typename T>
void Conv2d<T>::backward(std::span<const T> /*in*/, std::span<const T> /*out*/, std::span<const T> dout,
                         std::span<T> din, const std::vector<T>& cache, std::vector<T>& scratch,
                         std::span<T> grad) const {
  const int C = this->in_.channels, H = this->in_.height, W = this->in_.width;
  const int ph = kernel_h_ / 2, pw = kernel_w_ / 2;
  const Eigen::Index K = static_cast<Eigen::Index>(C) * kernel_h_ * kernel_w_;
  const Eigen::Index P = static_cast<Eigen::Index>(H) * W;

  Eigen::Map<const MatRM<T>> weights(this->params_.data(), filters_, K);
  Eigen::Map<const MatRM<T>> cols(cache.data(), K, P);
  Eigen::Map<const MatRM<T>> delta(dout.data(), filters_, P);
  Eigen::Map<MatRM<T>> dweights(grad.data(), filters_, K);
  Eigen::Map<Vec<T>> dbias(grad.data() + this->weight_count_, filters_);
  dweights.noalias() += delta * cols.transpose();
  for (int f = 0; f < filters_; ++f) dbias[f] += sum(dout.data() + f * P, static_cast<std::size_t>(P));

  if (din.empty()) return;
  scratch.resize(static_cast<std::size_t>(K * P));
  Eigen::Map<MatRM<T>> dcols(scratch.data(), K, P);
  dcols.noalias() = weights.transpose() * delta;

  std::fill(din.begin(), din.end(), T(0));
  const T* col = scratch.data();
  for (int c = 0; c < C; ++c) {
    T* plane = din.data() + static_cast<std::size_t>(c) * H * W;
    for (int ky = 0; ky < kernel_h_; ++ky) {
      for (int kx = 0; kx < kernel_w_; ++kx, col += P) {
        const int dx = kx - pw;
        const int x_lo = std::max(0, -dx);
        const int x_hi = std::min(W, W - dx);
        for (int y = 0; y < H; ++y) {
          const int yy = y + ky - ph;
          if (yy < 0 || yy >= H) continue;
          const T* src = col + static_cast<std::ptrdiff_t>(y) * W;
          T* dst = plane + static_cast<std::ptrdiff_t>(yy) * W + dx;
          for (int x = x_lo; x < x_hi; ++x) dst[x] += src[x];
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Relu

template <typename T>
void Relu<T>::forward(std::span<const T> in, std::span<T> out, std::vector<T>& /*cache*/) const {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
}

template <typename T>
void Relu<T>::backward(std::span<const T> in, std::span<const T> /*out*/, std::span<const T> dout, std::span<T> din,
                       const std::vector<T>& /*cache*/, std::vector<T>& /*scratch*/, std::span<T> /*grad*/) const {
  if (din.empty()) return;
  for (std::size_t i = 0; i < in.size(); ++i) din[i] = in[i] > T(0) ? dout[i] : T(0);
}

// ---------------------------------------------------------------------------
// MaxPool

template <typename T>
MaxPool<T>::MaxPool(Shape in, int pool_h, int pool_w)
    : Layer<T>(in, Shape{in.channels, in.height / std::max(pool_h, 1), in.width / std::max(pool_w, 1)}),
      pool_h_(pool_h),
      pool_w_(pool_w) {
  if (pool_h < 1 || pool_w < 1 || this->out_.height < 1 || this->out_.width < 1)
    throw Error(ErrorCode::invalid_argument, "max pool window does not fit the input");
  if (in.size() >= (std::size_t{1} << 24))
    throw Error(ErrorCode::invalid_argument, "max pool input too large for index cache");
}

template <typename T>
std::array<std::uint32_t, 3> MaxPool<T>::descriptor() const {
  return {static_cast<std::uint32_t>(pool_h_), static_cast<std::uint32_t>(pool_w_), 0};
}

// The cache records, per output, the flat input index of the first maximum.
// Indices are stored as T; layer sizes stay far below 2^24.
template <typename T>
void MaxPool<T>::forward(std::span<const T> in, std::span<T> out, std::vector<T>& cache) const {
  const int H = this->in_.height, W = this->in_.width;
  const int OH = this->out_.height, OW = this->out_.width;
  cache.resize(out.size());
  for (int c = 0; c < this->in_.channels; ++c) {
    const std::size_t base = static_cast<std::size_t>(c) * H * W;
    const std::size_t obase = static_cast<std::size_t>(c) * OH * OW;
    for (int oy = 0; oy < OH; ++oy) {
      for (int ox = 0; ox < OW; ++ox) {
        std::size_t arg = base + static_cast<std::size_t>(oy * pool_h_) * W + static_cast<std::size_t>(ox * pool_w_);
        T best = in[arg];
        for (int py = 0; py < pool_h_; ++py) {
          const std::size_t row = base + static_cast<std::size_t>(oy * pool_h_ + py) * W + static_cast<std::size_t>(ox * pool_w_);
          for (int px = 0; px < pool_w_; ++px) {
            if (in[row + px] > best) {
              best = in[row + px];
              arg = row + px;
            }
          }
        }
        out[obase + oy * OW + ox] = best;
        cache[obase + oy * OW + ox] = static_cast<T>(arg);
      }
    }
  }
}

template <typename T>
void MaxPool<T>::backward(std::span<const T> /*in*/, std::span<const T> /*out*/, std::span<const T> dout,
                          std::span<T> din, const std::vector<T>& cache, std::vector<T>& /*scratch*/,
                          std::span<T> /*grad*/) const {
  if (din.empty()) return;
  std::fill(din.begin(), din.end(), T(0));
  for (std::size_t o = 0; o < dout.size(); ++o) din[static_cast<std::size_t>(cache[o])] += dout[o];
}

// ---------------------------------------------------------------------------
// Flatten

template <typename T>
void Flatten<T>::forward(std::span<const T> in, std::span<T> out, std::vector<T>& /*cache*/) const {
  std::copy(in.begin(), in.end(), out.begin());
}

template <typename T>
void Flatten<T>::backward(std::span<const T> /*in*/, std::span<const T> /*out*/, std::span<const T> dout,
                          std::span<T> din, const std::vector<T>& /*cache*/, std::vector<T>& /*scratch*/,
                          std::span<T> /*grad*/) const {
  if (!din.empty()) std::copy(dout.begin(), dout.end(), din.begin());
}

// ---------------------------------------------------------------------------
// Dense

template <typename T>
Dense<T>::Dense(Shape in, int units) : Layer<T>(in, Shape{units, 1, 1}), units_(units) {
  if (units < 1) throw Error(ErrorCode::invalid_argument, "dense layer needs at least one unit");
  this->weight_count_ = static_cast<std::size_t>(units) * in.size();
  this->params_.assign(this->weight_count_ + static_cast<std::size_t>(units), T(0));
}

template <typename T>
std::array<std::uint32_t, 3> Dense<T>::descriptor() const {
  return {static_cast<std::uint32_t>(units_), 0, 0};
}

template <typename T>
void Dense<T>::forward(std::span<const T> in, std::span<T> out, std::vector<T>& /*cache*/) const {
  const auto n_in = static_cast<Eigen::Index>(this->in_.size());
  const T* weights = this->params_.data();
  const T* bias = weights + this->weight_count_;
  for (int u = 0; u < units_; ++u)
    out[u] = dot(weights + static_cast<std::size_t>(u) * n_in, in.data(), static_cast<std::size_t>(n_in)) + bias[u];
}

template <typename T>
void Dense<T>::backward(std::span<const T> in, std::span<const T> /*out*/, std::span<const T> dout, std::span<T> din,
                        const std::vector<T>& /*cache*/, std::vector<T>& /*scratch*/, std::span<T> grad) const {
  const auto n_in = static_cast<Eigen::Index>(this->in_.size());
  Eigen::Map<const MatRM<T>> weights(this->params_.data(), units_, n_in);
  Eigen::Map<const Vec<T>> x(in.data(), n_in);
  Eigen::Map<const Vec<T>> delta(dout.data(), units_);
  Eigen::Map<MatRM<T>> dweights(grad.data(), units_, n_in);
  Eigen::Map<Vec<T>> dbias(grad.data() + this->weight_count_, units_);
  dweights.noalias() += delta * x.transpose();
  dbias += delta;
  if (din.empty()) return;
  Eigen::Map<Vec<T>> dx(din.data(), n_in);
  dx.noalias() = weights.transpose() * delta;
}

// ---------------------------------------------------------------------------
// Softmax

template <typename T>
void Softmax<T>::forward(std::span<const T> in, std::span<T> out, std::vector<T>& /*cache*/) const {
  const T peak = *std::max_element(in.begin(), in.end());
  T sum = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - peak);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
}

template <typename T>
void Softmax<T>::backward(std::span<const T> /*in*/, std::span<const T> out, std::span<const T> dout,
                          std::span<T> din, const std::vector<T>& /*cache*/, std::vector<T>& /*scratch*/,
                          std::span<T> /*grad*/) const {
  if (din.empty()) return;
  T dot = 0;
  for (std::size_t i = 0; i < out.size(); ++i) dot += dout[i] * out[i];
  for (std::size_t i = 0; i < out.size(); ++i) din[i] = out[i] * (dout[i] - dot);
}

// ---------------------------------------------------------------------------
// Gradients

template <typename T>
void Gradients<T>::zero() {
  for (auto& g : layers) std::fill(g.begin(), g.end(), T(0));
}

template <typename T>
void Gradients<T>::scale(T factor) {
  for (auto& g : layers)
    for (auto& v : g) v *= factor;
}

template <typename T>
void Gradients<T>::add(const Gradients& other) {
  for (std::size_t l = 0; l < layers.size(); ++l)
    for (std::size_t i = 0; i < layers[l].size(); ++i) layers[l][i] += other.layers[l][i];
}

// ---------------------------------------------------------------------------
// Network

template <typename T>
Network<T>::Network(Shape input) : input_(input) {
  if (input.size() == 0) throw Error(ErrorCode::invalid_argument, "network input shape must be non-empty");
}

template <typename T>
Network<T>::Network(const Network& other) : input_(other.input_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

template <typename T>
Network<T>& Network<T>::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

template <typename T>
Shape Network<T>::output_shape() const noexcept {
  return layers_.empty() ? input_ : layers_.back()->output_shape();
}

template <typename T>
Network<T>& Network<T>::conv(int filters, int kernel_h, int kernel_w) {
  layers_.push_back(std::make_unique<Conv2d<T>>(output_shape(), filters, kernel_h, kernel_w));
  return *this;
}

template <typename T>
Network<T>& Network<T>::relu() {
  layers_.push_back(std::make_unique<Relu<T>>(output_shape()));
  return *this;
}

template <typename T>
Network<T>& Network<T>::max_pool(int pool_h, int pool_w) {
  layers_.push_back(std::make_unique<MaxPool<T>>(output_shape(), pool_h, pool_w));
  return *this;
}

template <typename T>
Network<T>& Network<T>::flatten() {
  layers_.push_back(std::make_unique<Flatten<T>>(output_shape()));
  return *this;
}

template <typename T>
Network<T>& Network<T>::dense(int units) {
  layers_.push_back(std::make_unique<Dense<T>>(output_shape(), units));
  return *this;
}

template <typename T>
Network<T>& Network<T>::softmax() {
  layers_.push_back(std::make_unique<Softmax<T>>(output_shape()));
  return *this;
}

template <typename T>
Network<T>& Network<T>::add(LayerKind kind, const std::array<std::uint32_t, 3>& d) {
  const auto a = static_cast<int>(d[0]), b = static_cast<int>(d[1]), c = static_cast<int>(d[2]);
  switch (kind) {
    case LayerKind::conv2d: return conv(a, b, c);
    case LayerKind::relu: return relu();
    case LayerKind::max_pool: return max_pool(a, b);
    case LayerKind::flatten: return flatten();
    case LayerKind::dense: return dense(a);
    case LayerKind::softmax: return softmax();
  }
  throw Error(ErrorCode::invalid_argument, "unknown layer kind " + std::to_string(static_cast<std::uint32_t>(kind)));
}

template <typename T>
std::size_t Network<T>::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l->params().size();
  return n;
}

template <typename T>
void Network<T>::init_he_uniform(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& layer : layers_) {
    auto params = layer->params();
    if (params.empty()) continue;
    const std::size_t fan_out = params.size() - layer->weight_count();
    const double fan_in = static_cast<double>(layer->weight_count()) / static_cast<double>(fan_out);
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < layer->weight_count(); ++i) params[i] = static_cast<T>(dist(rng));
    std::fill(params.begin() + static_cast<std::ptrdiff_t>(layer->weight_count()), params.end(), T(0));
  }
}

template <typename T>
std::vector<T> Network<T>::forward(std::span<const T> input) const {
  Workspace<T> ws;
  auto out = ws.forward(*this, input);
  return {out.begin(), out.end()};
}

template <typename T>
ScoreVector Network<T>::predict(std::span<const T> input) const {
  const auto out = forward(input);
  require(out.size() == kClassCount, "network output is not a 5-class score vector");
  ScoreVector s;
  for (std::size_t i = 0; i < kClassCount; ++i) s.probs[i] = static_cast<double>(out[i]);
  return s;
}

template <typename T>
Gradients<T> Network<T>::zero_gradients() const {
  Gradients<T> g;
  g.layers.reserve(layers_.size());
  for (const auto& l : layers_) g.layers.emplace_back(l->params().size(), T(0));
  return g;
}

template <typename T>
double Network<T>::weight_norm_squared() const {
  double sum = 0.0;
  for (const auto& l : layers_) {
    auto p = l->params();
    for (std::size_t i = 0; i < l->weight_count(); ++i) sum += static_cast<double>(p[i]) * static_cast<double>(p[i]);
  }
  return sum;
}

template <typename T>
template <typename U>
Network<U> Network<T>::cast() const {
  Network<U> out(input_);
  for (const auto& l : layers_) {
    out.add(l->kind(), l->descriptor());
    auto src = l->params();
    auto dst = out.layers().back()->params();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<U>(src[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Workspace

template <typename T>
std::span<const T> Workspace<T>::forward(const Network<T>& net, std::span<const T> input) {
  require(input.size() == net.input_shape().size(),
          "input has " + std::to_string(input.size()) + " values, network expects " +
              std::to_string(net.input_shape().size()));
  const auto& layers = net.layers();
  activations_.resize(layers.size() + 1);
  caches_.resize(layers.size());
  activations_[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    activations_[l + 1].resize(layers[l]->output_shape().size());
    layers[l]->forward(activations_[l], activations_[l + 1], caches_[l]);
  }
  return activations_.back();
}

template <typename T>
double Workspace<T>::accumulate(const Network<T>& net, std::span<const T> input, int target, Gradients<T>& grads) {
  const auto& layers = net.layers();
  require(!layers.empty() && layers.back()->kind() == LayerKind::softmax, "training needs a softmax output layer");
  const auto probs = forward(net, input);
  require(target >= 0 && static_cast<std::size_t>(target) < probs.size(), "target class out of range");

  const double p_target = std::max(static_cast<double>(probs[static_cast<std::size_t>(target)]), 1e-30);
  const double loss = -std::log(p_target);

  // d(CE)/d(logits) = p - onehot; the softmax layer is skipped below.
  delta_.assign(probs.begin(), probs.end());
  delta_[static_cast<std::size_t>(target)] -= T(1);

  for (std::size_t l = layers.size() - 1; l-- > 0;) {
    const bool need_input_grad = l > 0;
    delta_next_.resize(need_input_grad ? layers[l]->input_shape().size() : 0);
    layers[l]->backward(activations_[l], activations_[l + 1], delta_, delta_next_, caches_[l], scratch_,
                        grads.layers[l]);
    std::swap(delta_, delta_next_);
  }
  return loss;
}

template <typename T>
void add_weight_decay(const Network<T>& net, Gradients<T>& grads, double l2) {
  if (l2 == 0.0) return;
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto p = layers[l]->params();
    for (std::size_t i = 0; i < layers[l]->weight_count(); ++i) grads.layers[l][i] += static_cast<T>(l2) * p[i];
  }
}

template <typename T>
Gradients<T> backward(const Network<T>& net, std::span<const T> input, int target, double l2) {
  Workspace<T> ws;
  Gradients<T> g = net.zero_gradients();
  ws.accumulate(net, input, target, g);
  add_weight_decay(net, g, l2);
  return g;
}

template <typename T>
Network<T> build_2d_cnn(std::uint64_t seed) {
  Network<T> net(Shape{1, 116, 116});
  net.conv(16, 3, 3).relu().max_pool(2, 2);
  net.conv(32, 3, 3).relu().max_pool(2, 2);
  net.conv(64, 3, 3).relu().max_pool(2, 2);
  net.flatten().dense(128).relu().dense(kClassCount).softmax();
  net.init_he_uniform(seed);
  return net;
}

template <typename T>
Network<T> build_1d_cnn(std::uint64_t seed) {
  Network<T> net(Shape{1, 1, 116});
  net.conv(16, 1, 7).relu().max_pool(1, 2);
  net.conv(32, 1, 5).relu().max_pool(1, 2);
  net.flatten().dense(64).relu().dense(kClassCount).softmax();
  net.init_he_uniform(seed);
  return net;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr char kMagic[4] = {'E', 'C', 'G', 'F'};

template <typename U>
void put(std::string& buf, U value) {
  static_assert(std::is_integral_v<U> || std::is_same_v<U, float>);
  using Bits = std::conditional_t<sizeof(U) == 8, std::uint64_t, std::uint32_t>;
  Bits bits = std::bit_cast<Bits>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(std::string data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}

  template <typename U>
  U get() {
    using Bits = std::conditional_t<sizeof(U) == 8, std::uint64_t, std::uint32_t>;
    if (data_.size() - pos_ < sizeof(U))
      throw Error(ErrorCode::truncated_file, name_ + ": truncated at byte offset " + std::to_string(pos_), pos_);
    Bits bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      bits |= static_cast<Bits>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return std::bit_cast<U>(bits);
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string data_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_model(const Network<float>& net, const std::filesystem::path& path) {
  std::string buf(kMagic, kMagic + 4);
  put<std::uint32_t>(buf, kModelFormatVersion);
  const Shape in = net.input_shape();
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(in.channels));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(in.height));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(in.width));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(net.output_shape().size()));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(l->kind()));
    for (std::uint32_t v : l->descriptor()) put<std::uint32_t>(buf, v);
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(l->params().size()));
  }
  for (const auto& l : net.layers())
    for (float v : l->params()) put<float>(buf, v);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::unwritable_path, "cannot write " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorCode::unwritable_path, "failed writing " + path.string());
}

Network<float> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::missing_file, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < 4 || !std::equal(kMagic, kMagic + 4, data.begin())) {
    if (data.size() < 4) throw Error(ErrorCode::truncated_file, path.string() + ": truncated at byte offset 0", 0);
    throw Error(ErrorCode::bad_magic, path.string() + " is not an ECGF model file");
  }
  Reader r(data.substr(4), path.string());
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion)
    throw Error(ErrorCode::version_mismatch, path.string() + ": format version " + std::to_string(version) +
                                                 ", expected " + std::to_string(kModelFormatVersion));
  Shape shape;
  shape.channels = static_cast<int>(r.get<std::uint32_t>());
  shape.height = static_cast<int>(r.get<std::uint32_t>());
  shape.width = static_cast<int>(r.get<std::uint32_t>());
  const auto classes = r.get<std::uint32_t>();
  const auto layer_count = r.get<std::uint32_t>();

  Network<float> net(shape);
  std::vector<std::uint64_t> counts;
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    const auto kind = static_cast<LayerKind>(r.get<std::uint32_t>());
    std::array<std::uint32_t, 3> d{};
    for (auto& v : d) v = r.get<std::uint32_t>();
    counts.push_back(r.get<std::uint64_t>());
    net.add(kind, d);
    if (net.layers().back()->params().size() != counts.back())
      throw Error(ErrorCode::shape_mismatch, path.string() + ": parameter count disagrees with layer " + std::to_string(i));
  }
  if (net.output_shape().size() != classes)
    throw Error(ErrorCode::shape_mismatch, path.string() + ": class count disagrees with layer stack");
  for (auto& l : net.layers())
    for (float& v : l->params()) {
      v = r.get<float>();
      if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, path.string() + ": non-finite weight");
    }
  return net;
}

// ---------------------------------------------------------------------------

template class Conv2d<float>;
template class Conv2d<double>;
template class Relu<float>;
template class Relu<double>;
template class MaxPool<float>;
template class MaxPool<double>;
template class Flatten<float>;
template class Flatten<double>;
template class Dense<float>;
template class Dense<double>;
template class Softmax<float>;
template class Softmax<double>;
template struct Gradients<float>;
template struct Gradients<double>;
template class Network<float>;
template class Network<double>;
template class Workspace<float>;
template class Workspace<double>;
template Network<double> Network<float>::cast<double>() const;
template Network<float> Network<double>::cast<float>() const;
template Network<float> Network<float>::cast<float>() const;
template Network<double> Network<double>::cast<double>() const;
template Gradients<float> backward(const Network<float>&, std::span<const float>, int, double);
template Gradients<double> backward(const Network<double>&, std::span<const double>, int, double);
template void add_weight_decay(const Network<float>&, Gradients<float>&, double);
template void add_weight_decay(const Network<double>&, Gradients<double>&, double);
template Network<float> build_2d_cnn<float>(std::uint64_t);
template Network<double> build_2d_cnn<double>(std::uint64_t);
template Network<float> build_1d_cnn<float>(std::uint64_t);
template Network<double> build_1d_cnn<double>(std::uint64_t);

}  // namespace ecgf::nn
