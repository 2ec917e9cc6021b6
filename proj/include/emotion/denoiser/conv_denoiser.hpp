// Copyright 2026 The E-Motion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EMOTION_DENOISER_CONV_DENOISER_HPP_
#define EMOTION_DENOISER_CONV_DENOISER_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "emotion/core/error.hpp"
#include "emotion/core/rng.hpp"
#include "emotion/denoiser/precondition.hpp"
#include "emotion/event_repr/voxel.hpp"

namespace emotion {

// Shape of the convolutional clean-signal estimator. The network sees
//   [c_in * x_t (F*B) | clean prompt padded to F frames (F*B) |
//    prompt mask per frame (F) | c_noise plane (1)]
// as input channels. The last layer emits two F*B channel groups, a residual
// estimate A and a skip gate g (see ConvDenoiser).
struct DenoiserArch {
  int frames = 5;
  int bins = 3;
  int hidden = 32;
  int layers = 4;
  int kernel = 3;

  int in_channels() const noexcept { return 2 * frames * bins + frames + 1; }
  int out_channels() const noexcept { return frames * bins; }
  int head_channels() const noexcept { return 2 * out_channels(); }

  int layer_in(int l) const noexcept { return l == 0 ? in_channels() : hidden; }
  int layer_out(int l) const noexcept { return l == layers - 1 ? head_channels() : hidden; }

  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (int l = 0; l < layers; ++l) {
      n += static_cast<std::size_t>(kernel) * kernel * layer_in(l) * layer_out(l) + layer_out(l);
    }
    return n;
  }

  void validate() const {
    if (frames < 1 || bins < 1) throw ParameterError("denoiser needs frames >= 1 and bins >= 1");
    if (hidden < 1) throw ParameterError("denoiser hidden width must be positive");
    if (layers < 2) throw ParameterError("denoiser needs at least two layers");
    if (kernel < 1 || kernel % 2 == 0) throw ParameterError("denoiser kernel must be odd");
  }

  friend bool operator==(const DenoiserArch&, const DenoiserArch&) = default;
};

// Residual convolutional network with periodic padding and SiLU activations:
//   h_0 = silu(conv_0(in)),  h_l = h_{l-1} + silu(conv_l(h_{l-1})),
//   [A | g] = conv_{L-1}(h_{L-2}),
// and the clean estimate mu = c_skip (1 - g) x + c_out A. This is the
// preconditioned form c_skip x + c_out F with F = A - g (sigma_data / sigma)
// c_in x: the gate lets the network drop the skip path where the clean value
// is known to vanish, which a plain conv stack cannot do at small sigma since
// the needed gain grows like 1/sigma.
// Parameters live in one flat vector, per layer [weights (k*k*Cin x Cout),
// bias (Cout)]. A forward pass keeps its activations so that backward() can
// follow; one instance must not be shared between threads.
template <typename Scalar>
class ConvDenoiser {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  ConvDenoiser() : ConvDenoiser(DenoiserArch{}, 0.5, 0) {}

  ConvDenoiser(const DenoiserArch& arch, double sigma_data, std::uint64_t seed)
      : arch_(arch), sigma_data_(sigma_data) {
    arch_.validate();
    if (!(sigma_data > 0.0)) throw ParameterError("sigma_data must be positive");
    std::size_t off = 0;
    for (int l = 0; l < arch_.layers; ++l) {
      Layer layer;
      layer.cin = arch_.layer_in(l);
      layer.cout = arch_.layer_out(l);
      layer.w_offset = off;
      off += static_cast<std::size_t>(arch_.kernel) * arch_.kernel * layer.cin * layer.cout;
      layer.b_offset = off;
      off += static_cast<std::size_t>(layer.cout);
      layer.end = off;
      layers_.push_back(layer);
    }
    params_.assign(off, Scalar(0));
    grads_.assign(off, Scalar(0));
    mask_.assign(off, 1);
    initialize(seed);
  }

  const DenoiserArch& arch() const noexcept { return arch_; }
  double sigma_data() const noexcept { return sigma_data_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  std::span<Scalar> parameters() noexcept { return params_; }
  std::span<const Scalar> parameters() const noexcept { return params_; }
  std::span<Scalar> gradients() noexcept { return grads_; }
  std::span<const Scalar> gradients() const noexcept { return grads_; }
  std::span<const std::uint8_t> trainable_mask() const noexcept { return mask_; }

  // Fan-in scaled uniform weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero
  // biases. The gate outputs start at zero, i.e. with the plain skip path.
  void initialize(std::uint64_t seed) {
    const int gate_first = arch_.out_channels();
    for (int l = 0; l < arch_.layers; ++l) {
      const Layer& layer = layers_[static_cast<std::size_t>(l)];
      RandomSource rng(seed, 0xC0417 + static_cast<std::uint64_t>(l));
      const double bound =
          1.0 / std::sqrt(static_cast<double>(arch_.kernel * arch_.kernel * layer.cin));
      const bool head = l == arch_.layers - 1;
      for (std::size_t i = layer.w_offset; i < layer.b_offset; ++i) {
        const bool gate = head && static_cast<int>((i - layer.w_offset) % layer.cout) >= gate_first;
        params_[i] = gate ? Scalar(0) : static_cast<Scalar>(rng.uniform(-bound, bound));
      }
      for (std::size_t i = layer.b_offset; i < layer.end; ++i) params_[i] = Scalar(0);
    }
  }

  void set_layer_trainable(int l, bool trainable) {
    if (l < 0 || l >= arch_.layers) throw RangeError("layer index out of range");
    const Layer& layer = layers_[static_cast<std::size_t>(l)];
    std::fill(mask_.begin() + static_cast<std::ptrdiff_t>(layer.w_offset),
              mask_.begin() + static_cast<std::ptrdiff_t>(layer.end), trainable ? 1 : 0);
  }
  bool layer_trainable(int l) const {
    return mask_.at(layers_.at(static_cast<std::size_t>(l)).w_offset) != 0;
  }

  // Flat index range [first, last) of a layer's parameters.
  std::pair<std::size_t, std::size_t> layer_range(int l) const {
    const Layer& layer = layers_.at(static_cast<std::size_t>(l));
    return {layer.w_offset, layer.end};
  }

  void zero_grad() { std::fill(grads_.begin(), grads_.end(), Scalar(0)); }

  VoxelSequence predict_clean(const VoxelSequence& x, double sigma, const VoxelSequence& prompt) {
    check_inputs(x, sigma, prompt);
    height_ = x.height;
    width_ = x.width;
    const std::size_t P = static_cast<std::size_t>(height_) * width_;
    const int F = arch_.frames, B = arch_.bins, FB = F * B;
    pre_ = precondition(sigma, sigma_data_);

    Mat input(static_cast<Eigen::Index>(P), arch_.in_channels());
    for (std::size_t p = 0; p < P; ++p) {
      Scalar* row = input.row(static_cast<Eigen::Index>(p)).data();
      for (int c = 0; c < FB; ++c) {
        row[c] = static_cast<Scalar>(pre_.c_in * x.values[static_cast<std::size_t>(c) * P + p]);
        row[FB + c] = (c / B < prompt.frames)
                          ? static_cast<Scalar>(prompt.values[static_cast<std::size_t>(c) * P + p])
                          : Scalar(0);
      }
      for (int f = 0; f < F; ++f) row[2 * FB + f] = f < prompt.frames ? Scalar(1) : Scalar(0);
      row[2 * FB + F] = static_cast<Scalar>(pre_.c_noise);
    }

    const int L = arch_.layers;
    cols_.resize(static_cast<std::size_t>(L));
    pre_act_.resize(static_cast<std::size_t>(L));
    hidden_.resize(static_cast<std::size_t>(L));
    const Mat* h = &input;
    for (int l = 0; l < L; ++l) {
      const Layer& layer = layers_[static_cast<std::size_t>(l)];
      auto& cols = cols_[static_cast<std::size_t>(l)];
      im2col(*h, layer.cin, cols);
      Mat z = cols * weights(layer);
      z.rowwise() += bias(layer);
      if (l == L - 1) {
        out_ = std::move(z);
        break;
      }
      Mat act = z.unaryExpr([](Scalar v) { return silu(v); });
      if (l > 0) act += *h;
      pre_act_[static_cast<std::size_t>(l)] = std::move(z);
      hidden_[static_cast<std::size_t>(l)] = std::move(act);
      h = &hidden_[static_cast<std::size_t>(l)];
    }

    VoxelSequence mu = x;
    mu.scale.reset();
    for (int c = 0; c < FB; ++c) {
      for (std::size_t p = 0; p < P; ++p) {
        const std::size_t i = static_cast<std::size_t>(c) * P + p;
        const auto row = static_cast<Eigen::Index>(p);
        const double gate = static_cast<double>(out_(row, FB + c));
        mu.values[i] = pre_.c_skip * (1.0 - gate) * x.values[i] +
                       pre_.c_out * static_cast<double>(out_(row, c));
      }
    }
    skip_input_ = x.values;
    has_forward_ = true;
    return mu;
  }

  // Accumulates parameter gradients for d(loss)/d(mu) of the last forward.
  void backward(const VoxelSequence& grad_mu) {
    if (!has_forward_) throw StateError("backward() called without a forward pass");
    const std::size_t P = static_cast<std::size_t>(height_) * width_;
    const int FB = arch_.out_channels();
    if (grad_mu.frames != arch_.frames || grad_mu.bins != arch_.bins ||
        grad_mu.height != height_ || grad_mu.width != width_) {
      throw DataError("gradient shape does not match the last forward pass");
    }
    Mat d(static_cast<Eigen::Index>(P), 2 * FB);
    for (int c = 0; c < FB; ++c) {
      for (std::size_t p = 0; p < P; ++p) {
        const std::size_t i = static_cast<std::size_t>(c) * P + p;
        const auto row = static_cast<Eigen::Index>(p);
        d(row, c) = static_cast<Scalar>(pre_.c_out * grad_mu.values[i]);
        d(row, FB + c) = static_cast<Scalar>(-pre_.c_skip * skip_input_[i] * grad_mu.values[i]);
      }
    }
    const int L = arch_.layers;
    Mat dh;
    for (int l = L - 1; l >= 0; --l) {
      const Layer& layer = layers_[static_cast<std::size_t>(l)];
      const auto& cols = cols_[static_cast<std::size_t>(l)];
      Mat dz;
      if (l == L - 1) {
        dz = std::move(d);
      } else {
        const Mat& z = pre_act_[static_cast<std::size_t>(l)];
        dz = dh.binaryExpr(z, [](Scalar g, Scalar v) { return g * silu_grad(v); });
      }
      if (mask_[layer.w_offset]) {
        weight_grads(layer).noalias() += cols.transpose() * dz;
        bias_grads(layer) += dz.colwise().sum();
      }
      if (l == 0) break;
      Mat dcols = dz * weights(layer).transpose();
      Mat dprev = Mat::Zero(static_cast<Eigen::Index>(P), layer.cin);
      col2im(dcols, layer.cin, dprev);
      // Residual layers pass the incoming gradient straight through.
      if (l < L - 1 && l > 0) dprev += dh;
      dh = std::move(dprev);
    }
  }

 private:
  struct Layer {
    int cin = 0, cout = 0;
    std::size_t w_offset = 0, b_offset = 0, end = 0;
  };

  static Scalar silu(Scalar v) { return v / (Scalar(1) + std::exp(-v)); }
  static Scalar silu_grad(Scalar v) {
    const Scalar s = Scalar(1) / (Scalar(1) + std::exp(-v));
    return s * (Scalar(1) + v * (Scalar(1) - s));
  }

  Eigen::Map<Mat> weights(const Layer& l) {
    return Eigen::Map<Mat>(params_.data() + l.w_offset, arch_.kernel * arch_.kernel * l.cin, l.cout);
  }
  Eigen::Map<RowVec> bias(const Layer& l) {
    return Eigen::Map<RowVec>(params_.data() + l.b_offset, l.cout);
  }
  Eigen::Map<Mat> weight_grads(const Layer& l) {
    return Eigen::Map<Mat>(grads_.data() + l.w_offset, arch_.kernel * arch_.kernel * l.cin, l.cout);
  }
  Eigen::Map<RowVec> bias_grads(const Layer& l) {
    return Eigen::Map<RowVec>(grads_.data() + l.b_offset, l.cout);
  }

  std::size_t wrap_index(int y, int x) const {
    y %= height_;
    if (y < 0) y += height_;
    x %= width_;
    if (x < 0) x += width_;
    return static_cast<std::size_t>(y) * width_ + x;
  }

  void im2col(const Mat& in, int cin, Mat& cols) const {
    const int k = arch_.kernel, r = k / 2;
    cols.resize(static_cast<Eigen::Index>(height_) * width_, k * k * cin);
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        Scalar* dst = cols.row(static_cast<Eigen::Index>(y) * width_ + x).data();
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            const Scalar* src =
                in.row(static_cast<Eigen::Index>(wrap_index(y + ky - r, x + kx - r))).data();
            std::copy_n(src, cin, dst + (ky * k + kx) * cin);
          }
        }
      }
    }
  }

  void col2im(const Mat& cols, int cin, Mat& out) const {
    const int k = arch_.kernel, r = k / 2;
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        const Scalar* src = cols.row(static_cast<Eigen::Index>(y) * width_ + x).data();
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            Scalar* dst =
                out.row(static_cast<Eigen::Index>(wrap_index(y + ky - r, x + kx - r))).data();
            const Scalar* s = src + (ky * k + kx) * cin;
            for (int c = 0; c < cin; ++c) dst[c] += s[c];
          }
        }
      }
    }
  }

  void check_inputs(const VoxelSequence& x, double sigma, const VoxelSequence& prompt) const {
    if (!(sigma > 0.0)) throw ParameterError("denoiser requires sigma > 0");
    if (x.frames != arch_.frames || x.bins != arch_.bins) {
      throw DataError("latent has " + std::to_string(x.frames) + "x" + std::to_string(x.bins) +
                      " frames x bins, network expects " + std::to_string(arch_.frames) + "x" +
                      std::to_string(arch_.bins));
    }
    if (x.height <= 0 || x.width <= 0 || x.values.size() != x.size()) {
      throw DataError("latent is empty or inconsistent");
    }
    if (prompt.frames > arch_.frames) throw DataError("more prompt frames than latent frames");
    if (prompt.frames > 0 && (prompt.bins != x.bins || prompt.height != x.height ||
                              prompt.width != x.width)) {
      throw DataError("prompt frames do not match the latent frame shape");
    }
  }

  DenoiserArch arch_;
  double sigma_data_;
  std::vector<Layer> layers_;
  std::vector<Scalar> params_;
  std::vector<Scalar> grads_;
  std::vector<std::uint8_t> mask_;

  // Activation workspace of the most recent forward pass.
  bool has_forward_ = false;
  int height_ = 0, width_ = 0;
  Preconditioning pre_{};
  std::vector<Mat> cols_, pre_act_, hidden_;
  Mat out_;
  std::vector<double> skip_input_;
};

using Denoiser = ConvDenoiser<float>;

}  // namespace emotion

#endif  // EMOTION_DENOISER_CONV_DENOISER_HPP_
