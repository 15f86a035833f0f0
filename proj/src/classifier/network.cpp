/*
 * Copyright 2026 The cle-screen Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "classifier/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "common/error.hpp"

namespace cle::nn {
namespace {

template <typename T>
using RowMatrix = typename Network<T>::Matrix;

// cols(row = (c*k + ky)*k + kx, col = oy*wo + ox) = in(c, (oy+ky)*w + ox + kx)
template <typename T>
void im2col(const RowMatrix<T>& in, const Shape& s, int k, RowMatrix<T>& cols) {
  const int ho = s.height - k + 1, wo = s.width - k + 1;
  for (int c = 0; c < s.channels; ++c) {
    const T* src = in.row(c).data();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = cols.row((c * k + ky) * k + kx).data();
        for (int oy = 0; oy < ho; ++oy) {
          std::copy_n(src + (oy + ky) * s.width + kx, wo, dst + oy * wo);
        }
      }
    }
  }
}

template <typename T>
void col2im(const RowMatrix<T>& dcols, const Shape& s, int k, RowMatrix<T>& din) {
  const int ho = s.height - k + 1, wo = s.width - k + 1;
  din.setZero();
  for (int c = 0; c < s.channels; ++c) {
    T* dst = din.row(c).data();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = dcols.row((c * k + ky) * k + kx).data();
        for (int oy = 0; oy < ho; ++oy) {
          T* d = dst + (oy + ky) * s.width + kx;
          const T* q = src + oy * wo;
          for (int ox = 0; ox < wo; ++ox) d[ox] += q[ox];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
void softmax(std::span<const T> logits, std::span<T> out) {
  const T m = *std::max_element(logits.begin(), logits.end());
  T sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += (out[i] = std::exp(logits[i] - m));
  for (auto& v : out) v /= sum;
}

template <typename T>
Network<T>::Network(Shape input, std::vector<LayerSpec> specs) : input_(input) {
  if (input.channels <= 0 || input.height <= 0 || input.width <= 0) {
    fail(ErrorCode::kInvalidArgument, "network input shape must be positive");
  }
  if (specs.empty()) fail(ErrorCode::kInvalidArgument, "network has no layers");
  Shape cur = input;
  std::size_t offset = 0;
  for (const auto& spec : specs) {
    Layer layer{spec, cur, cur};
    switch (spec.type) {
      case LayerType::kConv: {
        if (spec.filters <= 0 || spec.kernel <= 0) fail(ErrorCode::kInvalidArgument, "conv layer needs filters and kernel");
        if (cur.height < spec.kernel || cur.width < spec.kernel) {
          fail(ErrorCode::kInvalidArgument, "conv kernel larger than its input");
        }
        layer.out = {spec.filters, cur.height - spec.kernel + 1, cur.width - spec.kernel + 1};
        layer.weight_count = static_cast<std::size_t>(spec.filters) * cur.channels * spec.kernel * spec.kernel;
        layer.bias_count = spec.filters;
        break;
      }
      case LayerType::kRelu:
        break;
      case LayerType::kMaxPool:
        if (spec.kernel <= 0 || cur.height < spec.kernel || cur.width < spec.kernel) {
          fail(ErrorCode::kInvalidArgument, "max-pool window does not fit its input");
        }
        layer.out = {cur.channels, cur.height / spec.kernel, cur.width / spec.kernel};
        break;
      case LayerType::kGlobalAvgPool:
        layer.out = {cur.channels, 1, 1};
        break;
      case LayerType::kDense:
        if (spec.filters <= 0) fail(ErrorCode::kInvalidArgument, "dense layer needs units");
        layer.out = {spec.filters, 1, 1};
        layer.weight_count = static_cast<std::size_t>(spec.filters) * cur.size();
        layer.bias_count = spec.filters;
        break;
    }
    layer.weight_offset = offset;
    offset += layer.weight_count;
    layer.bias_offset = offset;
    offset += layer.bias_count;
    layers_.push_back(layer);
    cur = layer.out;
  }
  params_.assign(offset, T(0));
}

template <typename T>
void Network<T>::init_he(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::fill(params_.begin(), params_.end(), T(0));
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& l = layers_[li];
    if (l.weight_count == 0) continue;
    // The output layer starts at zero: the untrained network predicts (0.5, 0.5)
    // and early Adam steps cannot blow up the loss through it.
    if (li + 1 == layers_.size()) continue;
    const std::size_t fan_in = l.weight_count / l.bias_count;
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (std::size_t i = 0; i < l.weight_count; ++i) params_[l.weight_offset + i] = static_cast<T>(dist(rng));
  }
}

template <typename T>
typename Network<T>::Workspace Network<T>::make_workspace() const {
  Workspace ws;
  ws.acts.resize(layers_.size() + 1);
  ws.cols.resize(layers_.size());
  ws.arg.resize(layers_.size());
  ws.deltas.resize(layers_.size() + 1);
  ws.dcols.resize(layers_.size());
  ws.acts[0].resize(input_.channels, static_cast<Eigen::Index>(input_.spatial()));
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    ws.acts[i + 1].resize(l.out.channels, static_cast<Eigen::Index>(l.out.spatial()));
    if (l.spec.type == LayerType::kConv) {
      ws.cols[i].resize(static_cast<Eigen::Index>(l.in.channels) * l.spec.kernel * l.spec.kernel,
                        static_cast<Eigen::Index>(l.out.spatial()));
      if (i > 0) ws.dcols[i].resize(ws.cols[i].rows(), ws.cols[i].cols());
    } else if (l.spec.type == LayerType::kMaxPool) {
      ws.arg[i].resize(l.out.size());
    }
  }
  for (std::size_t i = 0; i < ws.acts.size(); ++i) ws.deltas[i].resize(ws.acts[i].rows(), ws.acts[i].cols());
  return ws;
}

template <typename T>
std::span<const T> Network<T>::forward(std::span<const T> input, Workspace& ws) const {
  if (input.size() != input_.size()) {
    fail(ErrorCode::kSizeMismatch, "network input has " + std::to_string(input.size()) + " values, expected " +
                                       std::to_string(input_.size()));
  }
  if (ws.acts.size() != layers_.size() + 1) ws = make_workspace();
  std::copy(input.begin(), input.end(), ws.acts[0].data());
  const T* p = params_.data();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const Matrix& in = ws.acts[i];
    Matrix& out = ws.acts[i + 1];
    switch (l.spec.type) {
      case LayerType::kConv: {
        im2col<T>(in, l.in, l.spec.kernel, ws.cols[i]);
        Eigen::Map<const Matrix> w(p + l.weight_offset, l.out.channels, ws.cols[i].rows());
        Eigen::Map<const Vector> b(p + l.bias_offset, l.out.channels);
        out.noalias() = w * ws.cols[i];
        out.colwise() += b;
        break;
      }
      case LayerType::kRelu:
        out = in.cwiseMax(T(0));
        break;
      case LayerType::kMaxPool: {
        const int k = l.spec.kernel;
        auto& arg = ws.arg[i];
        for (int c = 0; c < l.in.channels; ++c) {
          const T* src = in.row(c).data();
          T* dst = out.row(c).data();
          for (int oy = 0; oy < l.out.height; ++oy) {
            for (int ox = 0; ox < l.out.width; ++ox) {
              int best = (oy * k) * l.in.width + ox * k;
              for (int dy = 0; dy < k; ++dy) {
                for (int dx = 0; dx < k; ++dx) {
                  const int idx = (oy * k + dy) * l.in.width + ox * k + dx;
                  if (src[idx] > src[best]) best = idx;
                }
              }
              dst[oy * l.out.width + ox] = src[best];
              arg[static_cast<std::size_t>(c) * l.out.spatial() + oy * l.out.width + ox] = best;
            }
          }
        }
        break;
      }
      case LayerType::kGlobalAvgPool:
        out = in.rowwise().mean();
        break;
      case LayerType::kDense: {
        Eigen::Map<const Vector> x(in.data(), static_cast<Eigen::Index>(l.in.size()));
        Eigen::Map<const Matrix> w(p + l.weight_offset, l.out.channels, static_cast<Eigen::Index>(l.in.size()));
        Eigen::Map<const Vector> b(p + l.bias_offset, l.out.channels);
        Eigen::Map<Vector>(out.data(), l.out.channels).noalias() = w * x + b;
        break;
      }
    }
  }
  const Matrix& logits = ws.acts.back();
  return {logits.data(), static_cast<std::size_t>(logits.size())};
}

template <typename T>
void Network<T>::backward(std::span<const T> dlogits, Workspace& ws, std::span<T> grad) const {
  if (grad.size() != params_.size()) fail(ErrorCode::kSizeMismatch, "gradient buffer has the wrong size");
  const T* p = params_.data();
  T* g = grad.data();
  std::copy(dlogits.begin(), dlogits.end(), ws.deltas.back().data());

  for (std::size_t ii = layers_.size(); ii-- > 0;) {
    const auto& l = layers_[ii];
    const Matrix& in = ws.acts[ii];
    const Matrix& delta = ws.deltas[ii + 1];
    Matrix& din = ws.deltas[ii];
    const bool need_input_grad = ii > 0;
    switch (l.spec.type) {
      case LayerType::kConv: {
        const Eigen::Index kk = ws.cols[ii].rows();
        Eigen::Map<Matrix> gw(g + l.weight_offset, l.out.channels, kk);
        Eigen::Map<Vector> gb(g + l.bias_offset, l.out.channels);
        gw.noalias() += delta * ws.cols[ii].transpose();
        gb += delta.rowwise().sum();
        if (need_input_grad) {
          Eigen::Map<const Matrix> w(p + l.weight_offset, l.out.channels, kk);
          ws.dcols[ii].noalias() = w.transpose() * delta;
          col2im<T>(ws.dcols[ii], l.in, l.spec.kernel, din);
        }
        break;
      }
      case LayerType::kRelu:
        if (need_input_grad) din = (ws.acts[ii + 1].array() > T(0)).select(delta, T(0));
        break;
      case LayerType::kMaxPool:
        if (need_input_grad) {
          din.setZero();
          const auto& arg = ws.arg[ii];
          for (int c = 0; c < l.in.channels; ++c) {
            const T* d = delta.row(c).data();
            T* dst = din.row(c).data();
            for (std::size_t j = 0; j < l.out.spatial(); ++j) dst[arg[c * l.out.spatial() + j]] += d[j];
          }
        }
        break;
      case LayerType::kGlobalAvgPool:
        if (need_input_grad) {
          const T scale = T(1) / static_cast<T>(l.in.spatial());
          for (int c = 0; c < l.in.channels; ++c) din.row(c).setConstant(delta(c, 0) * scale);
        }
        break;
      case LayerType::kDense: {
        const auto n_in = static_cast<Eigen::Index>(l.in.size());
        Eigen::Map<const Vector> x(in.data(), n_in);
        Eigen::Map<const Vector> d(delta.data(), l.out.channels);
        Eigen::Map<Matrix> gw(g + l.weight_offset, l.out.channels, n_in);
        Eigen::Map<Vector> gb(g + l.bias_offset, l.out.channels);
        gw.noalias() += d * x.transpose();
        gb += d;
        if (need_input_grad) {
          Eigen::Map<const Matrix> w(p + l.weight_offset, l.out.channels, n_in);
          Eigen::Map<Vector>(din.data(), n_in).noalias() = w.transpose() * d;
        }
        break;
      }
    }
  }
}

template <typename T>
T Network<T>::loss_and_gradient(std::span<const T> input, int label, T weight, Workspace& ws, std::span<T> grad,
                                std::span<T> probabilities) const {
  auto logits = forward(input, ws);
  std::vector<T> prob(logits.size());
  softmax<T>(logits, prob);
  if (label < 0 || static_cast<std::size_t>(label) >= prob.size()) fail(ErrorCode::kInvalidArgument, "label out of range");
  const T loss = -weight * std::log(std::max(prob[label], std::numeric_limits<T>::min()));
  std::vector<T> dlogits(prob.size());
  for (std::size_t i = 0; i < prob.size(); ++i) dlogits[i] = weight * (prob[i] - (static_cast<int>(i) == label ? T(1) : T(0)));
  if (!probabilities.empty()) std::copy(prob.begin(), prob.end(), probabilities.begin());
  backward(dlogits, ws, grad);
  return loss;
}

template <typename T>
T Network<T>::loss(std::span<const T> input, int label, T weight, Workspace& ws) const {
  auto logits = forward(input, ws);
  std::vector<T> prob(logits.size());
  softmax<T>(logits, prob);
  return -weight * std::log(std::max(prob.at(label), std::numeric_limits<T>::min()));
}

template void softmax<float>(std::span<const float>, std::span<float>);
template void softmax<double>(std::span<const double>, std::span<double>);
template class Network<float>;
template class Network<double>;

}  // namespace cle::nn
