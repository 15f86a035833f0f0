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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "classifier/layer_spec.hpp"

namespace cle::nn {

struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t spatial() const noexcept { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const noexcept { return channels * spatial(); }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Sequential convolutional network over one sample at a time.
///
/// Activations are stored channel-major (channels x height*width). All
/// parameters live in one flat buffer so that optimisers, serialisation and
/// finite-difference checks can treat them uniformly. Forward and backward
/// passes take an explicit Workspace, so a const Network is safe to share
/// between threads as long as each thread owns its workspace.
template <typename T>
class Network {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  struct Layer {
    LayerSpec spec;
    Shape in;
    Shape out;
    std::size_t weight_offset = 0;
    std::size_t weight_count = 0;
    std::size_t bias_offset = 0;
    std::size_t bias_count = 0;
  };

  class Workspace {
   private:
    friend class Network;
    std::vector<Matrix> acts;           // acts[i] feeds layer i; acts.back() are the logits
    std::vector<Matrix> cols;           // im2col buffers per conv layer
    std::vector<std::vector<int>> arg;  // max-pool winners per pool layer
    std::vector<Matrix> deltas;         // d(loss)/d(acts[i])
    std::vector<Matrix> dcols;
  };

  Network(Shape input, std::vector<LayerSpec> layers);

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  Shape input_shape() const noexcept { return input_; }
  int output_size() const noexcept { return static_cast<int>(layers_.back().out.size()); }

  std::size_t param_count() const noexcept { return params_.size(); }
  std::span<T> params() noexcept { return params_; }
  std::span<const T> params() const noexcept { return params_; }

  // He-normal weights, zero biases; the output layer is all zero.
  void init_he(std::uint64_t seed);

  Workspace make_workspace() const;

  // Returns the logits; the view stays valid until the next call on `ws`.
  std::span<const T> forward(std::span<const T> input, Workspace& ws) const;

  // Accumulates d(loss)/d(params) into `grad` given d(loss)/d(logits) for the
  // most recent forward() on `ws`.
  void backward(std::span<const T> dlogits, Workspace& ws, std::span<T> grad) const;

  /// Weighted softmax cross-entropy for one sample: returns the loss and adds
  /// its parameter gradient to `grad`. `probabilities` (optional, size
  /// output_size) receives the softmax output.
  T loss_and_gradient(std::span<const T> input, int label, T weight, Workspace& ws, std::span<T> grad,
                      std::span<T> probabilities = {}) const;

  // Loss only; used by finite-difference checks.
  T loss(std::span<const T> input, int label, T weight, Workspace& ws) const;

 private:
  Shape input_;
  std::vector<Layer> layers_;
  std::vector<T> params_;
};

template <typename T>
void softmax(std::span<const T> logits, std::span<T> out);

extern template class Network<float>;
extern template class Network<double>;

}  // namespace cle::nn
