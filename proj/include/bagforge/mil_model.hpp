// Copyright 2026 The Bagforge Authors.
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

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "bagforge/group_linker.hpp"
#include "bagforge/tagging.hpp"

namespace bagforge {

enum class EncoderKind : std::uint32_t { kLite = 0, kPrecomputed = 1 };
enum class Aggregation { kAvg, kAttn };

std::string_view encoder_name(EncoderKind kind);
EncoderKind parse_encoder(std::string_view name);  // "lite", "precomputed"
std::string_view aggregation_name(Aggregation agg);
Aggregation parse_aggregation(std::string_view name);  // "avg", "attn"

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using StateMatrix = RowMatrix<float>;

struct ModelShape {
  int d = 64;
  int relations = 2;   // rows of Mr, expanded size under exprels
  int vocab = 1;       // rows of E; 0 for Precomputed
  int lmax = 128;      // P has lmax + 1 rows; 0 for Precomputed
  EncoderKind encoder = EncoderKind::kLite;
  bool operator==(const ModelShape&) const = default;
};

// Field order here is the checkpoint order.
template <typename T>
struct ModelParams {
  ModelShape shape;
  RowMatrix<T> E, P;
  RowMatrix<T> Wq, Wk, Wv, Wo;
  Vector<T> bq, bk, bv, bo;
  RowMatrix<T> W1;
  Vector<T> b1;
  RowMatrix<T> W2;
  Vector<T> b2;
  RowMatrix<T> Mr;
  Vector<T> br;

  static ModelParams zeros(const ModelShape& shape);
  // uniform(-scale, scale) for tables and maps, zero biases.
  void init_uniform(std::uint64_t seed, T scale = T(0.05));

  template <typename F>
  void for_each(F&& f) {
    f("E", E.data(), E.size());
    f("P", P.data(), P.size());
    f("Wq", Wq.data(), Wq.size());
    f("Wk", Wk.data(), Wk.size());
    f("Wv", Wv.data(), Wv.size());
    f("Wo", Wo.data(), Wo.size());
    f("bq", bq.data(), bq.size());
    f("bk", bk.data(), bk.size());
    f("bv", bv.data(), bv.size());
    f("bo", bo.data(), bo.size());
    f("W1", W1.data(), W1.size());
    f("b1", b1.data(), b1.size());
    f("W2", W2.data(), W2.size());
    f("b2", b2.data(), b2.size());
    f("Mr", Mr.data(), Mr.size());
    f("br", br.data(), br.size());
  }
  template <typename F>
  void for_each(F&& f) const {
    const_cast<ModelParams*>(this)->for_each(
        [&](const char* name, T* data, Eigen::Index n) {
          f(name, static_cast<const T*>(data), n);
        });
  }

  std::size_t size() const;
  bool all_finite() const;
  template <typename U>
  ModelParams<U> cast() const;
};

// One distinct sentence as the model sees it. Spans index rows of H and
// exclude the markers; head is the "$" span, tail the "^" span.
struct SentenceInput {
  std::vector<std::int32_t> ids;               // Lite
  std::shared_ptr<const StateMatrix> states;   // Precomputed, frozen
  TokenSpan head;
  TokenSpan tail;
  std::size_t length() const {
    return states ? static_cast<std::size_t>(states->rows()) : ids.size();
  }
};

// A bag after deduplication: `members[i]` indexes `sentences`.
struct BagInput {
  std::vector<const SentenceInput*> sentences;
  std::vector<std::uint32_t> members;
  std::int32_t label = 0;
};

template <typename T>
struct SentenceCache {
  RowMatrix<T> X, Q, K, V, A, C, H;
  Vector<T> h0, pooled_head, pooled_tail, hh, ht;
  Vector<T> rep;  // 3d
};

template <typename T>
struct BagResult {
  Vector<T> probs;
  Vector<T> alpha;  // attn training form only, one weight per member
  T loss = T(0);
};

// Gradient buffers share ModelParams layout; E and P rows are kept as
// sparse row lists for per-sentence buffers.
template <typename T>
struct SentenceGrad {
  RowMatrix<T> Wq, Wk, Wv, Wo;
  Vector<T> bq, bk, bv, bo;
  RowMatrix<T> W1;
  Vector<T> b1;
  RowMatrix<T> W2;
  Vector<T> b2;
  RowMatrix<T> dX;  // rows map to ids / positions
};

template <typename T>
void encode(const ModelParams<T>& params, const SentenceInput& input,
            SentenceCache<T>& cache);

template <typename T>
void relation_rep(const ModelParams<T>& params, const SentenceInput& input,
                  SentenceCache<T>& cache);

template <typename T>
Vector<T> sentence_rep(const ModelParams<T>& params, const SentenceInput& input);

// avg: mean of reps; attn: softmax(query . rep_i) weights. reps are columns.
template <typename T>
Vector<T> aggregate(const RowMatrix<T>& reps, Aggregation mode,
                    const Vector<T>* query, Vector<T>* alpha = nullptr);

template <typename T>
Vector<T> softmax(const Vector<T>& logits);

// Probabilities from precomputed reps (one column per member). Training
// form uses the gold row in attn mode; inference scores every relation with
// its own attention-weighted bag vector.
template <typename T>
BagResult<T> bag_probs(const ModelParams<T>& params, const RowMatrix<T>& member_reps,
                       Aggregation mode, std::int32_t label, bool training);

template <typename T>
BagResult<T> bag_forward(const ModelParams<T>& params, const BagInput& bag,
                         Aggregation mode, bool training);

// Loss gradient wrt each member rep (columns) and the classifier params.
template <typename T>
RowMatrix<T> bag_backward(const ModelParams<T>& params,
                          const RowMatrix<T>& member_reps, Aggregation mode,
                          std::int32_t label, const BagResult<T>& forward,
                          ModelParams<T>& grad);

// Backprop of d loss / d rep into the encoder and representation maps.
template <typename T>
void sentence_backward(const ModelParams<T>& params, const SentenceInput& input,
                       const SentenceCache<T>& cache, const Vector<T>& drep,
                       SentenceGrad<T>& grad);

template <typename T>
void accumulate(const SentenceInput& input, const SentenceGrad<T>& sg,
                ModelParams<T>& grad);

// Loss and full gradient over a batch, mean over bags. The serial form
// runs in sentence order; the parallel form computes per-sentence buffers
// concurrently and reduces them in the same order, so both agree bitwise.
template <typename T>
T batch_loss_and_grad_serial(const ModelParams<T>& params,
                             std::span<const BagInput> bags, Aggregation mode,
                             ModelParams<T>& grad);
template <typename T>
T batch_loss_and_grad(const ModelParams<T>& params, std::span<const BagInput> bags,
                      Aggregation mode, ModelParams<T>& grad, int workers);

template <typename T>
T bag_loss(const ModelParams<T>& params, const BagInput& bag, Aggregation mode);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_tensor;
};

GradCheckResult grad_check(const ModelParams<double>& params, const BagInput& bag,
                           Aggregation mode, double epsilon = 1e-5,
                           std::size_t min_coordinates = 200,
                           std::uint64_t seed = 7);

}  // namespace bagforge
