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

#include "bagforge/mil_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "bagforge/error.hpp"
#include "bagforge/parallel.hpp"

namespace bagforge {

std::string_view encoder_name(EncoderKind kind) {
  return kind == EncoderKind::kLite ? "lite" : "precomputed";
}

EncoderKind parse_encoder(std::string_view name) {
  if (name == "lite") return EncoderKind::kLite;
  if (name == "precomputed") return EncoderKind::kPrecomputed;
  throw Error(Errc::kInvalidConfig, "unknown encoder " + std::string(name));
}

std::string_view aggregation_name(Aggregation agg) {
  return agg == Aggregation::kAvg ? "avg" : "attn";
}

Aggregation parse_aggregation(std::string_view name) {
  if (name == "avg") return Aggregation::kAvg;
  if (name == "attn") return Aggregation::kAttn;
  throw Error(Errc::kInvalidConfig, "unknown aggregation " + std::string(name));
}

template <typename T>
ModelParams<T> ModelParams<T>::zeros(const ModelShape& shape) {
  if (shape.d < 1 || shape.relations < 1) {
    throw Error(Errc::kInvalidConfig, "model needs d >= 1 and >= 1 relation");
  }
  ModelParams p;
  p.shape = shape;
  const int d = shape.d;
  const bool lite = shape.encoder == EncoderKind::kLite;
  if (lite && (shape.vocab < 1 || shape.lmax < 1)) {
    throw Error(Errc::kInvalidConfig, "lite encoder needs vocab and lmax >= 1");
  }
  const int a = lite ? d : 0;
  p.E = RowMatrix<T>::Zero(lite ? shape.vocab : 0, d);
  p.P = RowMatrix<T>::Zero(lite ? shape.lmax + 1 : 0, d);
  p.Wq = p.Wk = p.Wv = p.Wo = RowMatrix<T>::Zero(a, a);
  p.bq = p.bk = p.bv = p.bo = Vector<T>::Zero(a);
  p.W1 = p.W2 = RowMatrix<T>::Zero(d, d);
  p.b1 = p.b2 = Vector<T>::Zero(d);
  p.Mr = RowMatrix<T>::Zero(shape.relations, 3 * d);
  p.br = Vector<T>::Zero(shape.relations);
  return p;
}

template <typename T>
void ModelParams<T>::init_uniform(std::uint64_t seed, T scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-static_cast<double>(scale),
                                           static_cast<double>(scale));
  for_each([&](const char* name, T* data, Eigen::Index n) {
    const bool bias = name[0] == 'b';
    for (Eigen::Index i = 0; i < n; ++i) {
      data[i] = bias ? T(0) : static_cast<T>(u(rng));
    }
  });
}

template <typename T>
std::size_t ModelParams<T>::size() const {
  std::size_t n = 0;
  for_each([&](const char*, const T*, Eigen::Index k) { n += k; });
  return n;
}

template <typename T>
bool ModelParams<T>::all_finite() const {
  bool ok = true;
  for_each([&](const char*, const T* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n && ok; ++i) ok = std::isfinite(data[i]);
  });
  return ok;
}

template <typename T>
template <typename U>
ModelParams<U> ModelParams<T>::cast() const {
  ModelParams<U> out;
  out.shape = shape;
  out.E = E.template cast<U>();
  out.P = P.template cast<U>();
  out.Wq = Wq.template cast<U>();
  out.Wk = Wk.template cast<U>();
  out.Wv = Wv.template cast<U>();
  out.Wo = Wo.template cast<U>();
  out.bq = bq.template cast<U>();
  out.bk = bk.template cast<U>();
  out.bv = bv.template cast<U>();
  out.bo = bo.template cast<U>();
  out.W1 = W1.template cast<U>();
  out.b1 = b1.template cast<U>();
  out.W2 = W2.template cast<U>();
  out.b2 = b2.template cast<U>();
  out.Mr = Mr.template cast<U>();
  out.br = br.template cast<U>();
  return out;
}

template <typename T>
Vector<T> softmax(const Vector<T>& logits) {
  Vector<T> out = (logits.array() - logits.maxCoeff()).exp();
  out /= out.sum();
  return out;
}

namespace {

template <typename T>
void softmax_rows(RowMatrix<T>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    row = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
}

template <typename T>
Vector<T> mean_rows(const RowMatrix<T>& H, const TokenSpan& s) {
  const auto n = static_cast<Eigen::Index>(s.length());
  return H.middleRows(static_cast<Eigen::Index>(s.first), n)
             .colwise()
             .sum()
             .transpose() /
         static_cast<T>(n);
}

void check_span(const TokenSpan& s, std::size_t rows) {
  if (s.first > s.last || s.last >= rows) {
    throw Error(Errc::kOutOfBounds,
                "entity span [" + std::to_string(s.first) + ", " +
                    std::to_string(s.last) + "] outside " +
                    std::to_string(rows) + " rows");
  }
}

std::size_t position_row(std::size_t i, int lmax) {
  return std::min<std::size_t>(i, static_cast<std::size_t>(lmax));
}

}  // namespace

template <typename T>
void encode(const ModelParams<T>& params, const SentenceInput& input,
            SentenceCache<T>& cache) {
  if (params.shape.encoder == EncoderKind::kPrecomputed) {
    if (!input.states) {
      throw Error(Errc::kMissingSid, "no precomputed states for sentence");
    }
    if (input.states->cols() != params.shape.d) {
      throw Error(Errc::kOutOfBounds, "precomputed state width != d");
    }
    cache.H = input.states->template cast<T>();
    return;
  }
  const auto n = static_cast<Eigen::Index>(input.ids.size());
  const int d = params.shape.d;
  if (n == 0) throw Error(Errc::kOutOfBounds, "empty token sequence");
  cache.X.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto id = input.ids[static_cast<std::size_t>(i)];
    if (id < 0 || id >= params.shape.vocab) {
      throw Error(Errc::kOutOfBounds, "token id " + std::to_string(id));
    }
    cache.X.row(i) =
        params.E.row(id) +
        params.P.row(static_cast<Eigen::Index>(
            position_row(static_cast<std::size_t>(i), params.shape.lmax)));
  }
  cache.Q = (cache.X * params.Wq.transpose()).rowwise() + params.bq.transpose();
  cache.K = (cache.X * params.Wk.transpose()).rowwise() + params.bk.transpose();
  cache.V = (cache.X * params.Wv.transpose()).rowwise() + params.bv.transpose();
  cache.A = cache.Q * cache.K.transpose() / std::sqrt(static_cast<T>(d));
  softmax_rows(cache.A);
  cache.C = cache.A * cache.V;
  cache.H = cache.X + ((cache.C * params.Wo.transpose()).rowwise() +
                       params.bo.transpose());
}

template <typename T>
void relation_rep(const ModelParams<T>& params, const SentenceInput& input,
                  SentenceCache<T>& cache) {
  const auto rows = static_cast<std::size_t>(cache.H.rows());
  check_span(input.head, rows);
  check_span(input.tail, rows);
  const int d = params.shape.d;
  cache.h0 = (params.W1 * cache.H.row(0).transpose() + params.b1).array().tanh();
  cache.pooled_head = mean_rows(cache.H, input.head);
  cache.pooled_tail = mean_rows(cache.H, input.tail);
  cache.hh = (params.W2 * cache.pooled_head + params.b2).array().tanh();
  cache.ht = (params.W2 * cache.pooled_tail + params.b2).array().tanh();
  cache.rep.resize(3 * d);
  cache.rep << cache.h0, cache.hh, cache.ht;
}

template <typename T>
Vector<T> sentence_rep(const ModelParams<T>& params, const SentenceInput& input) {
  SentenceCache<T> cache;
  encode(params, input, cache);
  relation_rep(params, input, cache);
  return cache.rep;
}

template <typename T>
Vector<T> aggregate(const RowMatrix<T>& reps, Aggregation mode,
                    const Vector<T>* query, Vector<T>* alpha) {
  if (reps.cols() == 0) throw Error(Errc::kEmptyBag, "aggregate over empty bag");
  if (mode == Aggregation::kAvg) {
    if (alpha) {
      *alpha = Vector<T>::Constant(reps.cols(), T(1) / static_cast<T>(reps.cols()));
    }
    return reps.rowwise().mean();
  }
  if (!query) throw Error(Errc::kInvalidConfig, "attention needs a relation row");
  const Vector<T> a = softmax<T>(reps.transpose() * *query);
  if (alpha) *alpha = a;
  return reps * a;
}

template <typename T>
BagResult<T> bag_probs(const ModelParams<T>& params, const RowMatrix<T>& member_reps,
                       Aggregation mode, std::int32_t label, bool training) {
  BagResult<T> out;
  const auto R = params.Mr.rows();
  if (mode == Aggregation::kAvg || training) {
    Vector<T> query;
    if (mode == Aggregation::kAttn) {
      if (label < 0 || label >= R) throw Error(Errc::kOutOfBounds, "label out of range");
      query = params.Mr.row(label).transpose();
    }
    const Vector<T> b = aggregate<T>(member_reps, mode,
                                     mode == Aggregation::kAttn ? &query : nullptr,
                                     &out.alpha);
    out.probs = softmax<T>(params.Mr * b + params.br);
  } else {
    Vector<T> logits(R);
    for (Eigen::Index k = 0; k < R; ++k) {
      const Vector<T> query = params.Mr.row(k).transpose();
      const Vector<T> b = aggregate<T>(member_reps, mode, &query);
      logits[k] = params.Mr.row(k).dot(b) + params.br[k];
    }
    out.probs = softmax<T>(logits);
  }
  if (label >= 0) {
    if (label >= R) throw Error(Errc::kOutOfBounds, "label out of range");
    out.loss = -std::log(out.probs[label]);
  }
  return out;
}

namespace {

template <typename T>
struct DedupBatch {
  std::vector<const SentenceInput*> unique;
  std::vector<std::vector<std::uint32_t>> members;  // per bag, into unique
};

template <typename T>
DedupBatch<T> dedup(std::span<const BagInput> bags) {
  DedupBatch<T> out;
  std::unordered_map<const SentenceInput*, std::uint32_t> index;
  for (const auto& bag : bags) {
    if (bag.members.empty()) throw Error(Errc::kEmptyBag, "bag without members");
    std::vector<std::uint32_t> m;
    m.reserve(bag.members.size());
    for (std::uint32_t k : bag.members) {
      if (k >= bag.sentences.size()) throw Error(Errc::kOutOfBounds, "bag member index");
      const SentenceInput* s = bag.sentences[k];
      auto [it, fresh] =
          index.emplace(s, static_cast<std::uint32_t>(out.unique.size()));
      if (fresh) out.unique.push_back(s);
      m.push_back(it->second);
    }
    out.members.push_back(std::move(m));
  }
  return out;
}

template <typename T>
RowMatrix<T> gather(const std::vector<SentenceCache<T>>& caches,
                    const std::vector<std::uint32_t>& members) {
  const auto dim = caches[members.front()].rep.size();
  RowMatrix<T> reps(dim, static_cast<Eigen::Index>(members.size()));
  for (std::size_t i = 0; i < members.size(); ++i) {
    reps.col(static_cast<Eigen::Index>(i)) = caches[members[i]].rep;
  }
  return reps;
}

template <typename T>
T batch_impl(const ModelParams<T>& params, std::span<const BagInput> bags,
             Aggregation mode, ModelParams<T>& grad, int workers, bool parallel) {
  if (bags.empty()) return T(0);
  const auto batch = dedup<T>(bags);
  const auto n = static_cast<std::int64_t>(batch.unique.size());
  std::vector<SentenceCache<T>> caches(batch.unique.size());

  const int threads = parallel ? resolve_workers(workers) : 1;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    encode(params, *batch.unique[k], caches[k]);
    relation_rep(params, *batch.unique[k], caches[k]);
  }

  T loss = T(0);
  const int dim = 3 * params.shape.d;
  std::vector<Vector<T>> drep(batch.unique.size(), Vector<T>::Zero(dim));
  for (std::size_t b = 0; b < bags.size(); ++b) {
    const RowMatrix<T> reps = gather(caches, batch.members[b]);
    const auto fwd = bag_probs<T>(params, reps, mode, bags[b].label, true);
    if (!std::isfinite(fwd.loss)) {
      throw Error(Errc::kNonFiniteLoss, "non-finite loss on batch bag " + std::to_string(b));
    }
    loss += fwd.loss;
    const RowMatrix<T> d = bag_backward<T>(params, reps, mode, bags[b].label, fwd, grad);
    for (std::size_t i = 0; i < batch.members[b].size(); ++i) {
      drep[batch.members[b][i]] += d.col(static_cast<Eigen::Index>(i));
    }
  }

  std::vector<SentenceGrad<T>> sgrads(batch.unique.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    sentence_backward(params, *batch.unique[k], caches[k], drep[k], sgrads[k]);
  }
  for (std::size_t k = 0; k < batch.unique.size(); ++k) {
    accumulate(*batch.unique[k], sgrads[k], grad);
  }

  const T scale = T(1) / static_cast<T>(bags.size());
  grad.for_each([&](const char*, T* data, Eigen::Index m) {
    for (Eigen::Index i = 0; i < m; ++i) data[i] *= scale;
  });
  return loss * scale;
}

}  // namespace

template <typename T>
BagResult<T> bag_forward(const ModelParams<T>& params, const BagInput& bag,
                         Aggregation mode, bool training) {
  const auto batch = dedup<T>(std::span<const BagInput>(&bag, 1));
  std::vector<SentenceCache<T>> caches(batch.unique.size());
  for (std::size_t k = 0; k < batch.unique.size(); ++k) {
    encode(params, *batch.unique[k], caches[k]);
    relation_rep(params, *batch.unique[k], caches[k]);
  }
  return bag_probs<T>(params, gather(caches, batch.members[0]), mode,
                      bag.label, training);
}

template <typename T>
RowMatrix<T> bag_backward(const ModelParams<T>& params,
                          const RowMatrix<T>& member_reps, Aggregation mode,
                          std::int32_t label, const BagResult<T>& forward,
                          ModelParams<T>& grad) {
  const auto m = member_reps.cols();
  Vector<T> dlogits = forward.probs;
  dlogits[label] -= T(1);
  const Vector<T> b = member_reps * forward.alpha;
  grad.Mr.noalias() += dlogits * b.transpose();
  grad.br += dlogits;
  const Vector<T> db = params.Mr.transpose() * dlogits;
  if (mode == Aggregation::kAvg) {
    return (db / static_cast<T>(m)).replicate(1, m);
  }
  const Vector<T>& alpha = forward.alpha;
  const Vector<T> dalpha = member_reps.transpose() * db;
  const Vector<T> de =
      alpha.array() * (dalpha.array() - alpha.dot(dalpha));
  const Vector<T> query = params.Mr.row(label).transpose();
  RowMatrix<T> dreps = db * alpha.transpose() + query * de.transpose();
  grad.Mr.row(label) += (member_reps * de).transpose();
  return dreps;
}

template <typename T>
void sentence_backward(const ModelParams<T>& params, const SentenceInput& input,
                       const SentenceCache<T>& cache, const Vector<T>& drep,
                       SentenceGrad<T>& g) {
  const int d = params.shape.d;
  const auto n = cache.H.rows();
  g.W1 = RowMatrix<T>::Zero(d, d);
  g.W2 = RowMatrix<T>::Zero(d, d);
  g.b1 = Vector<T>::Zero(d);
  g.b2 = Vector<T>::Zero(d);

  RowMatrix<T> dH = RowMatrix<T>::Zero(n, d);
  const Vector<T> dz0 =
      drep.segment(0, d).array() * (T(1) - cache.h0.array().square());
  g.W1.noalias() += dz0 * cache.H.row(0);
  g.b1 += dz0;
  dH.row(0) += (params.W1.transpose() * dz0).transpose();

  const auto pool_back = [&](const Vector<T>& h, const Vector<T>& pooled,
                             const TokenSpan& span, Eigen::Index offset) {
    const Vector<T> dz = drep.segment(offset, d).array() * (T(1) - h.array().square());
    g.W2.noalias() += dz * pooled.transpose();
    g.b2 += dz;
    const Vector<T> dp =
        params.W2.transpose() * dz / static_cast<T>(span.length());
    for (std::size_t r = span.first; r <= span.last; ++r) {
      dH.row(static_cast<Eigen::Index>(r)) += dp.transpose();
    }
  };
  pool_back(cache.hh, cache.pooled_head, input.head, d);
  pool_back(cache.ht, cache.pooled_tail, input.tail, 2 * d);

  if (params.shape.encoder == EncoderKind::kPrecomputed) {
    g.dX.resize(0, 0);
    return;
  }

  g.dX = dH;
  g.Wo.noalias() = dH.transpose() * cache.C;
  g.bo = dH.colwise().sum().transpose();
  const RowMatrix<T> dC = dH * params.Wo;
  const RowMatrix<T> dA = dC * cache.V.transpose();
  const RowMatrix<T> dV = cache.A.transpose() * dC;
  RowMatrix<T> dS = cache.A.array() *
                    (dA.array().colwise() -
                     (dA.array() * cache.A.array()).rowwise().sum());
  dS /= std::sqrt(static_cast<T>(d));
  const RowMatrix<T> dQ = dS * cache.K;
  const RowMatrix<T> dK = dS.transpose() * cache.Q;

  g.Wq.noalias() = dQ.transpose() * cache.X;
  g.Wk.noalias() = dK.transpose() * cache.X;
  g.Wv.noalias() = dV.transpose() * cache.X;
  g.bq = dQ.colwise().sum().transpose();
  g.bk = dK.colwise().sum().transpose();
  g.bv = dV.colwise().sum().transpose();
  g.dX.noalias() += dQ * params.Wq;
  g.dX.noalias() += dK * params.Wk;
  g.dX.noalias() += dV * params.Wv;
}

template <typename T>
void accumulate(const SentenceInput& input, const SentenceGrad<T>& sg,
                ModelParams<T>& grad) {
  grad.W1 += sg.W1;
  grad.b1 += sg.b1;
  grad.W2 += sg.W2;
  grad.b2 += sg.b2;
  if (grad.shape.encoder == EncoderKind::kPrecomputed) return;
  grad.Wq += sg.Wq;
  grad.Wk += sg.Wk;
  grad.Wv += sg.Wv;
  grad.Wo += sg.Wo;
  grad.bq += sg.bq;
  grad.bk += sg.bk;
  grad.bv += sg.bv;
  grad.bo += sg.bo;
  for (Eigen::Index i = 0; i < sg.dX.rows(); ++i) {
    grad.E.row(input.ids[static_cast<std::size_t>(i)]) += sg.dX.row(i);
    grad.P.row(static_cast<Eigen::Index>(
        position_row(static_cast<std::size_t>(i), grad.shape.lmax))) += sg.dX.row(i);
  }
}

template <typename T>
T batch_loss_and_grad_serial(const ModelParams<T>& params,
                             std::span<const BagInput> bags, Aggregation mode,
                             ModelParams<T>& grad) {
  return batch_impl(params, bags, mode, grad, 1, false);
}

template <typename T>
T batch_loss_and_grad(const ModelParams<T>& params, std::span<const BagInput> bags,
                      Aggregation mode, ModelParams<T>& grad, int workers) {
  return batch_impl(params, bags, mode, grad, workers, true);
}

template <typename T>
T bag_loss(const ModelParams<T>& params, const BagInput& bag, Aggregation mode) {
  return bag_forward(params, bag, mode, true).loss;
}

GradCheckResult grad_check(const ModelParams<double>& params, const BagInput& bag,
                           Aggregation mode, double epsilon,
                           std::size_t min_coordinates, std::uint64_t seed) {
  ModelParams<double> grad = ModelParams<double>::zeros(params.shape);
  batch_loss_and_grad_serial<double>(params, std::span<const BagInput>(&bag, 1),
                                     mode, grad);

  // Candidate coordinates: every entry of the dense tensors plus the E and
  // P rows this bag actually touches.
  struct Coord {
    std::size_t tensor;
    Eigen::Index index;
  };
  std::vector<std::vector<Coord>> pools;
  std::vector<std::string> names;
  std::vector<double*> param_data;
  std::vector<const double*> grad_data;
  ModelParams<double> probe = params;
  std::vector<Eigen::Index> touched_e, touched_p;
  if (params.shape.encoder == EncoderKind::kLite) {
    std::vector<bool> e(static_cast<std::size_t>(params.shape.vocab), false);
    std::vector<bool> p(static_cast<std::size_t>(params.shape.lmax + 1), false);
    for (const SentenceInput* s : bag.sentences) {
      for (std::size_t i = 0; i < s->ids.size(); ++i) {
        e[static_cast<std::size_t>(s->ids[i])] = true;
        p[position_row(i, params.shape.lmax)] = true;
      }
    }
    for (std::size_t i = 0; i < e.size(); ++i) if (e[i]) touched_e.push_back(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < p.size(); ++i) if (p[i]) touched_p.push_back(static_cast<Eigen::Index>(i));
  }
  probe.for_each([&](const char* name, double* data, Eigen::Index) {
    names.emplace_back(name);
    param_data.push_back(data);
    pools.emplace_back();
  });
  grad.for_each([&](const char*, double* data, Eigen::Index) {
    grad_data.push_back(data);
  });
  std::size_t t = 0;
  probe.for_each([&](const char* name, double*, Eigen::Index n) {
    const std::string nm(name);
    const int d = params.shape.d;
    if (nm == "E" || nm == "P") {
      for (Eigen::Index row : (nm == "E" ? touched_e : touched_p)) {
        for (int c = 0; c < d; ++c) pools[t].push_back({t, row * d + c});
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) pools[t].push_back({t, i});
    }
    ++t;
  });

  std::size_t total = 0;
  for (const auto& p : pools) total += p.size();
  std::mt19937_64 rng(seed);
  std::vector<Coord> chosen;
  for (auto& p : pools) {
    if (p.empty()) continue;
    const std::size_t want = std::min<std::size_t>(
        p.size(), std::max<std::size_t>(
                      8, (min_coordinates * p.size() + total - 1) / total + 1));
    std::shuffle(p.begin(), p.end(), rng);
    chosen.insert(chosen.end(), p.begin(), p.begin() + static_cast<std::ptrdiff_t>(want));
  }

  GradCheckResult result;
  result.coordinates = chosen.size();
  for (const Coord& c : chosen) {
    double& x = param_data[c.tensor][c.index];
    const double saved = x;
    x = saved + epsilon;
    const double up = bag_loss<double>(probe, bag, mode);
    x = saved - epsilon;
    const double down = bag_loss<double>(probe, bag, mode);
    x = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double analytic = grad_data[c.tensor][c.index];
    const double denom = std::max(std::abs(numeric), std::abs(analytic));
    const double err = denom < 1e-8 ? 0.0 : std::abs(numeric - analytic) / denom;
    if (err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_tensor = names[c.tensor];
    }
  }
  return result;
}

#define BAGFORGE_INSTANTIATE(T)                                                  \
  template struct ModelParams<T>;                                                \
  template Vector<T> softmax<T>(const Vector<T>&);                               \
  template void encode<T>(const ModelParams<T>&, const SentenceInput&,           \
                          SentenceCache<T>&);                                    \
  template void relation_rep<T>(const ModelParams<T>&, const SentenceInput&,     \
                                SentenceCache<T>&);                              \
  template Vector<T> sentence_rep<T>(const ModelParams<T>&, const SentenceInput&); \
  template Vector<T> aggregate<T>(const RowMatrix<T>&, Aggregation,              \
                                  const Vector<T>*, Vector<T>*);                 \
  template BagResult<T> bag_probs<T>(const ModelParams<T>&, const RowMatrix<T>&, \
                                     Aggregation, std::int32_t, bool);           \
  template BagResult<T> bag_forward<T>(const ModelParams<T>&, const BagInput&,   \
                                       Aggregation, bool);                       \
  template RowMatrix<T> bag_backward<T>(const ModelParams<T>&,                   \
                                        const RowMatrix<T>&, Aggregation,        \
                                        std::int32_t, const BagResult<T>&,       \
                                        ModelParams<T>&);                        \
  template void sentence_backward<T>(const ModelParams<T>&, const SentenceInput&, \
                                     const SentenceCache<T>&, const Vector<T>&,  \
                                     SentenceGrad<T>&);                          \
  template void accumulate<T>(const SentenceInput&, const SentenceGrad<T>&,      \
                              ModelParams<T>&);                                  \
  template T batch_loss_and_grad_serial<T>(const ModelParams<T>&,                \
                                           std::span<const BagInput>,            \
                                           Aggregation, ModelParams<T>&);        \
  template T batch_loss_and_grad<T>(const ModelParams<T>&,                       \
                                    std::span<const BagInput>, Aggregation,      \
                                    ModelParams<T>&, int);                       \
  template T bag_loss<T>(const ModelParams<T>&, const BagInput&, Aggregation);

BAGFORGE_INSTANTIATE(float)
BAGFORGE_INSTANTIATE(double)
#undef BAGFORGE_INSTANTIATE

template ModelParams<double> ModelParams<float>::cast<double>() const;
template ModelParams<float> ModelParams<double>::cast<float>() const;
template ModelParams<float> ModelParams<float>::cast<float>() const;

}  // namespace bagforge
