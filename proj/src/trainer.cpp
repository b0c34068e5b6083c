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

#include "bagforge/trainer.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <set>

#include "bagforge/error.hpp"
#include "bagforge/io.hpp"
#include "bagforge/parallel.hpp"
#include "bagforge/text.hpp"

namespace bagforge {

TokenVocab::TokenVocab() : TokenVocab(std::vector<std::string>{std::string(kUnknown)}) {}

TokenVocab::TokenVocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty() || tokens_[0] != kUnknown) {
    throw Error(Errc::kMalformedInput, "token vocabulary must start with [UNK]");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<std::int32_t>(i)).second) {
      throw Error(Errc::kMalformedInput, "duplicate token " + tokens_[i]);
    }
  }
}

TokenVocab TokenVocab::build(std::span<const Bag> bags) {
  std::set<std::string> seen;
  for (const auto& b : bags) {
    for (const auto& s : b.sentences) seen.insert(s->tokens.begin(), s->tokens.end());
  }
  seen.erase(std::string(kUnknown));
  std::vector<std::string> tokens{std::string(kUnknown)};
  tokens.insert(tokens.end(), seen.begin(), seen.end());
  return TokenVocab(std::move(tokens));
}

std::int32_t TokenVocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? 0 : it->second;
}

FeatureSet featurize(std::span<const Bag> bags, const TokenVocab* vocab,
                     const StatesLookup& states) {
  FeatureSet out;
  std::unordered_map<const TaggedSentence*, const SentenceInput*> seen;
  const auto input_for = [&](const TaggedSentencePtr& s) {
    auto it = seen.find(s.get());
    if (it != seen.end()) return it->second;
    SentenceInput in;
    in.head = s->head_span;
    in.tail = s->tail_span;
    if (vocab) {
      in.ids.reserve(s->tokens.size());
      for (const auto& tok : s->tokens) {
        const auto id = vocab->id(tok);
        if (id == 0) ++out.unknown_tokens;
        in.ids.push_back(id);
      }
    } else {
      in.states = states(*s);
      if (static_cast<std::size_t>(in.states->rows()) != s->tokens.size()) {
        throw Error(Errc::kSpanMisaligned,
                    "archived states for " + s->sid + " have " +
                        std::to_string(in.states->rows()) + " rows, sentence has " +
                        std::to_string(s->tokens.size()) + " tokens");
      }
    }
    const SentenceInput* p = &out.sentences.emplace_back(std::move(in));
    seen.emplace(s.get(), p);
    return p;
  };

  out.bags.reserve(bags.size());
  for (const auto& b : bags) {
    BagInput bi;
    bi.label = static_cast<std::int32_t>(to_index(b.label));
    std::unordered_map<const SentenceInput*, std::uint32_t> local;
    for (const auto& s : b.sentences) {
      const SentenceInput* p = input_for(s);
      auto [it, fresh] = local.emplace(p, static_cast<std::uint32_t>(bi.sentences.size()));
      if (fresh) bi.sentences.push_back(p);
      bi.members.push_back(it->second);
    }
    out.bags.push_back(std::move(bi));
  }
  return out;
}

namespace {

struct TensorView {
  float* data;
  Eigen::Index size;
};

std::vector<TensorView> views(ModelParams<float>& p) {
  std::vector<TensorView> v;
  p.for_each([&](const char*, float* data, Eigen::Index n) { v.push_back({data, n}); });
  return v;
}

}  // namespace

double mean_loss(const ModelParams<float>& params, std::span<const BagInput> bags,
                 Aggregation agg, int workers) {
  if (bags.empty()) return 0.0;
  std::vector<double> losses(bags.size());
  const auto n = static_cast<std::int64_t>(bags.size());
#pragma omp parallel for schedule(dynamic, 4) num_threads(resolve_workers(workers))
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    losses[k] = bag_forward<float>(params, bags[k], agg, false).loss;
  }
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(bags.size());
}

std::vector<Vector<float>> predict(const ModelParams<float>& params,
                                   std::span<const BagInput> bags, Aggregation agg,
                                   int workers) {
  std::vector<Vector<float>> out(bags.size());
  const auto n = static_cast<std::int64_t>(bags.size());
#pragma omp parallel for schedule(dynamic, 4) num_threads(resolve_workers(workers))
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    BagInput unlabeled = bags[k];
    unlabeled.label = -1;
    out[k] = bag_forward<float>(params, unlabeled, agg, false).probs;
  }
  return out;
}

double scheduled_lr(const TrainConfig& config, double step, double total_steps) {
  const double warm = config.warmup * total_steps;
  if (step < warm) return config.lr * step / warm;
  return config.lr * (1.0 - (step - warm) / (total_steps - warm));
}

TrainResult train(ModelParams<float> params, std::span<const BagInput> train_bags,
                  std::span<const BagInput> valid_bags, const TrainConfig& config) {
  if (config.batch_size < 1 || config.epochs < 0 || config.lr < 0.0) {
    throw Error(Errc::kInvalidConfig, "batch_size >= 1, epochs >= 0, lr >= 0 required");
  }
  if (!(config.warmup >= 0.0 && config.warmup < 1.0) || !(config.clip_norm >= 0.0)) {
    throw Error(Errc::kInvalidConfig, "warmup must lie in [0, 1) and clip_norm >= 0");
  }
  const auto R = params.shape.relations;
  for (const auto& b : train_bags) {
    if (b.label < 0 || b.label >= R) {
      throw Error(Errc::kOutOfBounds, "training label " + std::to_string(b.label) +
                                          " outside " + std::to_string(R) + " classes");
    }
  }

  TrainResult result;
  const std::size_t n = train_bags.size();
  const auto bs = static_cast<std::size_t>(config.batch_size);
  const std::size_t steps_per_epoch = (n + bs - 1) / bs;
  const double total_steps =
      static_cast<double>(steps_per_epoch) * static_cast<double>(config.epochs);

  ModelParams<float> m = ModelParams<float>::zeros(params.shape);
  ModelParams<float> v = ModelParams<float>::zeros(params.shape);
  ModelParams<float> grad = ModelParams<float>::zeros(params.shape);
  auto pv = views(params);
  auto mv = views(m);
  auto vv = views(v);
  auto gv = views(grad);

  Rng rng(text::derive_seed(config.seed, "shuffle"));
  std::vector<std::size_t> order(n);
  std::vector<BagInput> batch;
  result.params = params;
  std::size_t step = 0;
  const auto b1 = static_cast<float>(config.beta1);
  const auto b2 = static_cast<float>(config.beta2);
  const auto eps = static_cast<float>(config.adam_eps);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += bs) {
      batch.clear();
      for (std::size_t k = start; k < std::min(n, start + bs); ++k) {
        batch.push_back(train_bags[order[k]]);
      }
      for (auto& t : gv) std::fill(t.data, t.data + t.size, 0.0f);
      float loss = 0.0f;
      try {
        loss = batch_loss_and_grad<float>(params, batch, config.agg, grad, config.workers);
      } catch (const Error& e) {
        if (e.code() != Errc::kNonFiniteLoss) throw;
        throw Error(Errc::kNonFiniteLoss, "step " + std::to_string(step) + ", train bag " +
                                              std::to_string(order[start]) + ": " + e.detail());
      }

      if (config.clip_norm > 0.0) {
        double sq = 0.0;
        for (const auto& t : gv) {
          for (Eigen::Index i = 0; i < t.size; ++i) sq += static_cast<double>(t.data[i]) * t.data[i];
        }
        const double norm = std::sqrt(sq);
        if (norm > config.clip_norm) {
          const auto scale = static_cast<float>(config.clip_norm / norm);
          for (auto& t : gv) {
            for (Eigen::Index i = 0; i < t.size; ++i) t.data[i] *= scale;
          }
        }
      }

      const double lr = scheduled_lr(config, static_cast<double>(step), total_steps);
      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      const auto step_size = static_cast<float>(lr * std::sqrt(c2) / c1);
      for (std::size_t t = 0; t < pv.size(); ++t) {
        float* p = pv[t].data;
        float* mm = mv[t].data;
        float* vv_ = vv[t].data;
        const float* g = gv[t].data;
        for (Eigen::Index i = 0; i < pv[t].size; ++i) {
          mm[i] = b1 * mm[i] + (1.0f - b1) * g[i];
          vv_[i] = b2 * vv_[i] + (1.0f - b2) * g[i] * g[i];
          p[i] -= step_size * mm[i] / (std::sqrt(vv_[i]) + eps);
        }
      }
      result.log.push_back({step, epoch, lr, static_cast<double>(loss), std::nullopt});
    }

    if (!params.all_finite()) {
      throw Error(Errc::kNonFiniteLoss, "non-finite parameters after epoch " +
                                            std::to_string(epoch));
    }
    if (!valid_bags.empty()) {
      const double vl = mean_loss(params, valid_bags, config.agg, config.workers);
      if (!result.log.empty()) result.log.back().valid_loss = vl;
      if (!result.best_valid_loss || vl < *result.best_valid_loss) {
        result.best_valid_loss = vl;
        result.best_epoch = epoch;
        result.params = params;
      }
    }
  }
  if (valid_bags.empty()) {
    result.params = params;
    result.best_epoch = config.epochs;
  }
  return result;
}

void write_train_log(const std::filesystem::path& path,
                     std::span<const TrainLogRow> log) {
  auto out = io::open_output(path);
  out << "step,epoch,lr,train_loss,valid_loss\n";
  char buf[160];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%.9g,%.9g,", row.step, row.epoch, row.lr,
                  row.train_loss);
    out << buf;
    if (row.valid_loss) {
      std::snprintf(buf, sizeof buf, "%.9g", *row.valid_loss);
      out << buf;
    }
    out << '\n';
  }
}

namespace {

constexpr std::array<char, 4> kMagic{'B', 'G', 'F', 'K'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t x) {
  out.write(reinterpret_cast<const char*>(&x), sizeof x);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t x = 0;
  in.read(reinterpret_cast<char*>(&x), sizeof x);
  if (!in) throw Error(Errc::kMalformedInput, "truncated checkpoint header");
  return x;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const ModelParams<float>& params) {
  static_assert(std::endian::native == std::endian::little);
  auto out = io::open_output(path);
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kVersion);
  const auto& s = params.shape;
  put_u32(out, static_cast<std::uint32_t>(s.d));
  put_u32(out, static_cast<std::uint32_t>(s.relations));
  put_u32(out, static_cast<std::uint32_t>(s.vocab));
  put_u32(out, static_cast<std::uint32_t>(s.lmax));
  put_u32(out, static_cast<std::uint32_t>(s.encoder));
  params.for_each([&](const char*, const float* data, Eigen::Index n) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(n)));
  });
  out.close();
  if (!out) throw Error(Errc::kIo, "failed writing " + path.string());
}

ModelParams<float> load_checkpoint(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) {
    throw Error(Errc::kMalformedInput, path.string() + " is not a checkpoint");
  }
  if (const auto version = get_u32(in); version != kVersion) {
    throw Error(Errc::kMalformedInput, "unsupported checkpoint version " +
                                           std::to_string(version));
  }
  ModelShape shape;
  shape.d = static_cast<int>(get_u32(in));
  shape.relations = static_cast<int>(get_u32(in));
  shape.vocab = static_cast<int>(get_u32(in));
  shape.lmax = static_cast<int>(get_u32(in));
  const auto kind = get_u32(in);
  if (kind > 1) throw Error(Errc::kMalformedInput, "unknown encoder kind in checkpoint");
  shape.encoder = static_cast<EncoderKind>(kind);
  auto params = ModelParams<float>::zeros(shape);
  params.for_each([&](const char* name, float* data, Eigen::Index n) {
    in.read(reinterpret_cast<char*>(data),
            static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(n)));
    if (!in) throw Error(Errc::kMalformedInput, std::string("truncated tensor ") + name);
  });
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(Errc::kMalformedInput, "trailing bytes in checkpoint");
  }
  return params;
}

}  // namespace bagforge
