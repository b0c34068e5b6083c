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
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bagforge/bag_builder.hpp"
#include "bagforge/mil_model.hpp"

namespace bagforge {

// Token vocabulary for the Lite encoder; id 0 is the unknown token.
class TokenVocab {
 public:
  static constexpr std::string_view kUnknown = "[UNK]";

  TokenVocab();
  explicit TokenVocab(std::vector<std::string> tokens);  // tokens[0] must be [UNK]
  static TokenVocab build(std::span<const Bag> bags);

  std::int32_t id(std::string_view token) const;  // 0 when unknown
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

using StatesLookup =
    std::function<std::shared_ptr<const StateMatrix>(const TaggedSentence&)>;

// Model-ready view of a list of bags. Sentence inputs are shared by every
// bag that samples the same tagged sentence.
struct FeatureSet {
  std::deque<SentenceInput> sentences;
  std::vector<BagInput> bags;
  std::size_t unknown_tokens = 0;
};

// Lite when `vocab` is given, Precomputed when `states` is.
FeatureSet featurize(std::span<const Bag> bags, const TokenVocab* vocab,
                     const StatesLookup& states);

struct TrainConfig {
  int batch_size = 2;
  int epochs = 3;
  double lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  // Fraction of all steps spent ramping lr up from 0 before the linear decay.
  double warmup = 0.0;
  // Global gradient-norm clip; 0 disables it.
  double clip_norm = 0.0;
  Aggregation agg = Aggregation::kAvg;
  std::uint64_t seed = 1;
  int workers = 1;
};

// Learning rate before update number `step` (0-based) of `total_steps`.
double scheduled_lr(const TrainConfig& config, double step, double total_steps);

struct TrainLogRow {
  std::size_t step = 0;
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  std::optional<double> valid_loss;  // set on the last step of each epoch
};

struct TrainResult {
  ModelParams<float> params;  // best on validation, else last
  std::vector<TrainLogRow> log;
  int best_epoch = 0;
  std::optional<double> best_valid_loss;
};

// Adam with a linear decay of the learning rate to 0 over all steps.
// Shuffling is driven by `config.seed` alone.
TrainResult train(ModelParams<float> params, std::span<const BagInput> train_bags,
                  std::span<const BagInput> valid_bags, const TrainConfig& config);

// Mean loss; inference form in attn mode.
double mean_loss(const ModelParams<float>& params, std::span<const BagInput> bags,
                 Aggregation agg, int workers);

// Inference-form probabilities per bag.
std::vector<Vector<float>> predict(const ModelParams<float>& params,
                                   std::span<const BagInput> bags, Aggregation agg,
                                   int workers);

void write_train_log(const std::filesystem::path& path,
                     std::span<const TrainLogRow> log);

void save_checkpoint(const std::filesystem::path& path,
                     const ModelParams<float>& params);
ModelParams<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace bagforge
