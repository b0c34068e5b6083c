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

// Serial reference vs OpenMP kernels on synthetic desk-scale inputs.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "bagforge/corpus_ingest.hpp"
#include "bagforge/group_linker.hpp"
#include "bagforge/kb_store.hpp"
#include "bagforge/mention_matcher.hpp"
#include "bagforge/mil_model.hpp"

namespace {

using namespace bagforge;

struct MatchFixture {
  EntitySet entities;
  MentionIndex index;
  std::vector<RawSentence> sentences;
  std::vector<InputLine> lines;

  explicit MatchFixture(std::size_t n_forms, std::size_t n_sentences) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> letter(0, 25);
    const auto word = [&](int len) {
      std::string w;
      for (int i = 0; i < len; ++i) w += static_cast<char>('a' + letter(rng));
      return w;
    };
    std::vector<std::string> forms;
    for (std::size_t i = 0; i < n_forms; ++i) {
      std::string f = word(6);
      if (i % 3 == 0) f += " " + word(5);
      forms.push_back(f);
      entities.add({"C" + std::to_string(i), {f}});
    }
    index = MentionIndex::build(entities);
    std::uniform_int_distribution<std::size_t> pick(0, forms.size() - 1);
    for (std::size_t i = 0; i < n_sentences; ++i) {
      std::string text = word(4) + " " + forms[pick(rng)] + " " + word(7) + " " +
                         forms[pick(rng)] + " " + word(5) + " " + word(6) + " .";
      sentences.push_back({"s" + std::to_string(i), text});
      lines.push_back({i + 1, "s" + std::to_string(i) + "\t" + text});
    }
  }
};

const MatchFixture& match_fixture() {
  static const MatchFixture f(100000, 20000);
  return f;
}

void BM_FindMentionsSerial(benchmark::State& state) {
  const auto& f = match_fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_mentions_batch_serial(f.index, f.sentences));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.sentences.size()));
}

void BM_FindMentionsParallel(benchmark::State& state) {
  const auto& f = match_fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        find_mentions_batch(f.index, f.sentences, static_cast<int>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.sentences.size()));
}

void BM_FilterSerial(benchmark::State& state) {
  const auto& f = match_fixture();
  for (auto _ : state) {
    SentenceFilter filter;
    benchmark::DoNotOptimize(filter.feed_serial(f.lines));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.lines.size()));
}

void BM_FilterParallel(benchmark::State& state) {
  const auto& f = match_fixture();
  for (auto _ : state) {
    SentenceFilter filter;
    benchmark::DoNotOptimize(filter.feed(f.lines, static_cast<int>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.lines.size()));
}

struct LinkFixture {
  GroupIndex index;
  std::vector<MatchedSentence> sentences;

  LinkFixture() {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::uint32_t> ent(0, 499);
    std::vector<Triple> triples;
    for (int i = 0; i < 3000; ++i) {
      const auto h = ent(rng), t = ent(rng);
      if (h != t) triples.push_back({EntityId{h}, RelationId{1}, EntityId{t}});
    }
    std::sort(triples.begin(), triples.end());
    triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
    index = build_group_index(triples);
    for (int i = 0; i < 20000; ++i) {
      MatchedSentence s;
      s.sid = "s" + std::to_string(i);
      const auto& g = triples[static_cast<std::size_t>(i) % triples.size()];
      s.mentions = {{g.head, 0, 5, "x"}, {g.tail, 10, 15, "y"}, {EntityId{ent(rng)}, 20, 25, "z"}};
      sentences.push_back(std::move(s));
    }
  }
};

const LinkFixture& link_fixture() {
  static const LinkFixture f;
  return f;
}

void BM_LinkSerial(benchmark::State& state) {
  const auto& f = link_fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(link_corpus_serial(f.sentences, f.index, 3));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.sentences.size()));
}

void BM_LinkParallel(benchmark::State& state) {
  const auto& f = link_fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        link_corpus(f.sentences, f.index, 3, static_cast<int>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.sentences.size()));
}

struct ModelFixture {
  ModelParams<float> params;
  std::vector<SentenceInput> sentences;
  std::vector<BagInput> bags;

  ModelFixture() {
    ModelShape shape{64, 7, 400, 128, EncoderKind::kLite};
    params = ModelParams<float>::zeros(shape);
    params.init_uniform(1);
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::int32_t> tok(1, 399);
    sentences.resize(64);
    for (auto& s : sentences) {
      s.ids.resize(24);
      for (auto& id : s.ids) id = tok(rng);
      s.head = {2, 3};
      s.tail = {8, 8};
    }
    for (int b = 0; b < 2; ++b) {
      BagInput bag;
      bag.label = b + 1;
      for (int k = 0; k < 16; ++k) {
        bag.sentences.push_back(&sentences[static_cast<std::size_t>(b * 16 + k)]);
        bag.members.push_back(static_cast<std::uint32_t>(k));
      }
      bags.push_back(std::move(bag));
    }
  }
};

void BM_BatchGradSerial(benchmark::State& state) {
  static ModelFixture f;
  auto grad = ModelParams<float>::zeros(f.params.shape);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        batch_loss_and_grad_serial<float>(f.params, f.bags, Aggregation::kAttn, grad));
  }
}

void BM_BatchGradParallel(benchmark::State& state) {
  static ModelFixture f;
  auto grad = ModelParams<float>::zeros(f.params.shape);
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_loss_and_grad<float>(
        f.params, f.bags, Aggregation::kAttn, grad, static_cast<int>(state.range(0))));
  }
}

}  // namespace

BENCHMARK(BM_FindMentionsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FindMentionsParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FilterSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FilterParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LinkSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LinkParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
