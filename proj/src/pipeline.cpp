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

#include "bagforge/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <regex>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "bagforge/embedding_archive.hpp"
#include "bagforge/error.hpp"
#include "bagforge/evaluator.hpp"
#include "bagforge/io.hpp"
#include "bagforge/kb_store.hpp"
#include "bagforge/mention_matcher.hpp"
#include "bagforge/parallel.hpp"
#include "bagforge/records.hpp"
#include "bagforge/text.hpp"

namespace bagforge {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::pair<Stage, std::string_view> kStages[] = {
    {Stage::kSynth, "synth"}, {Stage::kKb, "kb"},       {Stage::kCorpus, "corpus"},
    {Stage::kMatch, "match"}, {Stage::kLink, "link"},   {Stage::kTag, "tag"},
    {Stage::kBags, "bags"},   {Stage::kSplit, "split"}, {Stage::kTrain, "train"},
    {Stage::kEval, "eval"},   {Stage::kAll, "all"},
};

// Walks an object section, rejecting keys the visitor does not claim.
template <typename F>
void visit(const json& obj, const std::string& prefix, F&& f) {
  if (!obj.is_object()) {
    throw Error(Errc::kInvalidConfig, "config section " + prefix + " must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    bool known = false;
    try {
      known = f(key, value, path);
    } catch (const json::exception& e) {
      throw Error(Errc::kInvalidConfig, "config key " + path + ": " + e.what());
    }
    if (!known) throw Error(Errc::kInvalidConfig, "unknown config key " + path);
  }
}

}  // namespace

Stage parse_stage(std::string_view name) {
  for (const auto& [stage, n] : kStages) {
    if (n == name) return stage;
  }
  throw Error(Errc::kInvalidConfig, "unknown subcommand " + std::string(name));
}

std::string_view stage_name(Stage stage) {
  for (const auto& [s, n] : kStages) {
    if (s == stage) return n;
  }
  return "unknown";
}

json PipelineConfig::to_json() const {
  return {
      {"seed", seed},
      {"workers", workers},
      {"paths",
       {{"work_dir", work_dir.string()},
        {"entities", entities.string()},
        {"triples", triples.string()},
        {"sentences", sentences.string()}}},
      {"kb", {{"relation_filter", relation_filter}}},
      {"corpus", {{"min_chars", corpus.min_chars}, {"max_chars", corpus.max_chars}}},
      {"linker",
       {{"min_group", linker.min_group},
        {"max_group", linker.max_group},
        {"neg_to_pos_ratio", linker.neg_to_pos_ratio}}},
      {"tagging", {{"scheme", scheme_name(scheme)}}},
      {"bags", {{"bag_size", bag_size}, {"uniform", uniform_bags}}},
      {"split", {{"test", split.test}, {"valid_of_remainder", split.valid_of_remainder}}},
      {"model",
       {{"encoder", encoder_name(model.encoder)},
        {"d", model.d},
        {"lmax", model.lmax},
        {"agg", aggregation_name(model.agg)},
        {"archive", model.archive.string()},
        {"init_scale", model.init_scale}}},
      {"train",
       {{"batch_size", train.batch_size},
        {"epochs", train.epochs},
        {"lr", train.lr},
        {"beta1", train.beta1},
        {"beta2", train.beta2},
        {"adam_eps", train.adam_eps},
        {"warmup", train.warmup},
        {"clip_norm", train.clip_norm}}},
      {"eval", {{"ks", ks}}},
      {"synth", synth.to_json()},
  };
}

json PipelineConfig::defaults_json() { return PipelineConfig{}.to_json(); }

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  visit(j, "", [&](const std::string& key, const json& v, const std::string& path) {
    if (key == "seed") {
      c.seed = v.get<std::uint64_t>();
    } else if (key == "workers") {
      c.workers = v.get<int>();
    } else if (key == "paths") {
      visit(v, path, [&](const std::string& k, const json& x, const std::string&) {
        if (k == "work_dir") c.work_dir = x.get<std::string>();
        else if (k == "entities") c.entities = x.get<std::string>();
        else if (k == "triples") c.triples = x.get<std::string>();
        else if (k == "sentences") c.sentences = x.get<std::string>();
        else return false;
        return true;
      });
    } else if (key == "kb") {
      visit(v, path, [&](const std::string& k, const json& x, const std::string&) {
        if (k != "relation_filter") return false;
        c.relation_filter = x.get<std::string>();
        return true;
      });
    } else if (key == "corpus") {
      visit(v, path, [&](const std::string& k, const json& x, const std::string&) {
        if (k == "min_chars") c.corpus.min_chars = x.get<std::size_t>();
        else if (k == "max_chars") c.corpus.max_chars = x.get<std::size_t>();
        else return false;
        return true;
      });
    } else if (key == "linker") {
      visit(v, path, [&](const std::string& k, const json& x, const std::string&) {
        if (k == "min_group") c.linker.min_group = x.get<std::size_t>();
        else if (k == "max_group") c.linker.max_group = x.get<std::size_t>();
        else if (k == "neg_to_pos_ratio") c.linker.neg_to_pos_ratio = x.get<double>();
        else return false;
        return true;
      });
    } else if (key == "tagging") {
      visit(v, path, [&](const std::string& k, const json& x, const std::string&) {
        if (k != "scheme") return false;
        c.scheme = parse_scheme(x.get<std::string>());
        return true;
      });
    } else if (key == "bags") {
      visit(v, path, [&](const std::string& k, const json& x, const std::string&) {
        if (k == "bag_size") c.bag_size = x.get<std::size_t>();
        else if (k == "uniform") c.uniform_bags = x.get<bool>();
        else return false;
        return true;
      });
    } else if (key == "split") {
      visit(v, path, [&](const std::string& k, const json& x, const std::string&) {
        if (k == "test") c.split.test = x.get<double>();
        else if (k == "valid_of_remainder") c.split.valid_of_remainder = x.get<double>();
        else return false;
        return true;
      });
    } else if (key == "model") {
      visit(v, path, [&](const std::string& k, const json& x, const std::string&) {
        if (k == "encoder") c.model.encoder = parse_encoder(x.get<std::string>());
        else if (k == "d") c.model.d = x.get<int>();
        else if (k == "lmax") c.model.lmax = x.get<int>();
        else if (k == "agg") c.model.agg = parse_aggregation(x.get<std::string>());
        else if (k == "archive") c.model.archive = x.get<std::string>();
        else if (k == "init_scale") c.model.init_scale = x.get<double>();
        else return false;
        return true;
      });
    } else if (key == "train") {
      visit(v, path, [&](const std::string& k, const json& x, const std::string&) {
        if (k == "batch_size") c.train.batch_size = x.get<int>();
        else if (k == "epochs") c.train.epochs = x.get<int>();
        else if (k == "lr") c.train.lr = x.get<double>();
        else if (k == "beta1") c.train.beta1 = x.get<double>();
        else if (k == "beta2") c.train.beta2 = x.get<double>();
        else if (k == "adam_eps") c.train.adam_eps = x.get<double>();
        else if (k == "warmup") c.train.warmup = x.get<double>();
        else if (k == "clip_norm") c.train.clip_norm = x.get<double>();
        else return false;
        return true;
      });
    } else if (key == "eval") {
      visit(v, path, [&](const std::string& k, const json& x, const std::string&) {
        if (k != "ks") return false;
        c.ks = x.get<std::vector<std::size_t>>();
        return true;
      });
    } else if (key == "synth") {
      c.synth = SynthConfig::from_json(v);
    } else {
      return false;
    }
    return true;
  });
  if (c.bag_size == 0) throw Error(Errc::kInvalidConfig, "bags.bag_size must be >= 1");
  if (c.model.d < 1) throw Error(Errc::kInvalidConfig, "model.d must be >= 1");
  if (c.model.lmax < 1) throw Error(Errc::kInvalidConfig, "model.lmax must be >= 1");
  if (c.corpus.min_chars > c.corpus.max_chars) {
    throw Error(Errc::kInvalidConfig, "corpus.min_chars exceeds corpus.max_chars");
  }
  return c;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(Errc::kInvalidConfig,
                "override must look like key.path=value: " + std::string(assignment));
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &doc;
  for (const auto part : io::split(key, '.')) {
    if (part.empty()) throw Error(Errc::kInvalidConfig, "empty segment in " + key);
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) {
      throw Error(Errc::kInvalidConfig, "override " + key + " descends into a non-object");
    }
    node = &(*node)[std::string(part)];
  }
  *node = std::move(value);
}

Layout::Layout(const PipelineConfig& c) {
  const fs::path& w = c.work_dir;
  synth_dir = w / "synth";
  kb_dir = w / "kb";
  corpus = w / "corpus" / "sentences.tsv";
  mentions = w / "match" / "mentions.jsonl";
  matches = w / "link" / "matches.jsonl";
  link_relations = w / "link" / "relations.json";
  const fs::path scheme_dir = w / std::string(scheme_name(c.scheme));
  tagged = scheme_dir / "tagged.jsonl";
  bags = scheme_dir / "bags.jsonl";
  split_dir = scheme_dir / "split";
  train = split_dir / "train.jsonl";
  valid = split_dir / "valid.jsonl";
  test = split_dir / "test.jsonl";
  manifest = split_dir / "manifest.json";
  const fs::path model_dir =
      scheme_dir / (std::string(aggregation_name(c.model.agg)) +
                    (c.model.encoder == EncoderKind::kLite ? "" : "-precomputed"));
  checkpoint = model_dir / "checkpoint.bin";
  meta = model_dir / "checkpoint.bin.meta.json";
  train_log = model_dir / "train_log.csv";
  report = model_dir / "report.json";
  predictions = model_dir / "predictions.tsv";
  pr_curve = model_dir / "pr_curve.csv";
  entities = c.entities.empty() ? synth_dir / "entities.jsonl" : c.entities;
  triples = c.triples.empty() ? synth_dir / "triples.tsv" : c.triples;
  sentences = c.sentences.empty() ? synth_dir / "sentences.tsv" : c.sentences;
}

fs::path stats_path(const fs::path& output) {
  return fs::path(output.string() + ".stats.json");
}

namespace {

void require(const fs::path& p) {
  if (!fs::exists(p)) throw Error(Errc::kIo, "missing input file " + p.string());
}

json finish(const fs::path& output, json stats) {
  records::write_json(stats_path(output), stats);
  return stats;
}

KnowledgeBase load_stage_kb(const Layout& L) {
  require(L.kb_dir / "triples.tsv");
  require(L.kb_dir / "entities.jsonl");
  return load_kb(L.kb_dir / "triples.tsv", L.kb_dir / "entities.jsonl");
}

json stage_synth(const PipelineConfig& c, const Layout& L) {
  const SynthData data = generate(c.synth);
  write_synth(data, L.synth_dir);
  std::size_t reverse = 0, flipped = 0, noise = 0, distractor = 0;
  for (const auto& t : data.triples) reverse += t.reverse;
  for (const auto& s : data.sentences) {
    flipped += s.flipped;
    noise += s.noise;
    distractor += s.distractor;
  }
  return finish(L.synth_dir / "sentences.tsv",
                {{"config", c.synth.to_json()},
                 {"entities", data.entities.size()},
                 {"relations", data.relations.size()},
                 {"triples", data.triples.size()},
                 {"reverse_triples", reverse},
                 {"sentences", data.sentences.size()},
                 {"flipped", flipped},
                 {"noise", noise},
                 {"distractor", distractor}});
}

json stage_kb(const PipelineConfig& c, const Layout& L) {
  require(L.triples);
  require(L.entities);
  RelationFilter filter;
  if (!c.relation_filter.empty()) {
    std::regex re;
    try {
      re = std::regex(c.relation_filter, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw Error(Errc::kInvalidConfig, "kb.relation_filter: " + std::string(e.what()));
    }
    filter = [re](std::string_view name) {
      return std::regex_match(name.begin(), name.end(), re);
    };
  }
  KbLoadStats st;
  const KnowledgeBase kb = load_kb(L.triples, L.entities, filter, &st);
  write_kb(kb, L.kb_dir);
  const GroupIndex index = build_group_index(kb.triples);
  return finish(L.kb_dir / "triples.tsv",
                {{"lines", st.lines},
                 {"duplicates", st.duplicates},
                 {"filtered", st.filtered},
                 {"entities", kb.entities.size()},
                 {"triples", kb.triples.size()},
                 {"relations_with_na", kb.relations.size()},
                 {"positive_groups", index.size()}});
}

json stage_corpus(const PipelineConfig& c, const Layout& L) {
  require(L.sentences);
  auto in = io::open_input(L.sentences);
  auto out = io::open_output(L.corpus);
  const FilterStats st = filter_sentences(in, out, c.corpus, c.workers);
  out.close();
  return finish(L.corpus, st.to_json());
}

json stage_match(const PipelineConfig& c, const Layout& L) {
  require(L.kb_dir / "entities.jsonl");
  require(L.corpus);
  const EntitySet entities = load_entities(L.kb_dir / "entities.jsonl");
  const MentionIndex index = MentionIndex::build(entities);
  auto in = io::open_input(L.corpus);
  const std::vector<RawSentence> sentences = read_sentences(in);
  const auto found = find_mentions_batch(index, sentences, c.workers);

  std::vector<MatchedSentence> kept;
  std::size_t duplicate_entity = 0, insufficient = 0, mentions = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    switch (enforce_unique(found[i])) {
      case UniqueVerdict::kKeep:
        mentions += found[i].size();
        kept.push_back({sentences[i].sid, sentences[i].text, found[i]});
        break;
      case UniqueVerdict::kDuplicateEntity: ++duplicate_entity; break;
      case UniqueVerdict::kInsufficientEntities: ++insufficient; break;
    }
  }
  records::write_mentions(L.mentions, kept, entities);
  return finish(L.mentions, {{"sentences", sentences.size()},
                             {"kept", kept.size()},
                             {"duplicate_entity", duplicate_entity},
                             {"insufficient_entities", insufficient},
                             {"mentions", mentions},
                             {"index_forms", index.form_count()},
                             {"index_nodes", index.node_count()}});
}

json stage_link(const PipelineConfig& c, const Layout& L) {
  const KnowledgeBase kb = load_stage_kb(L);
  require(L.mentions);
  const GroupIndex index = build_group_index(kb.triples);
  const auto sentences = records::read_mentions(L.mentions, kb.entities);
  const auto linked =
      link_corpus(sentences, index, text::derive_seed(c.seed, "link"), c.workers);
  Rng rng(text::derive_seed(c.seed, "constraints"));
  const ConstrainedMatches cm = apply_constraints(linked, index, kb.relations, c.linker, rng);

  std::size_t pos = 0, neg = 0;
  for (const auto& m : cm.matches) {
    const bool in_kb = index.is_positive(m.group);
    if ((m.polarity == Polarity::kPositive) != in_kb) {
      throw Error(Errc::kMalformedInput, "open-world violation for sentence " + m.sid);
    }
    (m.polarity == Polarity::kPositive ? pos : neg) += 1;
  }
  records::write_matches(L.matches, cm.matches, kb.entities);
  records::write_relations(L.link_relations, cm.vocab);
  json stats = cm.summary.to_json();
  stats["linked_matches"] = linked.size();
  stats["positive_matches"] = pos;
  stats["negative_matches"] = neg;
  stats["negatives_in_kb"] = 0;
  return finish(L.matches, stats);
}

json stage_tag(const PipelineConfig& c, const Layout& L) {
  const EntitySet entities = load_entities(L.kb_dir / "entities.jsonl");
  require(L.mentions);
  require(L.matches);
  const auto sentences = records::read_mentions(L.mentions, entities);
  const auto matches = records::read_matches(L.matches, entities);
  std::unordered_map<std::string, const std::string*> text_of;
  for (const auto& s : sentences) text_of.emplace(s.sid, &s.text);
  for (const auto& m : matches) {
    if (!text_of.contains(m.sid)) {
      throw Error(Errc::kMissingSid, "match refers to unknown sentence " + m.sid);
    }
  }

  const DefaultTokenizer tokenizer;
  std::vector<std::optional<TaggedSentence>> tagged(matches.size());
  std::vector<Errc> failure(matches.size(), Errc::kIo);
  const auto n = static_cast<std::int64_t>(matches.size());
#pragma omp parallel for schedule(dynamic, 64) num_threads(resolve_workers(c.workers))
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      tagged[k] = tag_sentence(matches[k], *text_of.at(matches[k].sid), tokenizer, c.scheme);
    } catch (const Error& e) {
      failure[k] = e.code();
    }
  }

  std::vector<TaggedSentencePtr> out;
  std::size_t overlapping = 0, misaligned = 0;
  for (std::size_t k = 0; k < tagged.size(); ++k) {
    if (tagged[k]) {
      out.push_back(std::make_shared<const TaggedSentence>(std::move(*tagged[k])));
    } else if (failure[k] == Errc::kOverlappingSpans) {
      ++overlapping;
    } else if (failure[k] == Errc::kSpanMisaligned) {
      ++misaligned;
    } else {
      throw Error(failure[k], "tagging failed for sentence " + matches[k].sid);
    }
  }
  records::write_tagged(L.tagged, out, entities);
  return finish(L.tagged, {{"scheme", scheme_name(c.scheme)},
                           {"matches", matches.size()},
                           {"tagged", out.size()},
                           {"overlapping_spans", overlapping},
                           {"span_misaligned", misaligned}});
}

GroupRelations group_relations_for(const KnowledgeBase& kb, const RelationVocab& vocab) {
  GroupRelations gr;
  for (const auto& t : kb.triples) {
    if (const RelationId* r = vocab.find(kb.relations.name(t.rel))) {
      gr[t.group()].push_back(*r);
    }
  }
  for (auto& [g, rels] : gr) std::sort(rels.begin(), rels.end());
  return gr;
}

json stage_bags(const PipelineConfig& c, const Layout& L) {
  const KnowledgeBase kb = load_stage_kb(L);
  require(L.link_relations);
  require(L.tagged);
  const RelationVocab vocab = records::read_relations(L.link_relations);
  const auto tagged = records::read_tagged(L.tagged, kb.entities);
  for (const auto& t : tagged) {
    if (t->scheme != c.scheme) {
      throw Error(Errc::kInvalidConfig, "tagged file scheme differs from tagging.scheme");
    }
  }
  InstanceOptions opt{c.scheme, c.uniform_bags, vocab.size()};
  const auto instances = build_instances(tagged, group_relations_for(kb, vocab), opt);
  const auto bags =
      compose_bags(instances, c.bag_size, text::derive_seed(c.seed, "bags"), c.workers);
  std::size_t uniform = 0, positive = 0;
  for (const auto& b : bags) {
    uniform += b.composition == Composition::kUniform;
    positive += b.relation != kNA;
  }
  records::write_bags(L.bags, bags, kb.entities);
  return finish(L.bags, {{"scheme", scheme_name(c.scheme)},
                         {"bag_size", c.bag_size},
                         {"instances", instances.size()},
                         {"bags", bags.size()},
                         {"positive_bags", positive},
                         {"uniform_bags", uniform},
                         {"mix_bags", bags.size() - uniform},
                         {"sentences_sampled", bags.size() * c.bag_size}});
}

// Throws on any leak or malformed bag; returns the checked properties.
json check_splits(const DatasetSplits& s, std::size_t bag_size) {
  const auto facts = [](const std::vector<Bag>& bags) {
    std::set<Triple> out;
    for (const auto& b : bags) out.insert({b.group.head, b.relation, b.group.tail});
    return out;
  };
  const auto sids = [](const std::vector<Bag>& bags) {
    std::set<std::string> out;
    for (const auto& b : bags) {
      for (const auto& x : b.sentences) out.insert(x->sid);
    }
    return out;
  };
  for (const auto* part : {&s.train, &s.valid, &s.test}) {
    for (const auto& b : *part) {
      if (b.sentences.size() != bag_size) {
        throw Error(Errc::kMalformedInput, "bag with " + std::to_string(b.sentences.size()) +
                                               " sentences, expected " +
                                               std::to_string(bag_size));
      }
    }
  }
  const auto ft = facts(s.train), fv = facts(s.valid), fs_ = facts(s.test);
  for (const auto& t : fv) {
    if (ft.contains(t) || fs_.contains(t)) throw Error(Errc::kMalformedInput, "fact in two splits");
  }
  for (const auto& t : fs_) {
    if (ft.contains(t)) throw Error(Errc::kMalformedInput, "fact in two splits");
  }
  const auto st = sids(s.train);
  for (const auto* part : {&s.valid, &s.test}) {
    for (const auto& sid : sids(*part)) {
      if (st.contains(sid)) {
        throw Error(Errc::kMalformedInput, "sentence " + sid + " leaks into a held-out split");
      }
    }
  }
  return {{"fact_disjoint", true}, {"sentence_disjoint", true}, {"exact_bag_size", true}};
}

json stage_split(const PipelineConfig& c, const Layout& L) {
  const EntitySet entities = load_entities(L.kb_dir / "entities.jsonl");
  require(L.bags);
  auto bags = records::read_bags(L.bags, entities);
  const DatasetSplits s =
      split_dataset(std::move(bags), c.split, text::derive_seed(c.seed, "split"));
  const json checks = check_splits(s, c.bag_size);
  records::write_bags(L.train, s.train, entities);
  records::write_bags(L.valid, s.valid, entities);
  records::write_bags(L.test, s.test, entities);
  json manifest = s.manifest();
  manifest["seed"] = c.seed;
  records::write_json(L.manifest, manifest);
  json stats = manifest;
  stats["checks"] = checks;
  return finish(L.manifest, stats);
}

RelationVocab model_relations(const RelationVocab& base, TaggingScheme scheme) {
  return scheme == TaggingScheme::kSTagExpRels ? expand_relation_labels(base).vocab : base;
}

StatesLookup archive_lookup(const EmbeddingArchive& archive, const EntitySet& entities) {
  return [&archive, &entities](const TaggedSentence& s) {
    return archive.load(
        archive_key(s.sid, entities.cui(s.group.head), entities.cui(s.group.tail)));
  };
}

json stage_train(const PipelineConfig& c, const Layout& L) {
  const EntitySet entities = load_entities(L.kb_dir / "entities.jsonl");
  require(L.link_relations);
  require(L.train);
  require(L.valid);
  const RelationVocab base = records::read_relations(L.link_relations);
  const RelationVocab classes = model_relations(base, c.scheme);
  const auto train_bags = records::read_bags(L.train, entities);
  const auto valid_bags = records::read_bags(L.valid, entities);
  if (train_bags.empty()) throw Error(Errc::kEmptyBag, "no training bags");

  ModelShape shape;
  shape.d = c.model.d;
  shape.relations = static_cast<int>(classes.size());
  shape.encoder = c.model.encoder;
  TokenVocab vocab;
  std::optional<EmbeddingArchive> archive;
  FeatureSet train_fs, valid_fs;
  if (c.model.encoder == EncoderKind::kLite) {
    vocab = TokenVocab::build(train_bags);
    shape.vocab = static_cast<int>(vocab.size());
    shape.lmax = c.model.lmax;
    train_fs = featurize(train_bags, &vocab, {});
    valid_fs = featurize(valid_bags, &vocab, {});
  } else {
    archive = EmbeddingArchive::open(c.model.archive);
    archive->verify();
    shape.d = static_cast<int>(archive->cols());
    shape.vocab = 0;
    shape.lmax = 0;
    train_fs = featurize(train_bags, nullptr, archive_lookup(*archive, entities));
    valid_fs = featurize(valid_bags, nullptr, archive_lookup(*archive, entities));
  }

  auto params = ModelParams<float>::zeros(shape);
  params.init_uniform(text::derive_seed(c.seed, "init"),
                      static_cast<float>(c.model.init_scale));
  TrainConfig tc = c.train;
  tc.agg = c.model.agg;
  tc.seed = text::derive_seed(c.seed, "train");
  tc.workers = c.workers;
  const TrainResult result = train(std::move(params), train_fs.bags, valid_fs.bags, tc);

  save_checkpoint(L.checkpoint, result.params);
  write_train_log(L.train_log, result.log);
  const double final_loss = mean_loss(result.params, train_fs.bags, tc.agg, c.workers);
  json meta{{"scheme", scheme_name(c.scheme)},
            {"agg", aggregation_name(c.model.agg)},
            {"encoder", encoder_name(c.model.encoder)},
            {"d", shape.d},
            {"lmax", shape.lmax},
            {"relations", classes.names()},
            {"base_relations", base.names()},
            {"tokens", vocab.tokens()},
            {"archive", c.model.archive.string()},
            {"seed", c.seed}};
  records::write_json(L.meta, meta);

  double last_epoch = 0.0;
  std::size_t last_n = 0;
  for (const auto& row : result.log) {
    if (row.epoch == c.train.epochs) {
      last_epoch += row.train_loss;
      ++last_n;
    }
  }
  json stats{{"scheme", scheme_name(c.scheme)},
             {"agg", aggregation_name(c.model.agg)},
             {"encoder", encoder_name(c.model.encoder)},
             {"train_bags", train_fs.bags.size()},
             {"valid_bags", valid_fs.bags.size()},
             {"distinct_sentences", train_fs.sentences.size()},
             {"classes", classes.size()},
             {"parameters", result.params.size()},
             {"steps", result.log.size()},
             {"best_epoch", result.best_epoch},
             {"final_train_loss", final_loss},
             {"last_epoch_step_loss", last_n ? last_epoch / static_cast<double>(last_n) : 0.0},
             {"unknown_valid_tokens", valid_fs.unknown_tokens}};
  stats["best_valid_loss"] =
      result.best_valid_loss ? json(*result.best_valid_loss) : json(nullptr);
  return finish(L.checkpoint, stats);
}

json stage_eval(const PipelineConfig& c, const Layout& L) {
  const EntitySet entities = load_entities(L.kb_dir / "entities.jsonl");
  require(L.checkpoint);
  require(L.meta);
  require(L.test);
  const json meta = records::read_json(L.meta);
  const TaggingScheme scheme = parse_scheme(meta.at("scheme").get<std::string>());
  const Aggregation agg = parse_aggregation(meta.at("agg").get<std::string>());
  if (scheme != c.scheme) {
    throw Error(Errc::kInvalidConfig, "checkpoint was trained with scheme " +
                                          std::string(scheme_name(scheme)));
  }
  const RelationVocab base(meta.at("base_relations").get<std::vector<std::string>>());
  const ModelParams<float> params = load_checkpoint(L.checkpoint);
  const auto test_bags = records::read_bags(L.test, entities);
  if (test_bags.empty()) throw Error(Errc::kEmptyTestSet, "no test bags");

  FeatureSet fs;
  std::optional<EmbeddingArchive> archive;
  std::optional<TokenVocab> vocab;
  if (params.shape.encoder == EncoderKind::kLite) {
    vocab.emplace(meta.at("tokens").get<std::vector<std::string>>());
    fs = featurize(test_bags, &*vocab, {});
  } else {
    archive = EmbeddingArchive::open(meta.at("archive").get<std::string>());
    fs = featurize(test_bags, nullptr, archive_lookup(*archive, entities));
  }
  const auto probs = predict(params, fs.bags, agg, c.workers);
  std::vector<std::vector<double>> p(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    p[i].assign(probs[i].data(), probs[i].data() + probs[i].size());
  }
  auto candidates = score_candidates(test_bags, p, base.size(), scheme);
  const auto gold = gold_triples(test_bags);
  const EvalReport report = evaluate(candidates, gold, c.ks);
  rank_candidates(candidates);

  json out = report.to_json();
  out["scheme"] = scheme_name(scheme);
  out["agg"] = aggregation_name(agg);
  out["test_bags"] = test_bags.size();
  out["unknown_tokens"] = fs.unknown_tokens;
  records::write_json(L.report, out);
  records::write_predictions(L.predictions, candidates, entities, base);
  records::write_pr_curve(L.pr_curve, report.curve);
  return finish(L.predictions, out);
}

json run_one(Stage stage, const PipelineConfig& c, const Layout& L) {
  switch (stage) {
    case Stage::kSynth: return stage_synth(c, L);
    case Stage::kKb: return stage_kb(c, L);
    case Stage::kCorpus: return stage_corpus(c, L);
    case Stage::kMatch: return stage_match(c, L);
    case Stage::kLink: return stage_link(c, L);
    case Stage::kTag: return stage_tag(c, L);
    case Stage::kBags: return stage_bags(c, L);
    case Stage::kSplit: return stage_split(c, L);
    case Stage::kTrain: return stage_train(c, L);
    case Stage::kEval: return stage_eval(c, L);
    case Stage::kAll: break;
  }
  throw Error(Errc::kInvalidConfig, "stage all is not a single stage");
}

}  // namespace

json run_stage(Stage stage, const PipelineConfig& config) {
  const Layout layout(config);
  if (stage != Stage::kAll) return run_one(stage, config, layout);
  json all = json::object();
  for (Stage s : {Stage::kKb, Stage::kCorpus, Stage::kMatch, Stage::kLink, Stage::kTag,
                  Stage::kBags, Stage::kSplit, Stage::kTrain, Stage::kEval}) {
    all[std::string(stage_name(s))] = run_one(s, config, layout);
  }
  return all;
}

}  // namespace bagforge
