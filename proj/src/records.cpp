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

#include "bagforge/records.hpp"

#include <cstdio>
#include <unordered_map>

#include "bagforge/error.hpp"
#include "bagforge/io.hpp"

namespace bagforge::records {

using nlohmann::json;

namespace {

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  auto in = io::open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(Errc::kMalformedInput, io::location(path, line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), io::location(path, line_no) + ": " + e.detail());
    }
  }
}

json span_json(std::size_t a, std::size_t b) { return json::array({a, b}); }

CharSpan char_span(const json& j) {
  return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

TokenSpan token_span(const json& j) {
  return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

Polarity parse_polarity(const std::string& s) {
  if (s == "pos") return Polarity::kPositive;
  if (s == "neg") return Polarity::kNegative;
  throw Error(Errc::kMalformedInput, "polarity must be pos or neg, got " + s);
}

std::string_view polarity_name(Polarity p) {
  return p == Polarity::kPositive ? "pos" : "neg";
}

Group group_of(const json& j, const EntitySet& entities) {
  return {entities.id_of(j.at(0).get<std::string>()),
          entities.id_of(j.at(1).get<std::string>())};
}

}  // namespace

json mentions_to_json(const MatchedSentence& s, const EntitySet& entities) {
  json ms = json::array();
  for (const auto& m : s.mentions) {
    ms.push_back({{"cui", entities.cui(m.entity)},
                  {"start", m.start},
                  {"end", m.end},
                  {"form", m.form}});
  }
  return {{"sid", s.sid}, {"text", s.text}, {"mentions", ms}};
}

void write_mentions(const std::filesystem::path& path,
                    std::span<const MatchedSentence> sentences,
                    const EntitySet& entities) {
  auto out = io::open_output(path);
  for (const auto& s : sentences) out << mentions_to_json(s, entities).dump() << '\n';
}

std::vector<MatchedSentence> read_mentions(const std::filesystem::path& path,
                                           const EntitySet& entities) {
  std::vector<MatchedSentence> out;
  for_each_line(path, [&](const json& j) {
    MatchedSentence s;
    s.sid = j.at("sid").get<std::string>();
    s.text = j.at("text").get<std::string>();
    for (const auto& m : j.at("mentions")) {
      s.mentions.push_back({entities.id_of(m.at("cui").get<std::string>()),
                            m.at("start").get<std::size_t>(),
                            m.at("end").get<std::size_t>(),
                            m.at("form").get<std::string>()});
    }
    out.push_back(std::move(s));
  });
  return out;
}

json match_to_json(const SentenceGroupMatch& m, const EntitySet& entities) {
  return {{"sid", m.sid},
          {"head_cui", entities.cui(m.group.head)},
          {"tail_cui", entities.cui(m.group.tail)},
          {"polarity", polarity_name(m.polarity)},
          {"head_span", span_json(m.head_span.begin, m.head_span.end)},
          {"tail_span", span_json(m.tail_span.begin, m.tail_span.end)}};
}

void write_matches(const std::filesystem::path& path,
                   std::span<const SentenceGroupMatch> matches,
                   const EntitySet& entities) {
  auto out = io::open_output(path);
  for (const auto& m : matches) out << match_to_json(m, entities).dump() << '\n';
}

std::vector<SentenceGroupMatch> read_matches(const std::filesystem::path& path,
                                             const EntitySet& entities) {
  std::vector<SentenceGroupMatch> out;
  for_each_line(path, [&](const json& j) {
    SentenceGroupMatch m;
    m.sid = j.at("sid").get<std::string>();
    m.group = {entities.id_of(j.at("head_cui").get<std::string>()),
               entities.id_of(j.at("tail_cui").get<std::string>())};
    m.polarity = parse_polarity(j.at("polarity").get<std::string>());
    m.head_span = char_span(j.at("head_span"));
    m.tail_span = char_span(j.at("tail_span"));
    out.push_back(std::move(m));
  });
  return out;
}

json tagged_to_json(const TaggedSentence& t, const EntitySet& entities) {
  return {{"sid", t.sid},
          {"group", json::array({entities.cui(t.group.head), entities.cui(t.group.tail)})},
          {"polarity", polarity_name(t.polarity)},
          {"scheme", scheme_name(t.scheme)},
          {"tokens", t.tokens},
          {"head_span", span_json(t.head_span.first, t.head_span.last)},
          {"tail_span", span_json(t.tail_span.first, t.tail_span.last)},
          {"e1_is_head", t.e1_is_head},
          {"space_before", t.space_before}};
}

TaggedSentence tagged_from_json(const json& j, const EntitySet& entities) {
  TaggedSentence t;
  t.sid = j.at("sid").get<std::string>();
  t.group = group_of(j.at("group"), entities);
  t.polarity = parse_polarity(j.at("polarity").get<std::string>());
  t.scheme = parse_scheme(j.at("scheme").get<std::string>());
  t.tokens = j.at("tokens").get<std::vector<std::string>>();
  t.head_span = token_span(j.at("head_span"));
  t.tail_span = token_span(j.at("tail_span"));
  t.e1_is_head = j.at("e1_is_head").get<bool>();
  if (j.contains("space_before")) {
    t.space_before = j.at("space_before").get<std::vector<bool>>();
  } else {
    t.space_before.assign(t.tokens.size(), true);
    if (!t.space_before.empty()) t.space_before[0] = false;
  }
  if (t.space_before.size() != t.tokens.size()) {
    throw Error(Errc::kMalformedInput, "space_before length differs from tokens");
  }
  return t;
}

void write_tagged(const std::filesystem::path& path,
                  std::span<const TaggedSentencePtr> tagged,
                  const EntitySet& entities) {
  auto out = io::open_output(path);
  for (const auto& t : tagged) out << tagged_to_json(*t, entities).dump() << '\n';
}

std::vector<TaggedSentencePtr> read_tagged(const std::filesystem::path& path,
                                           const EntitySet& entities) {
  std::vector<TaggedSentencePtr> out;
  for_each_line(path, [&](const json& j) {
    out.push_back(std::make_shared<const TaggedSentence>(tagged_from_json(j, entities)));
  });
  return out;
}

void write_bags(const std::filesystem::path& path, std::span<const Bag> bags,
                const EntitySet& entities) {
  auto out = io::open_output(path);
  for (const auto& b : bags) {
    json sentences = json::array();
    for (const auto& s : b.sentences) sentences.push_back(tagged_to_json(*s, entities));
    out << json{{"group", json::array({entities.cui(b.group.head),
                                       entities.cui(b.group.tail)})},
                {"label", to_index(b.label)},
                {"relation", to_index(b.relation)},
                {"composition", composition_name(b.composition)},
                {"sentences", sentences}}
               .dump()
        << '\n';
  }
}

std::vector<Bag> read_bags(const std::filesystem::path& path,
                           const EntitySet& entities) {
  std::vector<Bag> out;
  std::unordered_map<std::string, TaggedSentencePtr> interned;
  for_each_line(path, [&](const json& j) {
    Bag b;
    b.group = group_of(j.at("group"), entities);
    b.label = RelationId{j.at("label").get<std::uint32_t>()};
    b.relation = RelationId{j.value("relation", j.at("label").get<std::uint32_t>())};
    const auto comp = j.at("composition").get<std::string>();
    if (comp != "uniform" && comp != "mix") {
      throw Error(Errc::kMalformedInput, "composition must be uniform or mix");
    }
    b.composition = comp == "uniform" ? Composition::kUniform : Composition::kMix;
    for (const auto& s : j.at("sentences")) {
      const std::string key = s.dump();
      auto it = interned.find(key);
      if (it == interned.end()) {
        it = interned
                 .emplace(key, std::make_shared<const TaggedSentence>(
                                   tagged_from_json(s, entities)))
                 .first;
      }
      b.sentences.push_back(it->second);
    }
    out.push_back(std::move(b));
  });
  return out;
}

void write_relations(const std::filesystem::path& path, const RelationVocab& vocab) {
  auto out = io::open_output(path);
  out << json(vocab.names()).dump(1) << '\n';
}

RelationVocab read_relations(const std::filesystem::path& path) {
  const json j = read_json(path);
  std::vector<std::string> names;
  try {
    names = j.get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(Errc::kMalformedInput, path.string() + ": " + e.what());
  }
  if (names.empty() || names[0] != kNAName) {
    throw Error(Errc::kMalformedInput, path.string() + ": NA must be the first relation");
  }
  return RelationVocab(names);
}

void write_predictions(const std::filesystem::path& path,
                       std::span<const Candidate> ranked, const EntitySet& entities,
                       const RelationVocab& vocab) {
  auto out = io::open_output(path);
  char buf[32];
  for (const auto& c : ranked) {
    std::snprintf(buf, sizeof buf, "%.9g", c.score);
    out << entities.cui(c.triple.head) << '\t' << vocab.name(c.triple.rel) << '\t'
        << entities.cui(c.triple.tail) << '\t' << buf << '\n';
  }
}

void write_pr_curve(const std::filesystem::path& path, std::span<const PrPoint> curve) {
  auto out = io::open_output(path);
  out << "rank,precision,recall\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g\n", p.rank, p.precision, p.recall);
    out << buf;
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = io::open_output(path);
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::kMalformedInput, path.string() + ": " + e.what());
  }
}

}  // namespace bagforge::records
