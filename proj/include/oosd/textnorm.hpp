/*
 * Copyright 2026 The oosd Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef OOSD_TEXTNORM_HPP_
#define OOSD_TEXTNORM_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace oosd {

// Byte range [begin, end) in the text a substitution was applied to.
struct Substitution {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string entity;

  bool operator==(const Substitution&) const = default;
};

struct NormalizedUtterance {
  std::string text;
  std::vector<Substitution> substitutions;

  bool operator==(const NormalizedUtterance&) const = default;
};

// Sentinel emitted in place of every emoji sequence.
inline constexpr std::string_view kEmojiToken = "<emoji>";

// Lowercases, applies NFKC, collapses runs of three or more identical code
// points to two, replaces emoji sequences by kEmojiToken and collapses
// whitespace. Throws Error(EmptyUtterance) when nothing is left.
NormalizedUtterance normalize(std::string_view raw);

struct EntityDefinition {
  std::string name;
  std::string proxy_token;
  std::vector<std::string> synonyms;

  bool operator==(const EntityDefinition&) const = default;
};

// Validated set of entities. Synonyms are stored normalized; lookups are
// token-boundary, leftmost-longest.
class EntityLexicon {
 public:
  EntityLexicon() = default;
  explicit EntityLexicon(std::vector<EntityDefinition> entities);

  const std::vector<EntityDefinition>& entities() const { return entities_; }
  bool empty() const { return entities_.empty(); }

  // Entity index of the longest synonym matching at byte `pos`, or -1.
  // `match_end` receives the end offset of the match.
  int longest_match(std::string_view text, std::size_t pos,
                    std::size_t* match_end) const;

 private:
  std::vector<EntityDefinition> entities_;
  std::unordered_map<std::string, int> synonym_owner_;
  std::vector<std::size_t> synonym_lengths_;  // descending, unique
};

NormalizedUtterance apply_entity_proxies(const NormalizedUtterance& utt,
                                         const EntityLexicon& lexicon);

// Space-joined concatenation of every synonym, lexicon order then synonym
// order. Throws Error(EmptyLexicon).
NormalizedUtterance synthesize_synonym_example(const EntityLexicon& lexicon);

// Lexicon file: JSON object {"entities": [{"name", "proxy_token",
// "synonyms": [...]}, ...]}.
EntityLexicon load_lexicon(const std::filesystem::path& path);
EntityLexicon parse_lexicon(std::string_view json_text);
std::string lexicon_to_json(const EntityLexicon& lexicon);

}  // namespace oosd

#endif  // OOSD_TEXTNORM_HPP_
