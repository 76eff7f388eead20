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

#include "oosd/textnorm.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>
#include <unordered_set>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "json.hpp"
#include "oosd/error.hpp"

namespace oosd {
namespace {

bool is_emoji_start(UChar32 c) {
  return u_hasBinaryProperty(c, UCHAR_EXTENDED_PICTOGRAPHIC) ||
         u_hasBinaryProperty(c, UCHAR_REGIONAL_INDICATOR);
}

// Code points that continue an emoji sequence once one has started.
bool is_emoji_continuation(UChar32 c) {
  return is_emoji_start(c) || c == 0x200D || c == 0xFE0E || c == 0xFE0F ||
         c == 0x20E3 || u_hasBinaryProperty(c, UCHAR_EMOJI_MODIFIER) ||
         (c >= 0xE0020 && c <= 0xE007F);
}

bool is_word_char(UChar32 c) { return c == '_' || u_isalnum(c); }

class Collapser {
 public:
  void push(UChar32 c) {
    if (c == ' ') {
      if (out_.empty() || out_.back() == ' ') return;
    } else {
      const std::size_t n = out_.size();
      if (n >= 2 && out_[n - 1] == c && out_[n - 2] == c) return;
    }
    out_.push_back(c);
  }

  void push_token(std::string_view ascii) {
    push(' ');
    for (char ch : ascii) push(static_cast<unsigned char>(ch));
    push(' ');
  }

  std::string finish() {
    while (!out_.empty() && out_.back() == ' ') out_.pop_back();
    std::string result;
    result.reserve(out_.size());
    for (UChar32 c : out_) {
      char buf[U8_MAX_LENGTH];
      int32_t len = 0;
      UBool error = false;
      U8_APPEND(buf, len, U8_MAX_LENGTH, c, error);
      if (error) continue;
      result.append(buf, static_cast<std::size_t>(len));
    }
    return result;
  }

 private:
  std::vector<UChar32> out_;
};

const icu::Normalizer2& nfkc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* instance = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status) || instance == nullptr) {
    throw Error(ErrorCode::ConfigError, "ICU NFKC normalizer unavailable");
  }
  return *instance;
}

UChar32 decode_at(std::string_view text, std::size_t pos) {
  int32_t i = static_cast<int32_t>(pos);
  UChar32 c = 0;
  U8_NEXT(text.data(), i, static_cast<int32_t>(text.size()), c);
  return c;
}

UChar32 decode_before(std::string_view text, std::size_t pos) {
  int32_t i = static_cast<int32_t>(pos);
  UChar32 c = 0;
  U8_PREV(text.data(), 0, i, c);
  return c;
}

std::size_t next_code_point(std::string_view text, std::size_t pos) {
  int32_t i = static_cast<int32_t>(pos);
  U8_FWD_1(text.data(), i, static_cast<int32_t>(text.size()));
  return static_cast<std::size_t>(i);
}

}  // namespace

NormalizedUtterance normalize(std::string_view raw) {
  const icu::Normalizer2& norm = nfkc();
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  s = norm.normalize(s, status);
  s.toLower(icu::Locale::getRoot());
  s = norm.normalize(s, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::ConfigError, u_errorName(status));
  }

  Collapser out;
  const int32_t len = s.length();
  int32_t i = 0;
  while (i < len) {
    UChar32 c = s.char32At(i);
    i = s.moveIndex32(i, 1);
    if (is_emoji_start(c)) {
      while (i < len && is_emoji_continuation(s.char32At(i))) {
        i = s.moveIndex32(i, 1);
      }
      out.push_token(kEmojiToken);
      continue;
    }
    if (u_isUWhiteSpace(c)) {
      out.push(' ');
      continue;
    }
    const int8_t type = u_charType(c);
    if (type == U_CONTROL_CHAR || type == U_FORMAT_CHAR) continue;
    out.push(c);
  }

  NormalizedUtterance result{out.finish(), {}};
  if (result.text.empty()) {
    throw Error(ErrorCode::EmptyUtterance, "utterance is empty after normalization");
  }
  return result;
}

EntityLexicon::EntityLexicon(std::vector<EntityDefinition> entities) {
  std::unordered_set<std::string> proxies;
  for (auto& entity : entities) {
    if (entity.name.empty()) {
      throw Error(ErrorCode::InvalidLexicon, "entity with empty name");
    }
    if (entity.proxy_token.empty() ||
        std::any_of(entity.proxy_token.begin(), entity.proxy_token.end(),
                    [](unsigned char ch) { return std::isspace(ch) != 0; })) {
      throw Error(ErrorCode::InvalidLexicon,
                  "proxy token of '" + entity.name + "' must be one non-empty token");
    }
    if (normalize(entity.proxy_token).text != entity.proxy_token) {
      throw Error(ErrorCode::InvalidLexicon,
                  "proxy token '" + entity.proxy_token + "' is not normalized");
    }
    if (!proxies.insert(entity.proxy_token).second) {
      throw Error(ErrorCode::InvalidLexicon,
                  "duplicate proxy token '" + entity.proxy_token + "'");
    }
    if (entity.synonyms.empty()) {
      throw Error(ErrorCode::InvalidLexicon, "entity '" + entity.name + "' has no synonyms");
    }
    const int owner = static_cast<int>(entities_.size());
    for (auto& synonym : entity.synonyms) {
      try {
        synonym = normalize(synonym).text;
      } catch (const Error&) {
        throw Error(ErrorCode::InvalidLexicon,
                    "entity '" + entity.name + "' has an empty synonym");
      }
      auto [it, inserted] = synonym_owner_.emplace(synonym, owner);
      if (!inserted) {
        throw Error(ErrorCode::InvalidLexicon,
                    "synonym '" + synonym + "' defined twice (entities '" +
                        (it->second == owner ? entity.name : entities_[it->second].name) +
                        "' and '" + entity.name + "')");
      }
      synonym_lengths_.push_back(synonym.size());
    }
    entities_.push_back(std::move(entity));
  }
  std::sort(synonym_lengths_.begin(), synonym_lengths_.end(), std::greater<>());
  synonym_lengths_.erase(std::unique(synonym_lengths_.begin(), synonym_lengths_.end()),
                         synonym_lengths_.end());

  // A proxy token that itself contains a synonym would break idempotence.
  for (const auto& entity : entities_) {
    const std::string_view proxy = entity.proxy_token;
    for (std::size_t pos = 0; pos < proxy.size(); pos = next_code_point(proxy, pos)) {
      std::size_t end = 0;
      if (longest_match(proxy, pos, &end) >= 0) {
        throw Error(ErrorCode::InvalidLexicon,
                    "proxy token '" + entity.proxy_token + "' contains a synonym");
      }
    }
  }
}

int EntityLexicon::longest_match(std::string_view text, std::size_t pos,
                                 std::size_t* match_end) const {
  const bool after_word = pos > 0 && is_word_char(decode_before(text, pos));
  for (std::size_t len : synonym_lengths_) {
    if (pos + len > text.size()) continue;
    auto it = synonym_owner_.find(std::string(text.substr(pos, len)));
    if (it == synonym_owner_.end()) continue;
    const std::string_view match = text.substr(pos, len);
    if (after_word && is_word_char(decode_at(match, 0))) continue;
    const std::size_t end = pos + len;
    if (end < text.size() && is_word_char(decode_at(text, end)) &&
        is_word_char(decode_before(match, match.size()))) {
      continue;
    }
    *match_end = end;
    return it->second;
  }
  return -1;
}

NormalizedUtterance apply_entity_proxies(const NormalizedUtterance& utt,
                                         const EntityLexicon& lexicon) {
  if (lexicon.empty()) return utt;
  NormalizedUtterance out;
  out.substitutions = utt.substitutions;
  out.text.reserve(utt.text.size());
  const std::string_view text = utt.text;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = 0;
    const int entity = lexicon.longest_match(text, pos, &end);
    if (entity >= 0) {
      const auto& def = lexicon.entities()[entity];
      out.text += def.proxy_token;
      out.substitutions.push_back({pos, end, def.name});
      pos = end;
    } else {
      const std::size_t next = next_code_point(text, pos);
      out.text.append(text.substr(pos, next - pos));
      pos = next;
    }
  }
  return out;
}

NormalizedUtterance synthesize_synonym_example(const EntityLexicon& lexicon) {
  if (lexicon.empty()) {
    throw Error(ErrorCode::EmptyLexicon, "cannot synthesize from an empty lexicon");
  }
  NormalizedUtterance out;
  for (const auto& entity : lexicon.entities()) {
    for (const auto& synonym : entity.synonyms) {
      if (!out.text.empty()) out.text += ' ';
      out.text += synonym;
    }
  }
  return out;
}

EntityLexicon parse_lexicon(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("lexicon: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entities") || !doc["entities"].is_array()) {
    throw Error(ErrorCode::ParseError, "lexicon must be an object with an 'entities' array");
  }
  std::vector<EntityDefinition> entities;
  try {
    for (const auto& e : doc["entities"]) {
      entities.push_back({e.at("name").get<std::string>(),
                          e.at("proxy_token").get<std::string>(),
                          e.at("synonyms").get<std::vector<std::string>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("lexicon entry: ") + e.what());
  }
  return EntityLexicon(std::move(entities));
}

EntityLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open lexicon " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_lexicon(buffer.str());
}

std::string lexicon_to_json(const EntityLexicon& lexicon) {
  nlohmann::json doc;
  doc["entities"] = nlohmann::json::array();
  for (const auto& e : lexicon.entities()) {
    doc["entities"].push_back(
        {{"name", e.name}, {"proxy_token", e.proxy_token}, {"synonyms", e.synonyms}});
  }
  return doc.dump(2);
}

}  // namespace oosd
