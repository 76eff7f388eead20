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

#ifndef OOSD_ERROR_HPP_
#define OOSD_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace oosd {

enum class ErrorCode {
  EmptyUtterance,
  EmptyLexicon,
  InvalidLexicon,
  EmptyCorpus,
  ConfigError,
  MissingEmbedding,
  MalformedFile,
  MissingClassExamples,
  DimMismatch,
  SingleClassBinary,
  EmptyIndex,
  RankDeficient,
  EmptyConf,
  CountMismatch,
  ParseError,
  UnknownIntentInManifest,
  EmptyRecords,
  OneClassOnly,
  LimitExceeded,
  VersionMismatch,
  EmptyTraffic,
  IoError,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported with this exception; `code()` is stable
// and is what the CLI prints in machine-readable error records.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyUtterance: return "EmptyUtterance";
    case ErrorCode::EmptyLexicon: return "EmptyLexicon";
    case ErrorCode::InvalidLexicon: return "InvalidLexicon";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::MissingClassExamples: return "MissingClassExamples";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::SingleClassBinary: return "SingleClassBinary";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::EmptyConf: return "EmptyConf";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownIntentInManifest: return "UnknownIntentInManifest";
    case ErrorCode::EmptyRecords: return "EmptyRecords";
    case ErrorCode::OneClassOnly: return "OneClassOnly";
    case ErrorCode::LimitExceeded: return "LimitExceeded";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::EmptyTraffic: return "EmptyTraffic";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace oosd

#endif  // OOSD_ERROR_HPP_
