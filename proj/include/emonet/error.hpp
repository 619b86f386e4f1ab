// Copyright 2026 The emonet-cpp Authors
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

#include <stdexcept>
#include <string>
#include <string_view>

namespace emonet {

enum class ErrorKind {
  // corpus
  MissingColumn,
  UnknownPartition,
  DuplicateSampleId,
  EmptyManifest,
  UnmappedLabel,
  EmptyPartition,
  // dsp
  NotWav,
  UnsupportedEncoding,
  EmptyAudio,
  EmptyBatch,
  // compute core / model
  ShapeMismatch,
  LabelOutOfRange,
  AllMasked,
  DuplicateDomain,
  UnknownDomain,
  UnknownRegime,
  CorruptCheckpoint,
  VersionMismatch,
  // trainer
  DivergedLoss,
  SingleDomainCategorical,
  // eval
  EmptyMatrix,
  LengthMismatch,
  MisalignedRuns,
  // plumbing
  IoError,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

/// Every failure in the library is reported as an Error carrying its kind;
/// the CLI maps kinds onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace emonet
