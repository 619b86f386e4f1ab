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

#include "emonet/error.hpp"

namespace emonet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::UnknownPartition: return "UnknownPartition";
    case ErrorKind::DuplicateSampleId: return "DuplicateSampleId";
    case ErrorKind::EmptyManifest: return "EmptyManifest";
    case ErrorKind::UnmappedLabel: return "UnmappedLabel";
    case ErrorKind::EmptyPartition: return "EmptyPartition";
    case ErrorKind::NotWav: return "NotWav";
    case ErrorKind::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorKind::EmptyAudio: return "EmptyAudio";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::AllMasked: return "AllMasked";
    case ErrorKind::DuplicateDomain: return "DuplicateDomain";
    case ErrorKind::UnknownDomain: return "UnknownDomain";
    case ErrorKind::UnknownRegime: return "UnknownRegime";
    case ErrorKind::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::DivergedLoss: return "DivergedLoss";
    case ErrorKind::SingleDomainCategorical: return "SingleDomainCategorical";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::MisalignedRuns: return "MisalignedRuns";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace emonet
