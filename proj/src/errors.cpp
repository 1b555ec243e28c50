#include "calibench/errors.hpp"

namespace calibench {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::DuplicateKey: return "DuplicateKey";
    case ErrorKind::UnregisteredDataset: return "UnregisteredDataset";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::InconsistentItems: return "InconsistentItems";
    case ErrorKind::UnknownModel: return "UnknownModel";
    case ErrorKind::UnknownDataset: return "UnknownDataset";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::Io: return "Io";
    case ErrorKind::AssertionFailed: return "AssertionFailed";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace calibench
