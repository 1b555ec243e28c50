#pragma once

#include <stdexcept>
#include <string>

namespace calibench {

enum class ErrorKind {
  MalformedRow,
  DuplicateKey,
  UnregisteredDataset,
  EmptyCorpus,
  InconsistentItems,
  UnknownModel,
  UnknownDataset,
  LengthMismatch,
  EmptyInput,
  SingleClass,
  EmptyTrainingSet,
  InvalidSpec,
  Io,
  AssertionFailed,
};

const char* to_string(ErrorKind kind);

// Every failure surfaced by the library. The message always names the
// offending row, key, model or dataset.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace calibench
