#pragma once

#include <stdexcept>
#include <string>
#include <variant>

namespace eventcast {

enum class ErrorCode {
  // core model
  HistoryNotPrior,
  EmptyAfterNormalization,
  InvalidArgument,
  // dataset pipeline
  SourceUnreadable,
  UnknownFormat,
  DataInvalid,
  InvalidSpec,
  // experts
  EmptyLogprobs,
  PositiveLogprob,
  CandidatePoolTooSmall,
  Timeout,
  ProtocolError,
  PanelFailed,
  // router
  EmptySupervision,
  BadK,
  ModelPanelMismatch,
  // aggregation
  EmptyPredictions,
  RoutedExpertFailed,
  AllEliteExpertsFailed,
  // evaluation
  EmptyOutcomes,
  MissingRouter,
  // cli
  UnknownCommand,
  ConfigInvalid,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a stable error code alongside a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Value-or-error carrier for calls that must not throw across a panel
/// fan-out: one expert failing is recorded, not propagated.
template <typename T>
class Result {
 public:
  Result(T value) : data_(std::move(value)) {}
  Result(Error error) : data_(std::move(error)) {}

  bool ok() const noexcept { return std::holds_alternative<T>(data_); }
  const T& value() const { return std::get<T>(data_); }
  T& value() { return std::get<T>(data_); }
  const Error& error() const { return std::get<Error>(data_); }

 private:
  std::variant<T, Error> data_;
};

}  // namespace eventcast
