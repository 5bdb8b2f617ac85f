#include "eventcast/error.hpp"

namespace eventcast {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::HistoryNotPrior: return "HistoryNotPrior";
    case ErrorCode::EmptyAfterNormalization: return "EmptyAfterNormalization";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SourceUnreadable: return "SourceUnreadable";
    case ErrorCode::UnknownFormat: return "UnknownFormat";
    case ErrorCode::DataInvalid: return "DataInvalid";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::EmptyLogprobs: return "EmptyLogprobs";
    case ErrorCode::PositiveLogprob: return "PositiveLogprob";
    case ErrorCode::CandidatePoolTooSmall: return "CandidatePoolTooSmall";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::PanelFailed: return "PanelFailed";
    case ErrorCode::EmptySupervision: return "EmptySupervision";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::ModelPanelMismatch: return "ModelPanelMismatch";
    case ErrorCode::EmptyPredictions: return "EmptyPredictions";
    case ErrorCode::RoutedExpertFailed: return "RoutedExpertFailed";
    case ErrorCode::AllEliteExpertsFailed: return "AllEliteExpertsFailed";
    case ErrorCode::EmptyOutcomes: return "EmptyOutcomes";
    case ErrorCode::MissingRouter: return "MissingRouter";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "UnknownError";
}

}  // namespace eventcast
