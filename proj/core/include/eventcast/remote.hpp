#pragma once

#include <memory>
#include <string>

#include "eventcast/dataset.hpp"
#include "eventcast/experts.hpp"

namespace eventcast {

/// Completion endpoint description. The native profile speaks
/// POST <endpoint>/v1/predict with {query_id, prompt, max_tokens} and
/// expects {text, token_logprobs}. The chat profile adapts a
/// chat-completions-style endpoint ({messages: [...]},
/// choices[0].message.content + logprobs) onto the same contract.
struct RemoteEndpointConfig {
  enum class Profile { Native, Chat };

  std::string endpoint;  // e.g. "http://127.0.0.1:8080"
  Profile profile = Profile::Native;
  int timeout_ms = 5000;
  int retries = 0;  // extra attempts after the first, transport errors only
  int max_tokens = 32;
  std::string model;  // chat profile pass-through
};

/// Sends the prompt, normalizes the completion text, and matches it against
/// the registry: a match yields that entity id with confidence
/// extract_confidence(token_logprobs); no match yields kUnparseable with
/// confidence 0. Throws Timeout (transport) or ProtocolError (malformed
/// response).
ExpertPrediction remote_predict(const RemoteEndpointConfig& config,
                                const std::string& prompt,
                                const EntityRegistry& registry,
                                const std::string& expert_id,
                                const std::string& query_id);

class RemoteExpertBackend final : public ExpertBackend {
 public:
  RemoteExpertBackend(std::string expert_id, RemoteEndpointConfig config,
                      PromptTemplate tmpl,
                      std::shared_ptr<const EntityRegistry> registry)
      : expert_id_(std::move(expert_id)),
        config_(std::move(config)),
        template_(std::move(tmpl)),
        registry_(std::move(registry)) {
    validate_template(template_);
  }

  Result<ExpertPrediction> predict(const ForecastQuery& query,
                                   std::uint64_t draw_key) override;

 private:
  std::string expert_id_;
  RemoteEndpointConfig config_;
  PromptTemplate template_;
  std::shared_ptr<const EntityRegistry> registry_;
};

}  // namespace eventcast
