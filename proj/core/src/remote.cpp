#include "eventcast/remote.hpp"

#include <chrono>

#include <httplib.h>
#include <json.hpp>

namespace eventcast {
namespace {

using nlohmann::json;

struct Completion {
  std::string text;
  std::vector<double> token_logprobs;
};

json build_request(const RemoteEndpointConfig& config,
                   const std::string& prompt, const std::string& query_id) {
  if (config.profile == RemoteEndpointConfig::Profile::Native) {
    return json{{"query_id", query_id},
                {"prompt", prompt},
                {"max_tokens", config.max_tokens}};
  }
  json request{{"messages", json::array({json{{"role", "user"},
                                              {"content", prompt}}})},
               {"max_tokens", config.max_tokens},
               {"logprobs", true}};
  if (!config.model.empty()) request["model"] = config.model;
  return request;
}

std::vector<double> parse_logprob_array(const json& arr) {
  std::vector<double> logprobs;
  for (const json& v : arr) {
    if (!v.is_number())
      throw Error(ErrorCode::ProtocolError, "non-numeric token logprob");
    logprobs.push_back(v.get<double>());
  }
  return logprobs;
}

Completion parse_response(const RemoteEndpointConfig& config,
                          const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(ErrorCode::ProtocolError, "response body is not JSON");
  try {
    Completion completion;
    if (config.profile == RemoteEndpointConfig::Profile::Native) {
      completion.text = doc.at("text").get<std::string>();
      completion.token_logprobs = parse_logprob_array(doc.at("token_logprobs"));
    } else {
      const json& choice = doc.at("choices").at(0);
      completion.text = choice.at("message").at("content").get<std::string>();
      std::vector<double> logprobs;
      for (const json& token : choice.at("logprobs").at("content"))
        logprobs.push_back(token.at("logprob").get<double>());
      completion.token_logprobs = std::move(logprobs);
    }
    return completion;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProtocolError,
                std::string("response shape: ") + e.what());
  }
}

}  // namespace

ExpertPrediction remote_predict(const RemoteEndpointConfig& config,
                                const std::string& prompt,
                                const EntityRegistry& registry,
                                const std::string& expert_id,
                                const std::string& query_id) {
  const std::string path = config.profile == RemoteEndpointConfig::Profile::Native
                               ? "/v1/predict"
                               : "/v1/chat/completions";
  const std::string body = build_request(config, prompt, query_id).dump();

  httplib::Result res;
  std::string transport_detail;
  const int attempts = config.retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    httplib::Client client(config.endpoint);
    const auto timeout = std::chrono::milliseconds(config.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    res = client.Post(path, body, "application/json");
    if (res) break;
    transport_detail = httplib::to_string(res.error());
  }
  if (!res)
    throw Error(ErrorCode::Timeout, config.endpoint + path + " unreachable (" +
                                        transport_detail + ")");
  if (res->status != 200)
    throw Error(ErrorCode::ProtocolError,
                "HTTP " + std::to_string(res->status) + " from " +
                    config.endpoint + path);

  Completion completion = parse_response(config, res->body);
  for (double lp : completion.token_logprobs)
    if (!(lp <= 0.0))
      throw Error(ErrorCode::ProtocolError, "positive token logprob");

  std::string normalized;
  try {
    normalized = normalize_entity(completion.text);
  } catch (const Error&) {
    return {expert_id, std::string(kUnparseable), 0.0};
  }
  auto it = registry.find(normalized);
  if (it == registry.end())
    return {expert_id, std::string(kUnparseable), 0.0};
  if (completion.token_logprobs.empty())
    throw Error(ErrorCode::ProtocolError, "matched text without logprobs");
  return {expert_id, it->second, extract_confidence(completion.token_logprobs)};
}

Result<ExpertPrediction> RemoteExpertBackend::predict(const ForecastQuery& query,
                                                      std::uint64_t draw_key) {
  try {
    return remote_predict(config_, build_prompt(query, template_), *registry_,
                          expert_id_, "q" + std::to_string(draw_key));
  } catch (const Error& e) {
    return e;
  }
}

}  // namespace eventcast
