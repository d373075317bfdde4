// Copyright 2026 The coinbayes Authors
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

#include "coinbayes/provider.hpp"

#include <cmath>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "httplib.h"

#include "coinbayes/error.hpp"
#include "coinbayes/normalization.hpp"

namespace coinbayes {
namespace {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

nlohmann::json chat_to_json(const std::optional<ChatPrompt>& chat) {
  if (!chat) return nullptr;
  return {{"user", chat->user}, {"assistant_prefix", chat->assistant_prefix}};
}

}  // namespace

nlohmann::json to_json(const LogProbRequest& request) {
  return {{"id", request.id},
          {"prompt", request.prompt},
          {"continuations", request.continuations},
          {"chat", chat_to_json(request.chat)}};
}

nlohmann::json to_json(const LogProbResponse& response) {
  nlohmann::json continuations = nlohmann::json::array();
  for (const auto& c : response.continuations) {
    continuations.push_back(
        {{"text", c.text}, {"tokens", c.tokens}, {"token_logprobs", c.token_logprobs}});
  }
  return {{"id", response.id}, {"continuations", std::move(continuations)}};
}

LogProbRequest request_from_json(const nlohmann::json& j) {
  LogProbRequest request;
  request.id = j.at("id").get<std::string>();
  request.prompt = j.at("prompt").get<std::string>();
  request.continuations = j.at("continuations").get<std::vector<std::string>>();
  if (j.contains("chat") && !j.at("chat").is_null()) {
    const auto& chat = j.at("chat");
    request.chat = ChatPrompt{chat.at("user").get<std::string>(),
                              chat.at("assistant_prefix").get<std::string>()};
  }
  return request;
}

LogProbResponse response_from_json(const nlohmann::json& j) {
  try {
    LogProbResponse response;
    response.id = j.at("id").get<std::string>();
    for (const auto& c : j.at("continuations")) {
      ContinuationLogProbs entry;
      entry.text = c.at("text").get<std::string>();
      entry.tokens = c.at("tokens").get<std::vector<std::string>>();
      entry.token_logprobs = c.at("token_logprobs").get<std::vector<double>>();
      response.continuations.push_back(std::move(entry));
    }
    return response;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponseError(std::string("response does not match the wire schema: ") +
                                 e.what());
  }
}

std::string request_key(const LogProbRequest& request) {
  const nlohmann::json content{{"prompt", request.prompt},
                               {"continuations", request.continuations},
                               {"chat", chat_to_json(request.chat)}};
  return sha256_hex(content.dump());
}

void validate_response(const LogProbRequest& request, const LogProbResponse& response) {
  auto fail = [&](const std::string& what) {
    throw MalformedResponseError("request " + request.id + ": " + what);
  };
  if (response.id != request.id) fail("response id '" + response.id + "' does not match");
  if (response.continuations.size() != request.continuations.size()) {
    fail(fmt::format("asked for {} continuations, provider returned {}",
                     request.continuations.size(), response.continuations.size()));
  }
  for (std::size_t i = 0; i < request.continuations.size(); ++i) {
    const auto& c = response.continuations[i];
    if (c.text != request.continuations[i]) {
      fail(fmt::format("continuation {} is '{}', expected '{}'", i, c.text,
                       request.continuations[i]));
    }
    if (c.token_logprobs.empty()) fail(fmt::format("continuation {} has no tokens", i));
    if (c.tokens.size() != c.token_logprobs.size()) {
      fail(fmt::format("continuation {} has {} tokens but {} log-probabilities", i,
                       c.tokens.size(), c.token_logprobs.size()));
    }
    for (double lp : c.token_logprobs) {
      if (std::isnan(lp) || lp > 0.0) fail(fmt::format("continuation {} has log-probability {}", i, lp));
    }
  }
}

HttpTransport::HttpTransport(std::string endpoint, int timeout_seconds)
    : timeout_seconds_(timeout_seconds) {
  constexpr std::string_view scheme = "http://";
  if (endpoint.rfind(scheme, 0) != 0) {
    throw InvalidArgument("provider endpoint must start with http://, got '" + endpoint + "'");
  }
  const auto slash = endpoint.find('/', scheme.size());
  base_ = endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : endpoint.substr(slash);
}

LogProbResponse HttpTransport::send(const LogProbRequest& request) {
  httplib::Client client(base_);
  client.set_connection_timeout(timeout_seconds_);
  client.set_read_timeout(timeout_seconds_);
  auto result = client.Post(path_, to_json(request).dump(), "application/json");
  if (!result) {
    throw TransportError("request " + request.id + ": " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw TransportError(fmt::format("request {}: HTTP status {}", request.id, result->status));
  }
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponseError("request " + request.id + ": response is not JSON: " + e.what());
  }
  return response_from_json(body);
}

ReplayCache::ReplayCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      entries_.insert_or_assign(j.at("key").get<std::string>(), response_from_json(j.at("response")));
    } catch (const std::exception& e) {
      throw InvalidArgument(fmt::format("{}:{}: bad cache entry: {}", path_.string(), line_no,
                                        e.what()));
    }
  }
}

std::optional<LogProbResponse> ReplayCache::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ReplayCache::store(const std::string& key, const LogProbRequest& request,
                        const LogProbResponse& response) {
  std::lock_guard lock(mutex_);
  if (!entries_.emplace(key, response).second) return;
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot append to replay cache " + path_.string());
  const nlohmann::json line{{"key", key}, {"request", to_json(request)}, {"response", to_json(response)}};
  out << line.dump() << '\n';
}

std::size_t ReplayCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

ProviderClient::ProviderClient(std::shared_ptr<LogProbTransport> transport,
                               std::shared_ptr<ReplayCache> cache, ProviderOptions options)
    : transport_(std::move(transport)),
      cache_(cache ? std::move(cache) : std::make_shared<ReplayCache>()),
      options_(options),
      in_flight_(static_cast<std::ptrdiff_t>(
          std::clamp<std::size_t>(options.max_in_flight, 1, kMaxInFlight))) {
  if (!transport_ && !options_.replay_only) {
    throw InvalidArgument("a provider client without a transport must be replay-only");
  }
}

LogProbResponse ProviderClient::fetch(const LogProbRequest& request) {
  const std::string key = request_key(request);
  if (auto hit = cache_->find(key)) {
    ++cache_hits_;
    LogProbResponse response = std::move(*hit);
    response.id = request.id;
    validate_response(request, response);
    return response;
  }
  if (options_.replay_only) {
    throw TransportError("request " + request.id + ": not in replay cache (replay-only mode)");
  }
  LogProbResponse response;
  {
    in_flight_.acquire();
    struct Release {
      std::counting_semaphore<kMaxInFlight>& s;
      ~Release() { s.release(); }
    } release{in_flight_};
    ++network_requests_;
    response = transport_->send(request);
  }
  validate_response(request, response);
  cache_->store(key, request, response);
  return response;
}

std::vector<std::string> default_continuations(const OutcomeSpace& space) {
  std::vector<std::string> out;
  for (const auto& label : space.labels()) out.push_back(" " + label);
  return out;
}

DiscreteDistribution remote_predict(ProviderClient& client, const PromptCorpus& corpus,
                                    const PredictorContext& context,
                                    const std::vector<std::string>& continuations,
                                    RemoteDiagnostics* diagnostics) {
  if (continuations.size() != context.space.size()) {
    throw InvalidArgument("need one continuation string per outcome");
  }
  LogProbRequest request;
  request.prompt = render_prompt(context, corpus);
  request.continuations = continuations;
  request.chat = render_chat(context, corpus);
  if (request.chat && !ends_mid_sentence(request.chat->assistant_prefix)) {
    throw InvalidArgument("assistant prefix must end mid-sentence");
  }
  request.id = request_key(request);

  const LogProbResponse response = client.fetch(request);
  std::vector<double> log_probs;
  log_probs.reserve(response.continuations.size());
  for (std::size_t i = 0; i < response.continuations.size(); ++i) {
    const auto& c = response.continuations[i];
    std::string joined;
    for (const auto& t : c.tokens) joined += t;
    if (diagnostics && joined != c.text) ++diagnostics->tokenization_mismatches;
    log_probs.push_back(outcome_log_probability(TokenizedOutcome(i, c.token_logprobs)));
  }
  auto renormalized = renormalize_linear_log(log_probs);
  if (diagnostics) diagnostics->clamped_entries += renormalized.clamped;
  return std::move(renormalized.distribution);
}

RemotePredictor::RemotePredictor(std::shared_ptr<ProviderClient> client, PromptCorpus corpus,
                                 std::vector<std::string> continuations, std::string id)
    : client_(std::move(client)),
      corpus_(std::move(corpus)),
      continuations_(std::move(continuations)),
      id_(std::move(id)) {
  if (!client_) throw InvalidArgument("remote predictor needs a provider client");
}

DiscreteDistribution RemotePredictor::predict(const PredictorContext& context) const {
  const auto continuations =
      continuations_.empty() ? default_continuations(context.space) : continuations_;
  RemoteDiagnostics diag;
  auto result = remote_predict(*client_, corpus_, context, continuations, &diag);
  clamped_ += diag.clamped_entries;
  mismatches_ += diag.tokenization_mismatches;
  return result;
}

RemoteDiagnostics RemotePredictor::diagnostics() const {
  return {clamped_.load(), mismatches_.load()};
}

}  // namespace coinbayes
