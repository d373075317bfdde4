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

#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "json.hpp"

#include "coinbayes/predictors.hpp"

namespace coinbayes {

// Wire records. A request asks for the log-probability of each continuation
// given the prompt (or, in chat mode, given the chat turns):
//   {"id": str, "prompt": str, "continuations": [str],
//    "chat": null | {"user": str, "assistant_prefix": str}}
//   {"id": str, "continuations": [{"text": str, "tokens": [str],
//                                  "token_logprobs": [num]}]}
// Providers serving chat models must render the assistant prefix without an
// end-of-turn token so the continuation extends it directly.

struct LogProbRequest {
  std::string id;
  std::string prompt;
  std::vector<std::string> continuations;
  std::optional<ChatPrompt> chat;
};

struct ContinuationLogProbs {
  std::string text;
  std::vector<std::string> tokens;
  std::vector<double> token_logprobs;
};

struct LogProbResponse {
  std::string id;
  std::vector<ContinuationLogProbs> continuations;
};

nlohmann::json to_json(const LogProbRequest& request);
nlohmann::json to_json(const LogProbResponse& response);
LogProbRequest request_from_json(const nlohmann::json& j);
/// Throws MalformedResponseError on missing or mistyped fields.
LogProbResponse response_from_json(const nlohmann::json& j);

/// SHA-256 (hex) of the request content, excluding the id.
std::string request_key(const LogProbRequest& request);

/// Checks the response answers the request: same id, continuations in the
/// same order and number, one log-probability per token, all <= 0.
void validate_response(const LogProbRequest& request, const LogProbResponse& response);

class LogProbTransport {
 public:
  virtual ~LogProbTransport() = default;
  virtual LogProbResponse send(const LogProbRequest& request) = 0;
};

/// JSON over HTTP POST. `endpoint` is "http://host:port/path".
class HttpTransport final : public LogProbTransport {
 public:
  explicit HttpTransport(std::string endpoint, int timeout_seconds = 120);
  LogProbResponse send(const LogProbRequest& request) override;

 private:
  std::string base_;
  std::string path_;
  int timeout_seconds_;
};

/// Append-only JSON-lines file of request/response pairs keyed by
/// request_key. Reads and writes are serialized.
class ReplayCache {
 public:
  /// Loads existing entries. An empty path keeps the cache in memory only.
  explicit ReplayCache(std::filesystem::path path = {});

  std::optional<LogProbResponse> find(const std::string& key) const;
  void store(const std::string& key, const LogProbRequest& request,
             const LogProbResponse& response);
  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::string, LogProbResponse> entries_;
};

struct ProviderOptions {
  std::size_t max_in_flight = 4;
  /// Never touch the transport; cache misses become TransportError.
  bool replay_only = false;
};

/// Cache-first access to a provider with bounded concurrent requests.
class ProviderClient {
 public:
  ProviderClient(std::shared_ptr<LogProbTransport> transport, std::shared_ptr<ReplayCache> cache,
                 ProviderOptions options = {});

  /// The returned response has passed validate_response.
  LogProbResponse fetch(const LogProbRequest& request);

  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }
  std::size_t network_requests() const noexcept { return network_requests_.load(); }
  const ProviderOptions& options() const noexcept { return options_; }

 private:
  static constexpr std::ptrdiff_t kMaxInFlight = 256;

  std::shared_ptr<LogProbTransport> transport_;
  std::shared_ptr<ReplayCache> cache_;
  ProviderOptions options_;
  std::counting_semaphore<kMaxInFlight> in_flight_;
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> network_requests_{0};
};

/// " heads", " tails", ...: each label with a leading space.
std::vector<std::string> default_continuations(const OutcomeSpace& space);

struct RemoteDiagnostics {
  std::size_t clamped_entries = 0;
  /// Continuations whose tokens do not concatenate to the requested text.
  std::size_t tokenization_mismatches = 0;
};

/// Renders the prompt, fetches per-token log-probabilities for every outcome
/// continuation, chains them and renormalizes linearly over the support.
DiscreteDistribution remote_predict(ProviderClient& client, const PromptCorpus& corpus,
                                    const PredictorContext& context,
                                    const std::vector<std::string>& continuations,
                                    RemoteDiagnostics* diagnostics = nullptr);

class RemotePredictor final : public Predictor {
 public:
  RemotePredictor(std::shared_ptr<ProviderClient> client, PromptCorpus corpus,
                  std::vector<std::string> continuations = {}, std::string id = "remote");

  std::string id() const override { return id_; }
  DiscreteDistribution predict(const PredictorContext& context) const override;

  RemoteDiagnostics diagnostics() const;

 private:
  std::shared_ptr<ProviderClient> client_;
  PromptCorpus corpus_;
  std::vector<std::string> continuations_;
  std::string id_;
  mutable std::atomic<std::size_t> clamped_{0};
  mutable std::atomic<std::size_t> mismatches_{0};
};

}  // namespace coinbayes
