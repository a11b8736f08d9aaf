// Copyright 2026 The gentrieval Authors.
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

#include <cmath>
#include <semaphore>

#include <httplib.h>
#include <json.hpp>

#include "gentrieval/error.hpp"
#include "gentrieval/lm.hpp"

namespace gentrieval {

namespace {

using json = nlohmann::json;

struct Reply {
  int status = 0;
  std::string body;
};

}  // namespace

struct RemoteModel::Impl {
  explicit Impl(int max_in_flight) : slots(std::max(1, max_in_flight)) {}

  std::counting_semaphore<> slots;
};

RemoteModel::RemoteModel(RemoteOptions options, std::shared_ptr<const Vocabulary> vocab)
    : options_(std::move(options)),
      vocab_(std::move(vocab)),
      impl_(std::make_unique<Impl>(options_.max_in_flight)) {
  if (options_.url.empty()) throw Error(Errc::kConfig, "remote model needs a URL");
  if (options_.retries < 0) throw Error(Errc::kConfig, "retries must be >= 0");
}

RemoteModel::~RemoteModel() = default;

namespace {

Reply post_json(const RemoteOptions& options, std::counting_semaphore<>& slots,
                const std::string& path, const json& body) {
  slots.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{slots};

  const std::string payload = body.dump();
  httplib::Error last_error = httplib::Error::Success;
  int last_status = 0;
  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    httplib::Client client(options.url);
    const auto seconds = options.timeout_ms / 1000;
    const auto micros = (options.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    auto res = client.Post(path, payload, "application/json");
    if (!res) {
      last_error = res.error();
      continue;
    }
    if (res->status >= 500 && res->status != 501) {
      last_status = res->status;
      continue;
    }
    return {res->status, res->body};
  }
  if (last_error == httplib::Error::Read || last_error == httplib::Error::ConnectionTimeout) {
    throw Error(Errc::kTimeout, "remote model timed out on " + path);
  }
  if (last_status != 0) {
    throw Error(Errc::kRemoteUnavailable,
                "remote model answered HTTP " + std::to_string(last_status) + " on " + path);
  }
  throw Error(Errc::kRemoteUnavailable, "remote model unreachable at " + options.url + " (" +
                                            httplib::to_string(last_error) + ")");
}

json parse_reply(const Reply& reply, const std::string& path) {
  if (reply.status != 200) {
    throw Error(Errc::kModelFailure,
                "remote model answered HTTP " + std::to_string(reply.status) + " on " + path);
  }
  try {
    return json::parse(reply.body);
  } catch (const json::parse_error& e) {
    throw Error(Errc::kModelFailure, "remote model returned invalid JSON: " + std::string(e.what()));
  }
}

}  // namespace

std::string RemoteModel::generate(const GenerationRequest& request) const {
  if (request.max_tokens < 1) throw Error(Errc::kConfig, "max_tokens must be >= 1");
  json body = {{"prompt", request.prompt},
               {"max_tokens", request.max_tokens},
               {"stop", request.stop},
               {"temperature", request.temperature}};
  const json reply = parse_reply(post_json(options_, impl_->slots, "/generate", body), "/generate");
  auto it = reply.find("text");
  if (it == reply.end() || !it->is_string()) {
    throw Error(Errc::kModelFailure, "remote /generate reply lacks a 'text' string");
  }
  return truncate_generation(it->get<std::string>(), request.max_tokens, request.stop);
}

TokenDistribution RemoteModel::next_token_distribution(const LmContext& ctx) const {
  if (!vocab_) throw Error(Errc::kNotSupported, "remote model has no shared vocabulary");
  std::vector<TokenId> ids(ctx.prompt.tokens.begin(), ctx.prompt.tokens.end());
  ids.insert(ids.end(), ctx.generated.begin(), ctx.generated.end());
  for (TokenId t : ids) {
    if (!vocab_->contains(t)) throw Error(Errc::kUnknownToken, "context id out of vocabulary");
  }
  const Reply reply = post_json(options_, impl_->slots, "/logprobs", json{{"context_ids", ids}});
  if (reply.status == 404 || reply.status == 405 || reply.status == 501) {
    throw Error(Errc::kNotSupported, "remote model does not expose log-probabilities");
  }
  const json j = parse_reply(reply, "/logprobs");
  auto it = j.find("logprobs");
  if (it == j.end() || !it->is_object()) {
    throw Error(Errc::kModelFailure, "remote /logprobs reply lacks a 'logprobs' object");
  }
  std::vector<double> weights(vocab_->size(), kMaskedLogProb);
  for (const auto& [key, value] : it->items()) {
    std::size_t id = 0;
    try {
      id = std::stoul(key);
    } catch (const std::exception&) {
      throw Error(Errc::kModelFailure, "remote logprob key '" + key + "' is not a token id");
    }
    if (id >= weights.size()) throw Error(Errc::kUnknownToken, "remote logprob id out of range");
    if (!value.is_number()) throw Error(Errc::kModelFailure, "remote logprob is not a number");
    const double lp = value.get<double>();
    if (std::isfinite(lp)) weights[id] = std::max(lp, kMaskedLogProb);
  }
  return normalize_logweights(std::move(weights));
}

}  // namespace gentrieval
