// Copyright 2026 The docfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <string>

#include "docfuzz/enrichment.hpp"

namespace docfuzz {

// Plain-HTTP completion client. POSTs {"model", "prompt"} to a full URL such
// as "http://127.0.0.1:8080/complete" and returns the reply's "content"
// field (a string, or an object re-serialized as text). An API key, when
// present, is sent as a bearer token.
class HttpLlmClient : public LlmClient {
 public:
  HttpLlmClient(std::string endpoint, std::string model,
                std::chrono::milliseconds timeout = std::chrono::seconds(60),
                std::string api_key = KeyFromEnvironment())
      : endpoint_(std::move(endpoint)),
        model_(std::move(model)),
        timeout_(timeout),
        api_key_(std::move(api_key)) {
    if (endpoint_.empty()) throw BackendUnavailable("empty llm endpoint");
  }

  static std::string KeyFromEnvironment() {
    const char* key = std::getenv("DOCFUZZ_LLM_KEY");
    return key ? key : "";
  }

  std::string Complete(const std::string& prompt) override {
    const std::string scheme = "http://";
    if (endpoint_.rfind(scheme, 0) != 0) {
      throw BackendUnavailable("only http:// endpoints are supported: " + endpoint_);
    }
    std::size_t slash = endpoint_.find('/', scheme.size());
    std::string host = endpoint_.substr(0, slash);
    std::string path = slash == std::string::npos ? "/" : endpoint_.substr(slash);

    httplib::Client client(host);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    Json body = {{"model", model_}, {"prompt", prompt}};
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      throw BackendUnavailable("request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw BackendUnavailable("http status " + std::to_string(res->status));
    }
    Json reply;
    try {
      reply = Json::parse(res->body);
    } catch (const Json::exception& e) {
      throw BackendUnavailable(std::string("reply is not JSON: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("content")) {
      throw BackendUnavailable("reply has no content field");
    }
    const Json& content = reply["content"];
    if (content.is_string()) return content.get<std::string>();
    if (content.is_object()) return content.dump();
    throw BackendUnavailable("reply content is neither text nor an object");
  }

 private:
  std::string endpoint_;
  std::string model_;
  std::chrono::milliseconds timeout_;
  std::string api_key_;
};

}  // namespace docfuzz
