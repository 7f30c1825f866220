#include <fmt/format.h>

#include "httplib.h"
#include "json.hpp"
#include "tailcal/harness.hpp"

namespace tailcal {

namespace {

using nlohmann::json;

struct Url {
  std::string origin;  ///< scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& target) {
  const auto scheme_end = target.find("://");
  if (scheme_end == std::string::npos) {
    throw TransportError(fmt::format("target '{}' is not an absolute URL", target), false);
  }
  const auto path_start = target.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {target, "/"};
  return {target.substr(0, path_start), target.substr(path_start)};
}

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

  std::string complete(const EndpointConfig& endpoint, const ExchangeRequest& request,
                       std::string_view api_key) override {
    const auto url = split_url(endpoint.target);

    json body = json::object();
    for (const auto& [key, text] : request.options) {
      try {
        body[key] = json::parse(text);
      } catch (const json::exception&) {
        body[key] = text;
      }
    }
    body["model"] = endpoint.model;
    if (endpoint.adapter == Adapter::openai_chat) {
      body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
    } else {
      body["prompt"] = request.prompt;
    }

    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", fmt::format("Bearer {}", api_key));

    const auto res = client.Post(url.path, headers, body.dump(), "application/json");
    if (!res) {
      throw TransportError(fmt::format("{}: {}", endpoint.target, httplib::to_string(res.error())), true);
    }
    if (res->status != 200) {
      const bool transient = res->status == 408 || res->status == 429 || res->status >= 500;
      throw TransportError(fmt::format("{}: HTTP {}", endpoint.target, res->status), transient);
    }

    try {
      const auto reply = json::parse(res->body);
      const auto& choice = reply.at("choices").at(0);
      if (endpoint.adapter == Adapter::openai_chat) {
        return choice.at("message").at("content").get<std::string>();
      }
      return choice.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw TransportError(fmt::format("{}: unexpected response body: {}", endpoint.target, e.what()),
                           false);
    }
  }

 private:
  std::chrono::seconds timeout_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(std::chrono::seconds timeout) {
  return std::make_unique<HttpTransport>(timeout);
}

}  // namespace tailcal
