#include "tdost/chat_client.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "tdost/error.hpp"

namespace tdost {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("chat endpoint must be an absolute http(s) URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpChatClient::HttpChatClient(ChatEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    const char* key = std::getenv(endpoint_.api_key_env.c_str());
    if (!key || !*key) throw ExternalError("environment variable " + endpoint_.api_key_env + " is not set");
    api_key_ = key;
    split_url(endpoint_.url);
}

std::string HttpChatClient::complete(const std::string& prompt) {
    const auto [origin, path] = split_url(endpoint_.url);
    httplib::Client client(origin);
    client.set_connection_timeout(endpoint_.timeout_seconds, 0);
    client.set_read_timeout(endpoint_.timeout_seconds, 0);
    client.set_bearer_token_auth(api_key_);

    const nlohmann::json request = {
        {"model", endpoint_.model},
        {"temperature", endpoint_.temperature},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
    };
    auto res = client.Post(path, request.dump(), "application/json");
    if (!res) throw ExternalError("chat endpoint request failed: " + httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403)
        throw ExternalError("chat endpoint rejected the credential (HTTP " + std::to_string(res->status) + ")");
    if (res->status < 200 || res->status >= 300)
        throw ExternalError("chat endpoint returned HTTP " + std::to_string(res->status));

    try {
        const auto body = nlohmann::json::parse(res->body);
        return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ExternalError(std::string("unexpected chat endpoint response: ") + e.what());
    }
}

}  // namespace tdost
