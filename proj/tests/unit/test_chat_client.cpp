#include <doctest.h>

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "support/chat_stub.hpp"
#include "tdost/chat_client.hpp"
#include "tdost/error.hpp"

using namespace tdost;

namespace {

/// Chat-completion endpoint on localhost that answers with the scripted client's sentences.
class LocalEndpoint {
public:
    LocalEndpoint() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            last_auth = req.get_header_value("Authorization");
            last_body = req.body;
            if (status != 200) {
                res.status = status;
                res.set_content("{\"error\": \"nope\"}", "application/json");
                return;
            }
            const auto body = nlohmann::json::parse(req.body);
            const auto prompt = body["messages"][0]["content"].get<std::string>();
            support::ScriptedChatClient scripted;
            const nlohmann::json reply = {
                {"choices", nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", raw ? "plain" : scripted.complete(prompt)}}}}})}};
            res.set_content(raw ? "not json" : reply.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalEndpoint() {
        server_.stop();
        thread_.join();
    }

    ChatEndpoint endpoint() const {
        ChatEndpoint e;
        e.url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
        e.api_key_env = "TDOST_TEST_CHAT_KEY";
        e.timeout_seconds = 5;
        return e;
    }

    int status = 200;
    bool raw = false;
    std::string last_auth;
    std::string last_body;

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST_CASE("HTTP chat client against a local endpoint") {
    ::setenv("TDOST_TEST_CHAT_KEY", "sk-test", 1);
    LocalEndpoint server;
    HttpChatClient client(server.endpoint());
    CHECK(client.model_name() == "gpt-4");

    const std::vector<TriggerKey> keys{{"Monday", "Night", "Motion", "bedroom", "ON"}};
    const auto prompt = build_prompt(keys);
    const auto reply = client.complete(prompt.text);
    CHECK(server.last_auth == "Bearer sk-test");
    const auto request = nlohmann::json::parse(server.last_body);
    CHECK(request["model"] == "gpt-4");
    CHECK(request["messages"][0]["role"] == "user");
    CHECK(request["messages"][0]["content"] == prompt.text);
    const auto parsed = parse_response(reply, std::span(prompt.keys).first(prompt.real_count));
    CHECK(parsed.at(keys[0])[0] == support::scripted_sentence(keys[0], 0));

    AugmentationCache cache;
    AugmentOptions live;
    live.mode = AugmentMode::Live;
    const auto stats = augment(keys, cache, &client, live);
    CHECK(stats.new_entries == 1);

    server.status = 401;
    CHECK_THROWS_AS(client.complete("hello"), ExternalError);
    server.status = 403;
    CHECK_THROWS_AS(client.complete("hello"), ExternalError);
    server.status = 500;
    CHECK_THROWS_AS(client.complete("hello"), ExternalError);
    server.status = 200;
    server.raw = true;
    CHECK_THROWS_AS(client.complete("hello"), ExternalError);
    ::unsetenv("TDOST_TEST_CHAT_KEY");
}

TEST_CASE("HTTP chat client configuration errors") {
    ChatEndpoint e;
    e.url = "http://127.0.0.1:9/v1/chat/completions";
    e.api_key_env = "TDOST_TEST_CHAT_KEY_UNSET";
    ::unsetenv("TDOST_TEST_CHAT_KEY_UNSET");
    CHECK_THROWS_AS(HttpChatClient{e}, ExternalError);

    ::setenv("TDOST_TEST_CHAT_KEY_UNSET", "x", 1);
    e.url = "localhost/v1";
    CHECK_THROWS_AS(HttpChatClient{e}, ConfigError);

    e.url = "http://127.0.0.1:9/v1/chat/completions";
    e.timeout_seconds = 1;
    HttpChatClient unreachable(e);
    CHECK_THROWS_AS(unreachable.complete("hello"), ExternalError);
    ::unsetenv("TDOST_TEST_CHAT_KEY_UNSET");
}
