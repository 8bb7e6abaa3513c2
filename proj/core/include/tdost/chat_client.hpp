#pragma once

#include <string>

#include "tdost/llm_augmenter.hpp"

namespace tdost {

struct ChatEndpoint {
    std::string url;  // e.g. https://api.openai.com/v1/chat/completions
    std::string model = "gpt-4";
    std::string api_key_env = "TDOST_LLM_API_KEY";
    double temperature = 1.0;
    int timeout_seconds = 120;
};

/// OpenAI-style chat-completion client: POSTs {"model", "messages", "temperature"} and returns
/// choices[0].message.content.
class HttpChatClient final : public ChatClient {
public:
    /// Reads the credential from the environment. Throws ExternalError when it is unset.
    explicit HttpChatClient(ChatEndpoint endpoint);

    std::string complete(const std::string& prompt) override;
    std::string model_name() const override { return endpoint_.model; }

private:
    ChatEndpoint endpoint_;
    std::string api_key_;
};

}  // namespace tdost
