#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace gamelab {

struct ChatMessage {
  std::string role;
  std::string content;
};

// Minimal chat-completion surface: a message list in, one reply out. The seed
// lets deterministic backends vary replies across draws; live backends may
// ignore it.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string name() const = 0;
  virtual std::string complete(const std::vector<ChatMessage>& messages,
                               double temperature, std::uint64_t seed) = 0;
};

std::string transcript_digest(const std::string& backend_name,
                              const std::vector<ChatMessage>& messages,
                              double temperature, std::uint64_t seed);

// Replays recorded or scripted responses; never touches the network.
// Exact entries match a full transcript digest; scripted entries match a
// substring of the last user message and pick a reply by seed.
class FixtureBackend : public ChatBackend {
 public:
  std::string name() const override { return "fixture"; }
  std::string complete(const std::vector<ChatMessage>& messages,
                       double temperature, std::uint64_t seed) override;

  void add_exact(const std::string& digest, const std::string& reply);
  void add_script(const std::string& pattern, std::vector<std::string> replies);
  void load_file(const std::string& path);

 private:
  std::map<std::string, std::string> exact_;
  std::vector<std::pair<std::string, std::vector<std::string>>> scripts_;
};

// OpenAI-style chat endpoint over HTTP. Credentials come from the
// GAMELAB_API_KEY / GAMELAB_API_BASE environment variables. Refuses to start
// in offline mode.
class HttpBackend : public ChatBackend {
 public:
  HttpBackend(std::string model, bool offline);
  std::string name() const override { return "http:" + model_; }
  std::string complete(const std::vector<ChatMessage>& messages,
                       double temperature, std::uint64_t seed) override;

 private:
  std::string model_;
  std::string base_;
  std::string key_;
};

// Content-addressed transcript store: one JSON file per request digest,
// written atomically (temp + rename).
class ResponseCache {
 public:
  explicit ResponseCache(std::string dir);
  bool get(const std::string& digest, std::string* reply) const;
  void put(const std::string& digest, const std::vector<ChatMessage>& messages,
           const std::string& reply) const;

 private:
  std::string dir_;
};

// Serves cached replies; consults the inner backend only on a miss.
class CachedBackend : public ChatBackend {
 public:
  CachedBackend(ChatBackend* inner, ResponseCache* cache)
      : inner_(inner), cache_(cache) {}
  std::string name() const override { return inner_->name(); }
  std::string complete(const std::vector<ChatMessage>& messages,
                       double temperature, std::uint64_t seed) override;

 private:
  ChatBackend* inner_;
  ResponseCache* cache_;
};

}  // namespace gamelab
