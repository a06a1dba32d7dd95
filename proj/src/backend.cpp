#include "gamelab/backend.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "gamelab/hash.hpp"
#include "httplib.h"
#include "json.hpp"

namespace gamelab {

std::string transcript_digest(const std::string& backend_name,
                              const std::vector<ChatMessage>& messages,
                              double temperature, std::uint64_t seed) {
  std::string blob = backend_name;
  blob += '\n';
  for (const auto& m : messages) {
    blob += m.role;
    blob += ':';
    blob += m.content;
    blob += '\n';
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "temp=%.10g seed=%llu", temperature,
                (unsigned long long)seed);
  blob += buf;
  return sha256_hex(blob);
}

std::string FixtureBackend::complete(const std::vector<ChatMessage>& messages,
                                     double temperature, std::uint64_t seed) {
  std::string digest = transcript_digest(name(), messages, temperature, seed);
  auto it = exact_.find(digest);
  if (it != exact_.end()) return it->second;
  const std::string* last_user = nullptr;
  for (const auto& m : messages)
    if (m.role == "user") last_user = &m.content;
  if (last_user) {
    for (const auto& [pattern, replies] : scripts_) {
      if (last_user->find(pattern) == std::string::npos) continue;
      return replies[std::size_t(seed % replies.size())];
    }
  }
  throw std::runtime_error("fixture backend has no reply for transcript " + digest);
}

void FixtureBackend::add_exact(const std::string& digest, const std::string& reply) {
  exact_[digest] = reply;
}

void FixtureBackend::add_script(const std::string& pattern,
                                std::vector<std::string> replies) {
  if (replies.empty()) throw std::invalid_argument("script needs replies");
  scripts_.emplace_back(pattern, std::move(replies));
}

void FixtureBackend::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file " + path);
  nlohmann::json j;
  in >> j;
  if (j.contains("exact"))
    for (auto& [digest, reply] : j["exact"].items())
      add_exact(digest, reply.get<std::string>());
  if (j.contains("scripts"))
    for (auto& s : j["scripts"])
      add_script(s.at("pattern").get<std::string>(),
                 s.at("replies").get<std::vector<std::string>>());
}

HttpBackend::HttpBackend(std::string model, bool offline) : model_(std::move(model)) {
  if (offline)
    throw std::runtime_error("http backend is unavailable in offline mode");
  const char* key = std::getenv("GAMELAB_API_KEY");
  if (!key || !*key)
    throw std::runtime_error("GAMELAB_API_KEY is not set");
  key_ = key;
  const char* base = std::getenv("GAMELAB_API_BASE");
  base_ = (base && *base) ? base : "https://api.openai.com";
}

std::string HttpBackend::complete(const std::vector<ChatMessage>& messages,
                                  double temperature, std::uint64_t seed) {
  nlohmann::json body;
  body["model"] = model_;
  body["temperature"] = temperature;
  body["seed"] = seed;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages)
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});

  httplib::Client client(base_);
  client.set_read_timeout(120, 0);
  httplib::Headers headers{{"Authorization", "Bearer " + key_}};
  auto res = client.Post("/v1/chat/completions", headers, body.dump(),
                         "application/json");
  if (!res)
    throw std::runtime_error("chat request failed: " +
                             httplib::to_string(res.error()));
  if (res->status != 200)
    throw std::runtime_error("chat request returned status " +
                             std::to_string(res->status) + ": " + res->body);
  nlohmann::json reply = nlohmann::json::parse(res->body);
  return reply.at("choices").at(0).at("message").at("content").get<std::string>();
}

ResponseCache::ResponseCache(std::string dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

bool ResponseCache::get(const std::string& digest, std::string* reply) const {
  std::filesystem::path path = std::filesystem::path(dir_) / (digest + ".json");
  std::ifstream in(path);
  if (!in) return false;
  nlohmann::json j;
  in >> j;
  *reply = j.at("reply").get<std::string>();
  return true;
}

void ResponseCache::put(const std::string& digest,
                        const std::vector<ChatMessage>& messages,
                        const std::string& reply) const {
  nlohmann::ordered_json j;
  j["digest"] = digest;
  j["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : messages)
    j["messages"].push_back({{"role", m.role}, {"content", m.content}});
  j["reply"] = reply;
  std::filesystem::path final_path =
      std::filesystem::path(dir_) / (digest + ".json");
  std::filesystem::path tmp_path =
      std::filesystem::path(dir_) / ("." + digest + ".tmp");
  {
    std::ofstream out(tmp_path);
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp_path, final_path);
}

std::string CachedBackend::complete(const std::vector<ChatMessage>& messages,
                                    double temperature, std::uint64_t seed) {
  std::string digest = transcript_digest(inner_->name(), messages, temperature, seed);
  std::string reply;
  if (cache_ && cache_->get(digest, &reply)) return reply;
  reply = inner_->complete(messages, temperature, seed);
  if (cache_) cache_->put(digest, messages, reply);
  return reply;
}

}  // namespace gamelab
