//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/oracle/backend.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "llm4sd/util/hash.hpp"

namespace llm4sd::oracle {

std::string canonicalize_prompt(std::string_view text) {
  std::vector<std::string> lines;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
        ++i;
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  lines.push_back(std::move(cur));
  for (std::string &l: lines)
    while (!l.empty() && (l.back() == ' ' || l.back() == '\t'))
      l.pop_back();
  std::size_t a = 0, b = lines.size();
  while (a < b && lines[a].empty())
    ++a;
  while (b > a && lines[b - 1].empty())
    --b;
  std::string out;
  for (std::size_t i = a; i < b; ++i) {
    if (i > a)
      out += '\n';
    out += lines[i];
  }
  return out;
}

std::string prompt_hash(std::string_view text) { return util::sha256_hex(canonicalize_prompt(text)); }

nlohmann::json to_json(const TranscriptEntry &e) {
  nlohmann::json j{
      {"hash", e.hash},         {"purpose", e.purpose},         {"prompt", e.prompt},
      {"response", e.response}, {"status", e.status},           {"http_status", e.http_status},
      {"attempt", e.attempt},   {"timestamp", e.timestamp},     {"backend", e.backend},
  };
  if (!e.error.empty())
    j["error"] = e.error;
  return j;
}

TranscriptEntry transcript_entry_from_json(const nlohmann::json &j) {
  TranscriptEntry e;
  e.prompt = j.at("prompt").get<std::string>();
  e.response = j.value("response", "");
  e.hash = j.value("hash", prompt_hash(e.prompt));
  e.purpose = j.value("purpose", "");
  e.status = j.value("status", "ok");
  e.http_status = j.value("http_status", 200);
  e.attempt = j.value("attempt", 1);
  e.timestamp = j.value("timestamp", "");
  e.backend = j.value("backend", "");
  e.error = j.value("error", "");
  return e;
}

TranscriptWriter::TranscriptWriter(std::string path): path_(std::move(path)) { }

void TranscriptWriter::append(const TranscriptEntry &e) {
  const std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out)
    throw OracleError(OracleErrorKind::kTranscript, "cannot append to transcript " + path_);
  out << to_json(e).dump() << '\n';
}

std::vector<TranscriptEntry> read_transcript(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw OracleError(OracleErrorKind::kTranscript, "cannot read transcript " + path);
  std::vector<TranscriptEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    try {
      out.push_back(transcript_entry_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception &e) {
      throw OracleError(OracleErrorKind::kTranscript,
                        path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- replay -------------------------------------------------------------

ReplayBackend::ReplayBackend(const std::vector<TranscriptEntry> &entries) {
  for (const TranscriptEntry &e: entries)
    if (e.status == "ok")
      responses_.emplace(e.hash, e.response);
}

ReplayBackend ReplayBackend::from_file(const std::string &path) {
  return ReplayBackend(read_transcript(path));
}

std::string ReplayBackend::complete(const Prompt &p) {
  const std::string h = prompt_hash(p.text);
  const auto it = responses_.find(h);
  if (it == responses_.end())
    throw OracleError(OracleErrorKind::kReplayMiss,
                      "replay miss: no transcript entry for " + std::string(purpose_name(p.purpose))
                          + " prompt " + h);
  return it->second;
}

// ---- live ---------------------------------------------------------------

void apply_environment(HttpConfig &c) {
  if (const char *v = std::getenv("LLM4SD_API_BASE"); v && *v)
    c.base_url = v;
  if (const char *v = std::getenv("LLM4SD_API_KEY"); v && *v)
    c.api_key = v;
  if (const char *v = std::getenv("LLM4SD_MODEL"); v && *v)
    c.model = v;
}

HttpBackend::HttpBackend(HttpConfig config, std::shared_ptr<TranscriptWriter> transcript,
                         Sleeper sleeper)
    : config_(std::move(config)), transcript_(std::move(transcript)), sleeper_(std::move(sleeper)) {
  if (!sleeper_)
    sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (config_.max_attempts < 1)
    config_.max_attempts = 1;
}

std::string HttpBackend::id() const { return "http:" + config_.base_url + "#" + config_.model; }

std::string HttpBackend::complete(const Prompt &p) {
  const std::lock_guard lock(mu_);
  const nlohmann::json body{
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"max_tokens", config_.max_tokens},
      {"messages", {{{"role", "user"}, {"content", p.text}}}},
  };
  const std::string payload = body.dump();
  httplib::Client cli(config_.base_url);
  cli.set_connection_timeout(config_.timeout_seconds);
  cli.set_read_timeout(config_.timeout_seconds);
  httplib::Headers headers;
  if (!config_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + config_.api_key);

  TranscriptEntry entry;
  entry.hash = prompt_hash(p.text);
  entry.purpose = std::string(purpose_name(p.purpose));
  entry.prompt = p.text;
  entry.backend = id();
  auto log = [&] {
    entry.timestamp = utc_timestamp();
    if (transcript_)
      transcript_->append(entry);
  };

  auto delay = config_.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    entry.attempt = attempt;
    entry.response.clear();
    entry.error.clear();
    const auto res = cli.Post(config_.path, headers, payload, "application/json");
    bool transient = false;
    if (!res) {
      entry.status = "error";
      entry.http_status = 0;
      entry.error = "connection failed: " + httplib::to_string(res.error());
      transient = true;
    } else if (res->status == 200) {
      try {
        const auto j = nlohmann::json::parse(res->body);
        entry.response = j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const nlohmann::json::exception &e) {
        entry.status = "error";
        entry.http_status = 200;
        entry.error = std::string("malformed completion: ") + e.what();
        log();
        throw OracleError(OracleErrorKind::kBadResponse, entry.error);
      }
      entry.status = "ok";
      entry.http_status = 200;
      log();
      return entry.response;
    } else {
      entry.status = "error";
      entry.http_status = res->status;
      entry.error = "HTTP " + std::to_string(res->status);
      if (res->status == 401 || res->status == 403) {
        log();
        throw OracleError(OracleErrorKind::kAuth,
                          "backend rejected credentials (" + entry.error + ")");
      }
      transient = res->status == 429 || res->status >= 500;
      if (!transient) {
        log();
        throw OracleError(OracleErrorKind::kBadResponse, "backend returned " + entry.error);
      }
    }
    log();
    last_error = entry.error;
    if (attempt < config_.max_attempts) {
      sleeper_(delay);
      delay = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(delay.count()) * config_.backoff_factor));
    }
  }
  throw OracleError(OracleErrorKind::kNetwork, "backend failed after "
                                                   + std::to_string(config_.max_attempts)
                                                   + " attempts: " + last_error);
}

// ---- function -----------------------------------------------------------

FunctionBackend::FunctionBackend(Fn fn, std::string id,
                                 std::shared_ptr<TranscriptWriter> transcript,
                                 std::function<std::string()> clock)
    : fn_(std::move(fn)), id_(std::move(id)), transcript_(std::move(transcript)),
      clock_(std::move(clock)) {
  if (!clock_)
    clock_ = utc_timestamp;
}

std::string FunctionBackend::complete(const Prompt &p) {
  std::string response = fn_(p);
  if (transcript_) {
    TranscriptEntry e;
    e.hash = prompt_hash(p.text);
    e.purpose = std::string(purpose_name(p.purpose));
    e.prompt = p.text;
    e.response = response;
    e.timestamp = clock_();
    e.backend = id_;
    transcript_->append(e);
  }
  return response;
}

}  // namespace llm4sd::oracle
