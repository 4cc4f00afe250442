//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_ORACLE_BACKEND_HPP_
#define LLM4SD_ORACLE_BACKEND_HPP_

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "llm4sd/oracle/prompts.hpp"

namespace llm4sd::oracle {

enum class OracleErrorKind { kReplayMiss, kNetwork, kAuth, kBadResponse, kTranscript, kNoRules };

class OracleError: public std::runtime_error {
public:
  OracleError(OracleErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) { }
  OracleErrorKind kind() const { return kind_; }

private:
  OracleErrorKind kind_;
};

/// Line endings to LF, trailing whitespace stripped per line, leading and
/// trailing blank lines dropped.
std::string canonicalize_prompt(std::string_view text);
/// SHA-256 hex of the canonical prompt.
std::string prompt_hash(std::string_view text);

struct TranscriptEntry {
  std::string hash;
  std::string purpose;
  std::string prompt;
  std::string response;
  std::string status = "ok";  // ok | error
  int http_status = 200;
  int attempt = 1;
  std::string timestamp;  // ISO 8601 UTC
  std::string backend;
  std::string error;
};

nlohmann::json to_json(const TranscriptEntry &e);
TranscriptEntry transcript_entry_from_json(const nlohmann::json &j);

/// Append-only JSON-lines file. One writer per file; appends are serialized.
class TranscriptWriter {
public:
  explicit TranscriptWriter(std::string path);
  void append(const TranscriptEntry &e);
  const std::string &path() const { return path_; }

private:
  std::string path_;
  std::mutex mu_;
};

std::vector<TranscriptEntry> read_transcript(const std::string &path);

/// Current UTC time as 2026-01-01T00:00:00Z.
std::string utc_timestamp();

class Backend {
public:
  virtual ~Backend() = default;
  virtual std::string complete(const Prompt &p) = 0;
  virtual std::string id() const = 0;
};

/// Serves stored responses keyed by prompt hash; the first successful entry
/// for a hash wins. A miss raises OracleError(kReplayMiss) naming the hash.
class ReplayBackend: public Backend {
public:
  explicit ReplayBackend(const std::vector<TranscriptEntry> &entries);
  static ReplayBackend from_file(const std::string &path);
  std::string complete(const Prompt &p) override;
  std::string id() const override { return "replay"; }
  std::size_t size() const { return responses_.size(); }

private:
  std::map<std::string, std::string> responses_;
};

struct HttpConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string path = "/v1/chat/completions";
  std::string model;
  double temperature = 0.0;
  int max_tokens = 2048;
  std::string api_key;  // sent as a Bearer token when non-empty
  int timeout_seconds = 120;
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_factor = 2.0;
};

/// Reads LLM4SD_API_BASE, LLM4SD_API_KEY and LLM4SD_MODEL into `c`.
void apply_environment(HttpConfig &c);

/// Chat-completion client. Connection failures, 429 and 5xx are retried with
/// exponential backoff; 401/403 fail at once. Every attempt is logged to the
/// transcript when a writer is given. Requests are serialized.
class HttpBackend: public Backend {
public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;
  HttpBackend(HttpConfig config, std::shared_ptr<TranscriptWriter> transcript = nullptr,
              Sleeper sleeper = nullptr);
  std::string complete(const Prompt &p) override;
  std::string id() const override;

private:
  HttpConfig config_;
  std::shared_ptr<TranscriptWriter> transcript_;
  Sleeper sleeper_;
  std::mutex mu_;
};

/// Answers through a function; used for scripted runs and fixture building.
class FunctionBackend: public Backend {
public:
  using Fn = std::function<std::string(const Prompt &)>;
  FunctionBackend(Fn fn, std::string id, std::shared_ptr<TranscriptWriter> transcript = nullptr,
                  std::function<std::string()> clock = nullptr);
  std::string complete(const Prompt &p) override;
  std::string id() const override { return id_; }

private:
  Fn fn_;
  std::string id_;
  std::shared_ptr<TranscriptWriter> transcript_;
  std::function<std::string()> clock_;
};

}  // namespace llm4sd::oracle

#endif  // LLM4SD_ORACLE_BACKEND_HPP_
