//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_PIPELINE_SERVICE_HPP_
#define LLM4SD_PIPELINE_SERVICE_HPP_

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "llm4sd/pipeline/pipeline.hpp"

namespace llm4sd::pipeline {

/// Trained tasks under one root directory, one subdirectory each.
class TaskStore {
public:
  /// Loads every subdirectory holding a model.json. Throws
  /// PipelineError(kExitData) when a task directory is inconsistent.
  static TaskStore open(const std::string &root);

  const std::string &root() const { return root_; }
  std::vector<std::string> ids() const;
  std::shared_ptr<const TrainedTask> find(const std::string &id) const;
  std::string dir(const std::string &id) const;

private:
  std::string root_;
  std::map<std::string, std::shared_ptr<const TrainedTask>> tasks_;
};

using BackendFactory = std::function<std::unique_ptr<oracle::Backend>(const RunConfig &)>;

struct ServiceOptions {
  /// Oracle used by /synthesize, /infer and llm explanations; defaults to
  /// make_backend on the task's stored configuration.
  BackendFactory backend_factory;
  std::size_t default_k = 3;
};

/// JSON over HTTP:
///   GET  /health
///   GET  /tasks
///   GET  /tasks/{id}/rules
///   POST /predict     {"smiles", "task_id", "k"?, "mode"?: "template"|"llm"}
///   POST /synthesize  {"task_id"}   -> 202 {"job_id"}
///   POST /infer       {"task_id"}   -> 202 {"job_id"}
///   GET  /jobs/{id}
/// Trained tasks are read-only; rule-generation jobs run one at a time on a
/// worker thread, which is the only writer to the store directory.
class Service {
public:
  Service(TaskStore store, ServiceOptions options = {});
  ~Service();
  Service(const Service &) = delete;
  Service &operator=(const Service &) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port; throws PipelineError(kExitUsage) on failure.
  int start(const std::string &host, int port);
  /// Serves on the calling thread until stop().
  void run(const std::string &host, int port);
  void stop();

  /// Blocks until the job queue is empty.
  void drain_jobs();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace llm4sd::pipeline

#endif  // LLM4SD_PIPELINE_SERVICE_HPP_
