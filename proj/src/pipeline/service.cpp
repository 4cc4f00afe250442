//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "llm4sd/pipeline/service.hpp"

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "llm4sd/molgraph/smiles.hpp"
#include "llm4sd/rulekit/rule.hpp"

namespace llm4sd::pipeline {

namespace fs = std::filesystem;

TaskStore TaskStore::open(const std::string &root) {
  TaskStore s;
  s.root_ = root;
  if (!fs::is_directory(root))
    throw PipelineError(kExitData, "task store " + root + " is not a directory");
  std::vector<fs::path> dirs;
  for (const auto &e: fs::directory_iterator(root))
    if (e.is_directory() && fs::exists(e.path() / "model.json"))
      dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const fs::path &d: dirs) {
    auto t = std::make_shared<TrainedTask>(load_trained(d.string()));
    // The directory name is the key, whatever id the metrics file claims.
    t->id = d.filename().string();
    s.tasks_[t->id] = std::move(t);
  }
  return s;
}

std::vector<std::string> TaskStore::ids() const {
  std::vector<std::string> out;
  for (const auto &[id, t]: tasks_)
    out.push_back(id);
  return out;
}

std::shared_ptr<const TrainedTask> TaskStore::find(const std::string &id) const {
  const auto it = tasks_.find(id);
  return it == tasks_.end() ? nullptr : it->second;
}

std::string TaskStore::dir(const std::string &id) const { return (fs::path(root_) / id).string(); }

// ---- service ------------------------------------------------------------

namespace {

struct Job {
  std::string id;
  std::string kind;  // "synthesize" or "infer"
  std::string task_id;
  std::string status = "queued";  // queued, running, done, failed
  nlohmann::json result;
  std::string error;
};

nlohmann::json job_json(const Job &j) {
  nlohmann::json out{{"job_id", j.id}, {"kind", j.kind}, {"task_id", j.task_id}, {"status", j.status}};
  if (!j.result.is_null())
    out["result"] = j.result;
  if (!j.error.empty())
    out["error"] = j.error;
  return out;
}

void reply(httplib::Response &res, int status, const nlohmann::json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response &res, int status, const std::string &code, const std::string &message) {
  reply(res, status, {{"error", code}, {"message", message}});
}

}  // namespace

struct Service::Impl {
  TaskStore store;
  ServiceOptions options;
  httplib::Server server;
  std::thread listener;

  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::string> queue;
  std::map<std::string, Job> jobs;
  std::size_t next_job = 1;
  std::size_t running = 0;
  bool stopping = false;
  std::thread worker;

  Impl(TaskStore s, ServiceOptions o): store(std::move(s)), options(std::move(o)) {
    if (!options.backend_factory)
      options.backend_factory = [](const RunConfig &c) { return make_backend(c); };
    routes();
    worker = std::thread([this] { work(); });
  }

  ~Impl() {
    {
      const std::lock_guard lock(mu);
      stopping = true;
    }
    cv.notify_all();
    server.stop();
    if (listener.joinable())
      listener.join();
    worker.join();
  }

  void routes() {
    server.Get("/health", [](const httplib::Request &, httplib::Response &res) {
      reply(res, 200, {{"status", "ok"}});
    });

    server.Get("/tasks", [this](const httplib::Request &, httplib::Response &res) {
      nlohmann::json arr = nlohmann::json::array();
      for (const std::string &id: store.ids()) {
        const auto t = store.find(id);
        const oracle::TaskSpec spec = resolve_task(t->config);
        arr.push_back({{"id", id},
                       {"task", t->config.task},
                       {"kind", learn::task_kind_name(t->kind())},
                       {"description", spec.description},
                       {"rules", t->ruleset.rules.size()},
                       {"metrics", metrics_to_json(*t)},
                       {"validated", !t->verdicts.empty()}});
      }
      reply(res, 200, {{"tasks", arr}});
    });

    server.Get(R"(/tasks/([^/]+)/rules)", [this](const httplib::Request &req, httplib::Response &res) {
      const std::string id = req.matches[1];
      const auto t = store.find(id);
      if (!t)
        return fail(res, 404, "unknown_task", "no trained task '" + id + "'");
      const nlohmann::json verdicts = verdicts_to_json(t->verdicts);
      nlohmann::json arr = nlohmann::json::array();
      for (std::size_t i = 0; i < t->ruleset.rules.size(); ++i) {
        const rules::Rule &r = t->ruleset.rules[i];
        nlohmann::json v = nullptr;
        for (const auto &x: verdicts)
          if (x.at("rule_id") == r.id)
            v = x;
        arr.push_back({{"id", r.id},
                       {"provenance", rules::provenance_name(r.provenance)},
                       {"source_text", r.source_text},
                       {"rule", rules::to_string(*r.expr)},
                       {"importance", t->importances[i]},
                       {"verdict", v}});
      }
      reply(res, 200, {{"task_id", id}, {"rules", arr}, {"category_counts", category_counts(t->verdicts)}});
    });

    server.Post("/predict", [this](const httplib::Request &req, httplib::Response &res) {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::exception &e) {
        return fail(res, 400, "bad_request", std::string("request body is not JSON: ") + e.what());
      }
      if (!body.is_object() || !body.contains("smiles") || !body["smiles"].is_string()
          || !body.contains("task_id") || !body["task_id"].is_string())
        return fail(res, 400, "bad_request", "expected {\"smiles\": string, \"task_id\": string}");
      const std::string smiles = body["smiles"];
      const std::string id = body["task_id"];
      std::size_t k = options.default_k;
      if (body.contains("k")) {
        if (!body["k"].is_number_integer() || body["k"].get<long long>() < 0)
          return fail(res, 400, "bad_request", "k must be a non-negative integer");
        k = body["k"].get<std::size_t>();
      }
      ExplainMode mode = ExplainMode::kTemplate;
      if (body.contains("mode")) {
        const std::string m = body["mode"].is_string() ? body["mode"].get<std::string>() : "";
        if (m != "template" && m != "llm")
          return fail(res, 400, "bad_request", "mode must be template or llm");
        mode = m == "llm" ? ExplainMode::kLlm : ExplainMode::kTemplate;
      }
      const auto t = store.find(id);
      if (!t)
        return fail(res, 404, "unknown_task", "no trained task '" + id + "'");
      mol::Molecule m;
      try {
        m = mol::parse_smiles(smiles);
      } catch (const mol::ParseError &e) {
        nlohmann::json err{{"error", "invalid_smiles"},
                           {"message", e.what()},
                           {"kind", mol::error_kind_name(e.kind())},
                           {"smiles", smiles}};
        err["position"] = e.position() ? nlohmann::json(*e.position()) : nlohmann::json(nullptr);
        return reply(res, 422, err);
      }
      std::unique_ptr<oracle::Backend> backend;
      std::string notice;
      if (mode == ExplainMode::kLlm) {
        try {
          backend = options.backend_factory(t->config);
        } catch (const std::exception &e) {
          notice = std::string("language model backend unavailable (") + e.what() + ")";
        }
      }
      Explanation e = explain(*t, m, smiles, k, mode, backend.get());
      if (!notice.empty())
        e.notice = notice + "; template explanation used";
      nlohmann::json out = to_json(e);
      out["task_id"] = id;
      reply(res, 200, out);
    });

    const auto enqueue = [this](const std::string &kind) {
      return [this, kind](const httplib::Request &req, httplib::Response &res) {
        nlohmann::json body;
        try {
          body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception &e) {
          return fail(res, 400, "bad_request", std::string("request body is not JSON: ") + e.what());
        }
        if (!body.is_object() || !body.contains("task_id") || !body["task_id"].is_string())
          return fail(res, 400, "bad_request", "expected {\"task_id\": string}");
        const std::string id = body["task_id"];
        if (!store.find(id))
          return fail(res, 404, "unknown_task", "no trained task '" + id + "'");
        Job j;
        {
          const std::lock_guard lock(mu);
          j.id = "job-" + std::to_string(next_job++);
          j.kind = kind;
          j.task_id = id;
          jobs[j.id] = j;
          queue.push_back(j.id);
        }
        cv.notify_all();
        reply(res, 202, job_json(j));
      };
    };
    server.Post("/synthesize", enqueue("synthesize"));
    server.Post("/infer", enqueue("infer"));

    server.Get(R"(/jobs/([^/]+))", [this](const httplib::Request &req, httplib::Response &res) {
      const std::lock_guard lock(mu);
      const auto it = jobs.find(req.matches[1]);
      if (it == jobs.end())
        return fail(res, 404, "unknown_job", "no job '" + std::string(req.matches[1]) + "'");
      reply(res, 200, job_json(it->second));
    });
  }

  nlohmann::json execute(const Job &j) {
    const auto t = store.find(j.task_id);
    std::unique_ptr<oracle::Backend> backend = options.backend_factory(t->config);
    rules::RuleSet rs;
    std::string file;
    if (j.kind == "synthesize") {
      rs = run_synthesis(t->config, *backend);
      file = "synthesis.rules";
    } else {
      rs = run_inference(t->config, load_task_data(t->config), *backend);
      file = "inference.rules";
    }
    const std::string path = (fs::path(store.dir(j.task_id)) / file).string();
    rules::save_ruleset(rs, path);
    return {{"rules", rs.rules.size()},
            {"transcribed", rs.active().size()},
            {"ruleset", rules::format_ruleset(rs)},
            {"path", path}};
  }

  void work() {
    for (;;) {
      std::string id;
      Job job;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping)
          return;
        id = queue.front();
        queue.pop_front();
        jobs[id].status = "running";
        job = jobs[id];
        ++running;
      }
      nlohmann::json result;
      std::string error;
      try {
        result = execute(job);
      } catch (const std::exception &e) {
        error = e.what();
      }
      {
        const std::lock_guard lock(mu);
        Job &stored = jobs[id];
        stored.status = error.empty() ? "done" : "failed";
        stored.result = std::move(result);
        stored.error = std::move(error);
        --running;
      }
      cv.notify_all();
    }
  }
};

Service::Service(TaskStore store, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(store), std::move(options))) { }

Service::~Service() = default;

int Service::start(const std::string &host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0)
    throw PipelineError(kExitUsage, "cannot bind " + host + ":" + std::to_string(port));
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void Service::run(const std::string &host, int port) {
  if (!impl_->server.listen(host, port))
    throw PipelineError(kExitUsage, "cannot bind " + host + ":" + std::to_string(port));
}

void Service::stop() { impl_->server.stop(); }

void Service::drain_jobs() {
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait(lock, [&] { return impl_->queue.empty() && impl_->running == 0; });
}

}  // namespace llm4sd::pipeline
