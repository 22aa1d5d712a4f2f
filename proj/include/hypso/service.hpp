#pragma once

// HTTP JSON service over the pipeline. Jobs are held in memory (optionally
// mirrored to a directory) and run one at a time on a worker thread in
// submission order.

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "hypso/pipeline.hpp"

namespace hypso {

inline constexpr const char* kApiSchema = "hypso.api/1";

enum class JobStatus { pending, running, done, failed };

inline std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::pending: return "pending";
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "failed";
}

struct TransferJob {
  std::string id;
  ImageInput image;
  DemInput dem;
  TransferConfig config;

  mutable std::mutex mutex;
  JobStatus status = JobStatus::pending;
  std::vector<std::string> history{"pending"};
  std::shared_ptr<const TransferResult> result;  // set iff done
  Json error;                                    // set iff failed

  JobStatus current() const {
    std::lock_guard lock(mutex);
    return status;
  }
};

struct ServiceOptions {
  TransferConfig defaults;
  std::optional<std::filesystem::path> persist_dir;  // manifests and results per job
  std::optional<std::filesystem::path> static_dir;   // served at /
  bool start_paused = false;                         // queue jobs until resume()
};

class Service {
 public:
  explicit Service(ServiceOptions options = {}) : options_(std::move(options)), paused_(options_.start_paused) {
    routes();
    worker_ = std::thread([this] { work(); });
  }

  ~Service() {
    stop();
    {
      std::lock_guard lock(queue_mutex_);
      quit_ = true;
    }
    queue_cv_.notify_all();
    if (worker_.joinable()) worker_.join();
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds to `port` (0 picks a free one) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) detail::fail(Errc::io_error, "cannot bind " + host + ":" + std::to_string(port));
    listener_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return bound;
  }

  // Blocking variant for the CLI.
  void listen(const std::string& host, int port) {
    if (!server_.listen(host, port)) detail::fail(Errc::io_error, "cannot listen on " + host + ":" + std::to_string(port));
  }

  void stop() {
    if (server_.is_running()) server_.stop();
    if (listener_.joinable()) listener_.join();
  }

  void resume() {
    {
      std::lock_guard lock(queue_mutex_);
      paused_ = false;
    }
    queue_cv_.notify_all();
  }

  // Blocks until the queue is empty and no job is running.
  void drain() {
    std::unique_lock lock(queue_mutex_);
    idle_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
  }

  std::shared_ptr<TransferJob> submit(ImageInput image, DemInput dem, TransferConfig config) {
    validate(config);
    auto job = std::make_shared<TransferJob>();
    job->image = std::move(image);
    job->dem = std::move(dem);
    job->config = std::move(config);
    {
      std::lock_guard lock(jobs_mutex_);
      job->id = "job-" + std::to_string(++next_id_);
      jobs_[job->id] = job;
    }
    {
      std::lock_guard lock(queue_mutex_);
      queue_.push_back(job);
    }
    queue_cv_.notify_all();
    return job;
  }

  std::shared_ptr<TransferJob> find(const std::string& id) const {
    std::lock_guard lock(jobs_mutex_);
    auto it = jobs_.find(id);
    return it == jobs_.end() ? nullptr : it->second;
  }

  httplib::Server& server() { return server_; }

 private:
  static void send_json(httplib::Response& res, int status, Json body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, const std::string& message, const std::string& stage = "") {
    Json body = {{"schema", kApiSchema}, {"error", message}};
    if (!stage.empty()) body["stage"] = stage;
    send_json(res, status, std::move(body));
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& body) {
    try {
      body();
    } catch (const StageError& e) {
      send_error(res, e.bad_input() ? 400 : 500, e.what(), e.stage());
    } catch (const Error& e) {
      const bool internal = e.code() == Errc::io_error;
      send_error(res, internal ? 500 : 400, e.what(), internal ? "internal" : "");
    } catch (const Json::exception& e) {
      send_error(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what(), "internal");
    }
  }

  static Bytes field_bytes(const httplib::Request& req, const std::string& key) {
    const auto f = req.get_file_value(key);
    return Bytes(f.content.begin(), f.content.end());
  }

  static std::optional<long> int_param(const httplib::Request& req, const std::string& key) {
    if (!req.has_param(key)) return std::nullopt;
    const std::string v = req.get_param_value(key);
    long out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || end != v.data() + v.size()) detail::fail(Errc::invalid_argument, key + " must be an integer");
    return out;
  }

  // Resolves a finished job and a solution index, or writes the error response.
  struct Selection {
    std::shared_ptr<const TransferResult> result;
    Candidate solution;
  };

  std::optional<Selection> select(const httplib::Request& req, httplib::Response& res) const {
    const auto job = find(req.path_params.at("id"));
    if (!job) {
      send_error(res, 404, "unknown job");
      return std::nullopt;
    }
    std::shared_ptr<const TransferResult> result;
    {
      std::lock_guard lock(job->mutex);
      result = job->result;
    }
    if (!result) {
      send_error(res, 409, "job is not done");
      return std::nullopt;
    }
    const auto front = sorted_front(result->archive);
    const long idx = int_param(req, "solution").value_or(static_cast<long>(midpoint_index(front.size())));
    if (idx < 0 || static_cast<std::size_t>(idx) >= front.size()) {
      send_error(res, 404, "unknown solution");
      return std::nullopt;
    }
    return Selection{result, front[static_cast<std::size_t>(idx)]};
  }

  static Json job_document(const TransferJob& job) {
    std::lock_guard lock(job.mutex);
    Json doc = {{"schema", kApiSchema}, {"id", job.id}, {"status", to_string(job.status)}, {"history", job.history}};
    if (job.result) {
      doc["pareto"] = pareto_to_json(job.result->archive);
      doc["dominants"] = grid_to_json(job.result->analysis.grid, job.result->analysis.profile)["dominants"];
      doc["zones"] = zone_report_to_json(job.result->zones, job.result->areas);
      doc["manifest"] = job.result->manifest.document;
      if (!job.result->archive.notices.empty()) doc["notices"] = job.result->archive.notices;
    }
    if (!job.error.is_null()) doc["error"] = job.error;
    return doc;
  }

  void routes() {
    server_.set_payload_max_length(64u << 20);

    server_.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"schema", kApiSchema}, {"status", "ok"}, {"version", kVersion}});
    });

    server_.Post("/api/analyze", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!req.has_file("image")) detail::fail(Errc::invalid_argument, "multipart field 'image' is required");
        TransferConfig cfg = options_.defaults;
        if (req.has_file("params")) cfg = config_from_json(Json::parse(req.get_file_value("params").content), cfg);
        const auto img = req.get_file_value("image");
        const auto a = analyze_image({field_bytes(req, "image"), img.filename}, cfg.analysis);
        Json doc = grid_to_json(a.grid, a.profile);
        doc["schema"] = kApiSchema;
        send_json(res, 200, std::move(doc));
      });
    });

    server_.Post("/api/jobs", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!req.has_file("image") || !req.has_file("dem"))
          detail::fail(Errc::invalid_argument, "multipart fields 'image' and 'dem' are required");
        TransferConfig cfg = options_.defaults;
        if (req.has_file("params")) cfg = config_from_json(Json::parse(req.get_file_value("params").content), cfg);
        ImageInput image{field_bytes(req, "image"), req.get_file_value("image").filename};
        DemInput dem{field_bytes(req, "dem"), req.get_file_value("dem").filename, std::nullopt};
        if (dem.name.empty()) dem.name = "dem.asc";
        if (req.has_file("dem_sidecar")) dem.sidecar = field_bytes(req, "dem_sidecar");
        const auto job = submit(std::move(image), std::move(dem), std::move(cfg));
        send_json(res, 202, {{"schema", kApiSchema}, {"id", job->id}});
      });
    });

    server_.Get("/api/jobs/:id", [this](const httplib::Request& req, httplib::Response& res) {
      const auto job = find(req.path_params.at("id"));
      if (!job) return send_error(res, 404, "unknown job");
      send_json(res, 200, job_document(*job));
    });

    server_.Get("/api/jobs/:id/render", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto width = int_param(req, "width");
        if (width && (*width < 1 || *width > 4096)) detail::fail(Errc::invalid_argument, "width must be in [1, 4096]");
        const auto sel = select(req, res);
        if (!sel) return;
        const auto& r = *sel->result;
        Pixels8 px = to_pixels(render_scheme(r.dem, r.zones, sel->solution.scheme, job_config(req)));
        if (width) px = resize_to_width(px, static_cast<int>(*width));
        res.status = 200;
        const Bytes png = encode_png(px);
        res.set_content(std::string(png.begin(), png.end()), "image/png");
      });
    });

    server_.Get("/api/jobs/:id/scheme", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto sel = select(req, res);
        if (!sel) return;
        send_json(res, 200, scheme_document(sel->solution));
      });
    });

    if (options_.static_dir) server_.set_mount_point("/", options_.static_dir->string());
  }

  TransferConfig job_config(const httplib::Request& req) const {
    const auto job = find(req.path_params.at("id"));
    return job ? job->config : options_.defaults;
  }

  void run(TransferJob& job) {
    {
      std::lock_guard lock(job.mutex);
      job.status = JobStatus::running;
      job.history.emplace_back("running");
    }
    std::shared_ptr<const TransferResult> result;
    Json error;
    try {
      result = std::make_shared<const TransferResult>(run_transfer(job.image, job.dem, job.config));
      persist(job, *result);
    } catch (const StageError& e) {
      error = {{"stage", e.stage()}, {"message", e.what()}, {"bad_input", e.bad_input()}};
    } catch (const std::exception& e) {
      error = {{"stage", "internal"}, {"message", e.what()}, {"bad_input", false}};
    }
    std::lock_guard lock(job.mutex);
    job.result = std::move(result);
    job.error = std::move(error);
    job.status = job.result ? JobStatus::done : JobStatus::failed;
    job.history.emplace_back(to_string(job.status));
  }

  void persist(const TransferJob& job, const TransferResult& r) const {
    if (!options_.persist_dir) return;
    const auto dir = *options_.persist_dir / job.id;
    std::filesystem::create_directories(dir);
    auto put = [&](const char* name, const std::string& text) { write_file(dir / name, Bytes(text.begin(), text.end())); };
    put("manifest.json", r.manifest.dump());
    put("pareto.json", pareto_to_json(r.archive).dump(2));
    put("zones.json", zone_report_to_json(r.zones, r.areas).dump(2));
  }

  void work() {
    for (;;) {
      std::shared_ptr<TransferJob> job;
      {
        std::unique_lock lock(queue_mutex_);
        queue_cv_.wait(lock, [this] { return quit_ || (!paused_ && !queue_.empty()); });
        if (quit_) return;
        job = queue_.front();
        queue_.pop_front();
        busy_ = true;
      }
      run(*job);
      {
        std::lock_guard lock(queue_mutex_);
        busy_ = false;
      }
      idle_cv_.notify_all();
    }
  }

  ServiceOptions options_;
  httplib::Server server_;
  std::thread listener_;

  mutable std::mutex jobs_mutex_;
  std::map<std::string, std::shared_ptr<TransferJob>> jobs_;
  std::uint64_t next_id_ = 0;

  std::mutex queue_mutex_;
  std::condition_variable queue_cv_, idle_cv_;
  std::deque<std::shared_ptr<TransferJob>> queue_;
  bool paused_ = false;
  bool busy_ = false;
  bool quit_ = false;
  std::thread worker_;
};

}  // namespace hypso
