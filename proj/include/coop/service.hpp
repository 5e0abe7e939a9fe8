#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "coop/experiments.hpp"
#include "coop/serialization.hpp"
#include "coop/store.hpp"

namespace httplib {
class Server;
}

namespace coop {

enum class JobState { queued, running, done, failed };

std::string to_string(JobState s);

struct JobRecord {
    std::string job_id;
    std::string kind = "sweep";
    JobState state = JobState::queued;
    std::size_t completed = 0;
    std::size_t total = 0;
    std::optional<std::string> result_id;
    std::optional<std::string> error;
};

io::json to_json(const JobRecord& job);

struct ServiceOptions {
    std::filesystem::path store_root;
    SolveSettings default_settings;
    std::size_t grid_cap = kDefaultGridCap;
    double request_budget_seconds = 30.0;  // synchronous endpoints
};

/// HTTP facade over the engine. Routing lives in `handle` so the same logic
/// can be exercised in-process; `bind` attaches it to an httplib server.
class Service {
public:
    struct Response {
        int status = 200;
        io::json body;
    };

    explicit Service(ServiceOptions options);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    Response handle(const std::string& method, const std::string& path, const std::string& body);

    void bind(httplib::Server& server);

    /// Blocks until every queued sweep job has finished. For tests and shutdown.
    void drain();

    ArtifactStore& store() { return *store_; }

private:
    struct PendingJob {
        std::string job_id;
        SweepSpec spec;
    };

    Response health() const;
    Response post_scenario(const std::string& body);
    Response get_scenario(const std::string& id) const;
    Response list_scenarios() const;
    Response matrix(const std::string& id) const;
    Response equilibrium(const std::string& id, const std::string& body);
    Response sweep(const std::string& id, const std::string& body);
    Response job(const std::string& id) const;
    Response result(const std::string& id) const;
    Response counterfactual(const std::string& id, const std::string& body);
    Response score(const std::string& id, const std::string& body);

    Scenario stored_scenario(const std::string& id) const;
    void run_jobs(std::stop_token stop);

    ServiceOptions options_;
    std::unique_ptr<ArtifactStore> store_;
    std::string store_error_;

    mutable std::mutex jobs_mutex_;
    std::condition_variable_any jobs_cv_;
    std::map<std::string, JobRecord> jobs_;
    std::deque<PendingJob> queue_;
    std::size_t next_job_ = 1;
    bool busy_ = false;
    std::jthread runner_;
};

/// Runs the HTTP server until it is stopped (SIGINT/SIGTERM from `coopctl serve`).
/// Returns false if the socket could not be bound.
bool serve(Service& service, const std::string& host, int port);

/// Stops a server started by `serve` in this process.
void stop_serving();

}  // namespace coop
