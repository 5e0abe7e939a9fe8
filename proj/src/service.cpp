#include "coop/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <future>
#include <sstream>

#include "coop/interdependence.hpp"
#include "coop/version.hpp"

namespace coop {

using io::json;

namespace {

Service::Response error_response(int status, const std::string& code, const std::string& message,
                                 json details = json::array()) {
    return {status, json{{"code", code}, {"message", message}, {"details", std::move(details)}}};
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string item;
    while (std::getline(ss, item, '/')) {
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

json body_json(const std::string& body) {
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
    return io::parse_json_text(body);
}

// Maps engine exceptions onto the error document.
template <class F>
Service::Response guarded(F&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        json details = json::array();
        if (e.line() > 0) details.push_back({{"line", e.line()}, {"column", e.column()}});
        return error_response(400, "parse_error", e.what(), details);
    } catch (const ValidationError& e) {
        return error_response(422, "validation_failed", "scenario or request failed validation",
                              io::to_json(e.violations()));
    } catch (const NotFound& e) {
        return error_response(404, "not_found", e.what());
    } catch (const SizeError& e) {
        return error_response(422, "size_exceeded", e.what());
    } catch (const DomainError& e) {
        return error_response(422, "domain_error", e.what());
    } catch (const LookupError& e) {
        return error_response(422, "lookup_error", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "internal_error", e.what());
    }
}

}  // namespace

std::string to_string(JobState s) {
    switch (s) {
        case JobState::queued: return "queued";
        case JobState::running: return "running";
        case JobState::done: return "done";
        case JobState::failed: return "failed";
    }
    return "queued";
}

json to_json(const JobRecord& job) {
    json j = {{"job_id", job.job_id},
              {"kind", job.kind},
              {"state", to_string(job.state)},
              {"progress", {{"completed", job.completed}, {"total", job.total}}}};
    j["result_id"] = job.result_id ? json(*job.result_id) : json(nullptr);
    if (job.error) j["error"] = *job.error;
    return j;
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
    try {
        store_ = std::make_unique<ArtifactStore>(options_.store_root);
    } catch (const std::exception& e) {
        store_error_ = e.what();
        spdlog::error("artifact store unavailable: {}", store_error_);
    }
    runner_ = std::jthread([this](std::stop_token st) { run_jobs(st); });
}

Service::~Service() {
    runner_.request_stop();
    jobs_cv_.notify_all();
}

Service::Response Service::handle(const std::string& method, const std::string& path, const std::string& body) {
    const auto parts = split_path(path);
    const std::size_t n = parts.size();
    auto is = [&](std::size_t k, const char* s) { return k < n && parts[k] == s; };

    if (method == "GET" && n == 1 && is(0, "health")) return health();
    if (!store_ && !(n == 1 && is(0, "health"))) {
        return error_response(500, "store_unavailable", "artifact store unavailable: " + store_error_);
    }

    if (is(0, "scenarios")) {
        if (n == 1 && method == "POST") return post_scenario(body);
        if (n == 1 && method == "GET") return list_scenarios();
        if (n == 2 && method == "GET") return get_scenario(parts[1]);
        if (n == 3 && method == "POST") {
            const std::string& id = parts[1];
            if (parts[2] == "matrix") return matrix(id);
            if (parts[2] == "equilibrium") return equilibrium(id, body);
            if (parts[2] == "sweep") return sweep(id, body);
            if (parts[2] == "counterfactual") return counterfactual(id, body);
            if (parts[2] == "score") return score(id, body);
        }
    }
    if (method == "GET" && n == 2 && is(0, "jobs")) return job(parts[1]);
    if (method == "GET" && n == 2 && is(0, "results")) return result(parts[1]);
    return error_response(404, "not_found", "no route for " + method + " " + path);
}

Service::Response Service::health() const {
    if (!store_ || !store_->healthy()) {
        return error_response(500, "store_unavailable",
                              store_error_.empty() ? "artifact store is not writable" : store_error_);
    }
    return {200, json{{"status", "ok"}, {"version", kVersion}}};
}

Scenario Service::stored_scenario(const std::string& id) const {
    auto a = store_->try_fetch(id);
    if (!a || a->kind != ArtifactKind::scenario) throw NotFound("no scenario with id '" + id + "'");
    return io::scenario_from_json(a->payload);
}

Service::Response Service::post_scenario(const std::string& body) {
    return guarded([&]() -> Response {
        const Scenario s = io::scenario_from_json(body_json(body));
        if (auto v = validate_scenario(s); !v.empty()) throw ValidationError(std::move(v));
        const auto put = store_->put(ArtifactKind::scenario, io::to_json(s));
        spdlog::info("scenario {} {}", put.id, put.created ? "created" : "already stored");
        return {put.created ? 201 : 200, json{{"id", put.id}, {"created", put.created}}};
    });
}

Service::Response Service::get_scenario(const std::string& id) const {
    return guarded([&]() -> Response { return {200, io::to_json(stored_scenario(id))}; });
}

Service::Response Service::list_scenarios() const {
    return guarded([&]() -> Response {
        json arr = json::array();
        for (const auto& e : store_->list(ArtifactKind::scenario)) {
            arr.push_back({{"id", e.id}, {"created_at", e.created_at}});
        }
        return {200, json{{"schema_version", io::kSchemaVersion}, {"scenarios", arr}}};
    });
}

Service::Response Service::matrix(const std::string& id) const {
    return guarded([&]() -> Response {
        const Scenario s = stored_scenario(id);
        const InterdependenceMatrix D = effective_matrix(s);
        return {200, json{{"schema_version", io::kSchemaVersion},
                          {"matrix", io::to_json(D)},
                          {"source", s.matrix_override ? "override" : "network"},
                          {"asymmetry", io::to_json(asymmetry_report(D))}}};
    });
}

Service::Response Service::equilibrium(const std::string& id, const std::string& body) {
    return guarded([&]() -> Response {
        Scenario s = stored_scenario(id);
        json req = body_json(body);
        if (!req.is_object()) throw ParseError("request body must be a JSON object");
        json settings_part = json::object();
        for (const auto& [key, value] : req.items()) {
            if (key == "mode") {
                if (!value.is_string()) throw ParseError("mode must be a string");
                try {
                    s.appropriation_mode = appropriation_mode_from_string(value.get<std::string>());
                } catch (const DomainError& e) {
                    throw ParseError(e.what());
                }
            } else if (key == "matrix_override") {
                s.matrix_override = io::matrix_from_json(value);
            } else if (key == "zero_interdependence") {
                if (!value.is_boolean()) throw ParseError("zero_interdependence must be a boolean");
                if (value.get<bool>()) s = with_zero_interdependence(s);
            } else {
                settings_part[key] = value;
            }
        }
        const SolveSettings settings = io::settings_from_json(settings_part, options_.default_settings);
        settings.validate();
        const Game game = make_game(s);

        auto task = std::make_shared<std::packaged_task<EquilibriumResult()>>(
            [game, settings] { return solve(game, settings); });
        auto fut = task->get_future();
        std::thread([task] { (*task)(); }).detach();
        const auto budget = std::chrono::duration<double>(options_.request_budget_seconds);
        if (fut.wait_for(budget) == std::future_status::timeout) {
            return error_response(503, "budget_exceeded", "solve did not finish within the request budget");
        }
        const EquilibriumResult r = fut.get();

        json doc = io::to_json(r);
        doc["appropriation_mode"] = to_string(s.appropriation_mode);
        doc["scenario_id"] = id;
        const auto put = store_->put(ArtifactKind::equilibrium, doc);
        doc["result_id"] = put.id;
        return {200, doc};
    });
}

Service::Response Service::sweep(const std::string& id, const std::string& body) {
    return guarded([&]() -> Response {
        const Scenario s = stored_scenario(id);
        const json req = body_json(body);
        if (!req.is_object()) throw ParseError("request body must be a JSON object");
        for (const auto& [key, _] : req.items()) {
            if (key != "axes" && key != "settings" && key != "cap") throw ParseError("unknown key '" + key + "' in sweep request");
        }
        SweepSpec spec;
        spec.base = s;
        spec.settings = options_.default_settings;
        spec.cap = options_.grid_cap;
        if (!req.contains("axes") || !req["axes"].is_array()) throw ParseError("sweep request needs an 'axes' array");
        for (const auto& a : req["axes"]) spec.axes.push_back(io::axis_from_json(a));
        if (req.contains("settings")) spec.settings = io::settings_from_json(req["settings"], spec.settings);
        if (req.contains("cap")) {
            if (!req["cap"].is_number_unsigned()) throw ParseError("cap must be a nonnegative integer");
            spec.cap = std::min<std::size_t>(spec.cap, req["cap"].get<std::size_t>());
        }
        const std::size_t total = check_sweep(spec);  // cap and validation errors surface before queueing

        std::lock_guard lock(jobs_mutex_);
        std::ostringstream jid;
        jid << "job-" << next_job_++;
        JobRecord rec;
        rec.job_id = jid.str();
        rec.total = total;
        jobs_[rec.job_id] = rec;
        queue_.push_back({rec.job_id, std::move(spec)});
        jobs_cv_.notify_all();
        spdlog::info("queued {} ({} grid points)", rec.job_id, total);
        return {202, json{{"job_id", rec.job_id}}};
    });
}

void Service::run_jobs(std::stop_token stop) {
    while (!stop.stop_requested()) {
        PendingJob pending;
        {
            std::unique_lock lock(jobs_mutex_);
            jobs_cv_.wait(lock, stop, [&] { return !queue_.empty(); });
            if (stop.stop_requested()) return;
            pending = std::move(queue_.front());
            queue_.pop_front();
            jobs_[pending.job_id].state = JobState::running;
            busy_ = true;
        }
        const std::string job_id = pending.job_id;
        try {
            const SweepResult result = run_sweep(pending.spec, [&](std::size_t done, std::size_t total) {
                std::lock_guard lock(jobs_mutex_);
                auto& rec = jobs_[job_id];
                rec.completed = done;
                rec.total = total;
            });
            const auto put = store_->put(ArtifactKind::sweep, io::to_json(result));
            std::lock_guard lock(jobs_mutex_);
            auto& rec = jobs_[job_id];
            rec.completed = rec.total;
            rec.result_id = put.id;
            rec.state = JobState::done;
            spdlog::info("{} done -> {}", job_id, put.id);
        } catch (const std::exception& e) {
            std::lock_guard lock(jobs_mutex_);
            auto& rec = jobs_[job_id];
            rec.state = JobState::failed;
            rec.error = e.what();
            spdlog::warn("{} failed: {}", job_id, e.what());
        }
        {
            std::lock_guard lock(jobs_mutex_);
            busy_ = false;
        }
        jobs_cv_.notify_all();
    }
}

void Service::drain() {
    std::unique_lock lock(jobs_mutex_);
    jobs_cv_.wait(lock, [&] { return queue_.empty() && !busy_; });
}

Service::Response Service::job(const std::string& id) const {
    std::lock_guard lock(jobs_mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return error_response(404, "not_found", "no job with id '" + id + "'");
    return {200, to_json(it->second)};
}

Service::Response Service::result(const std::string& id) const {
    return guarded([&]() -> Response {
        const StoredArtifact a = store_->fetch(id);
        return {200, json{{"id", a.id}, {"kind", to_string(a.kind)}, {"created_at", a.created_at}, {"payload", a.payload}}};
    });
}

Service::Response Service::counterfactual(const std::string& id, const std::string& body) {
    return guarded([&]() -> Response {
        const Scenario s = stored_scenario(id);
        const CounterfactualEdit edit = io::edit_from_json(body_json(body));
        if (auto v = validate_edit(s, edit); !v.empty()) throw ValidationError(std::move(v));
        json doc = io::to_json(run_counterfactual(s, edit, options_.default_settings));
        doc["scenario_id"] = id;
        doc["edit"] = io::to_json(edit);
        const auto put = store_->put(ArtifactKind::counterfactual, doc);
        doc["result_id"] = put.id;
        return {200, doc};
    });
}

Service::Response Service::score(const std::string& id, const std::string& body) {
    return guarded([&]() -> Response {
        const Scenario s = stored_scenario(id);
        const json req = body_json(body);
        if (!req.is_object()) throw ParseError("request body must be a JSON object");
        ValidationRubric rubric;
        std::optional<CounterfactualEdit> edit;
        if (req.contains("rubric") || req.contains("edits")) {
            for (const auto& [key, _] : req.items()) {
                if (key != "rubric" && key != "edits") throw ParseError("unknown key '" + key + "' in score request");
            }
            if (req.contains("rubric")) rubric = io::rubric_from_json(req["rubric"]);
            if (req.contains("edits")) edit = io::edit_from_json(req["edits"]);
        } else {
            rubric = io::rubric_from_json(req);
        }
        try {
            rubric.validate();
        } catch (const DomainError& e) {
            return error_response(422, "invalid_rubric", e.what());
        }
        if (edit) {
            if (auto v = validate_edit(s, *edit); !v.empty()) throw ValidationError(std::move(v));
        }
        json doc = io::to_json(score_scenario(s, rubric, options_.default_settings, edit));
        doc["scenario_id"] = id;
        doc["rubric"] = io::to_json(rubric);
        const auto put = store_->put(ArtifactKind::score, doc);
        doc["result_id"] = put.id;
        return {200, doc};
    });
}

void Service::bind(httplib::Server& server) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        const Response r = handle(req.method, req.path, req.body);
        spdlog::debug("{} {} -> {}", req.method, req.path, r.status);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

namespace {
std::mutex g_server_mutex;
httplib::Server* g_server = nullptr;
}  // namespace

bool serve(Service& service, const std::string& host, int port) {
    httplib::Server server;
    service.bind(server);
    {
        std::lock_guard lock(g_server_mutex);
        g_server = &server;
    }
    spdlog::info("listening on {}:{}", host, port);
    const bool ok = server.listen(host, port);
    {
        std::lock_guard lock(g_server_mutex);
        g_server = nullptr;
    }
    service.drain();
    return ok;
}

void stop_serving() {
    std::lock_guard lock(g_server_mutex);
    if (g_server) g_server->stop();
}

}  // namespace coop
