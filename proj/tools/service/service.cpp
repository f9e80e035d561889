#include "service.hpp"

// Eigen first: resolv.h, pulled in by httplib, defines a _res macro.
#include "ibo/inference.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <thread>

#include "ibo/error.hpp"
#include "ibo/inference.hpp"
#include "ibo/report.hpp"
#include "ibo/task.hpp"

namespace ibo::service {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* schema_version = "1";

struct HttpError {
    int status;
    std::string message;
};

json point_json(Point2 p) { return {{"x", p.x}, {"y", p.y}}; }

json geometry_json(const TaskGeometry& g) {
    return {{"task_radius", g.task_radius}, {"click_radius", g.click_radius}, {"center", point_json(g.center)}};
}

json round_json(const Round& r) {
    json j;
    j["schema_version"] = schema_version;
    j["round_id"] = r.id;
    j["round_over"] = r.over();
    json moves = json::array();
    for (std::size_t i = 0; i < r.moves.size(); ++i)
        moves.push_back({{"x", r.moves[i].x}, {"y", r.moves[i].y}, {"reward", r.rewards[i]}});
    j["moves"] = std::move(moves);
    if (r.over()) {
        j["hotspot"] = point_json(r.hotspot);
        j["k"] = r.k;
        j["r0"] = r.r0;
        j["num_moves"] = r.num_moves;
        j["reachable"] = r.reachable;
    }
    return j;
}

// Full state of a live round, hotspot included; only ever written to disk.
json live_round_state(const Round& r) {
    json j;
    j["id"] = r.id;
    j["hotspot"] = point_json(r.hotspot);
    j["k"] = r.k;
    j["r0"] = r.r0;
    j["num_moves"] = r.num_moves;
    j["reachable"] = r.reachable;
    json moves = json::array();
    for (std::size_t i = 0; i < r.moves.size(); ++i) moves.push_back({r.moves[i].x, r.moves[i].y, r.rewards[i]});
    j["moves"] = std::move(moves);
    return j;
}

Round live_round_from(const json& j) {
    Round r;
    r.id = j.at("id").get<int>();
    r.hotspot = {j.at("hotspot").at("x").get<double>(), j.at("hotspot").at("y").get<double>()};
    r.k = j.at("k").get<double>();
    r.r0 = j.at("r0").get<double>();
    r.num_moves = j.at("num_moves").get<int>();
    r.reachable = j.at("reachable").get<bool>();
    for (const auto& m : j.at("moves")) {
        r.moves.push_back({m.at(0).get<double>(), m.at(1).get<double>()});
        r.rewards.push_back(m.at(2).get<double>());
    }
    return r;
}

std::string now_iso() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Session {
    std::string id;
    TaskGeometry geometry;
    std::uint64_t seed = 0;
    std::string created_at;
    std::vector<Round> rounds;
    std::mutex mutex;

    Round* live() { return !rounds.empty() && !rounds.back().over() ? &rounds.back() : nullptr; }
    std::vector<Round> completed() const {
        std::vector<Round> out;
        for (const auto& r : rounds)
            if (r.over()) out.push_back(r);
        return out;
    }
    ObservationSet observations() const { return observations_from_rounds(completed(), id); }
};

struct Job {
    std::string status = "queued";
    std::string session_id;
    Augmentation augmentation = Augmentation::none;
    ObservationSet observations;
    std::string result;
    std::string error;
};

void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        json j = json::parse(req.body);
        if (!j.is_object()) throw HttpError{422, "request body must be a JSON object"};
        return j;
    } catch (const json::parse_error& e) {
        throw HttpError{422, std::string("invalid JSON: ") + e.what()};
    }
}

double number_field(const json& body, const char* key) {
    const auto it = body.find(key);
    if (it == body.end() || !it->is_number()) throw HttpError{422, std::string("field '") + key + "' must be a number"};
    return it->get<double>();
}

}  // namespace

struct Service::Impl {
    ServiceConfig config;
    mutable std::shared_mutex sessions_mutex;
    std::map<std::string, std::shared_ptr<Session>> sessions;
    std::uint64_t next_session = 1;

    std::mutex jobs_mutex;
    std::condition_variable jobs_cv;
    std::map<std::string, std::shared_ptr<Job>> jobs;
    std::deque<std::string> queue;
    std::uint64_t next_job = 1;
    bool stopping = false;
    std::thread worker;

    std::mutex grids_mutex;
    std::map<Augmentation, std::shared_ptr<const CandidateGrid>> grids;

    explicit Impl(ServiceConfig c) : config(std::move(c)) {
        fs::create_directories(sessions_dir());
        load();
        worker = std::thread([this] { run_jobs(); });
    }

    ~Impl() {
        {
            std::lock_guard lock(jobs_mutex);
            stopping = true;
        }
        jobs_cv.notify_all();
        worker.join();
    }

    fs::path sessions_dir() const { return config.data_dir / "sessions"; }

    void load() {
        for (const auto& entry : fs::directory_iterator(sessions_dir())) {
            if (!entry.is_directory()) continue;
            const fs::path meta = entry.path() / "session.json";
            if (!fs::exists(meta)) continue;
            std::ifstream in(meta);
            const json j = json::parse(in);
            auto s = std::make_shared<Session>();
            s->id = j.at("session_id").get<std::string>();
            s->seed = j.at("seed").get<std::uint64_t>();
            s->created_at = j.at("created_at").get<std::string>();
            const auto& g = j.at("geometry");
            s->geometry.task_radius = g.at("task_radius").get<double>();
            s->geometry.click_radius = g.at("click_radius").get<double>();
            s->geometry.center = {g.at("center").at("x").get<double>(), g.at("center").at("y").get<double>()};
            std::ifstream rounds(entry.path() / "rounds.csv");
            if (rounds) s->rounds = read_rounds_csv(rounds);
            if (j.contains("live_round") && !j.at("live_round").is_null())
                s->rounds.push_back(live_round_from(j.at("live_round")));
            if (s->id.size() > 1 && s->id[0] == 's')
                next_session = std::max<std::uint64_t>(next_session, std::stoull(s->id.substr(1)) + 1);
            sessions[s->id] = s;
        }
    }

    void save(Session& s) {
        const fs::path dir = sessions_dir() / s.id;
        fs::create_directories(dir);
        json j;
        j["schema_version"] = schema_version;
        j["session_id"] = s.id;
        j["seed"] = s.seed;
        j["created_at"] = s.created_at;
        j["geometry"] = geometry_json(s.geometry);
        Round* live = s.live();
        j["live_round"] = live ? live_round_state(*live) : json(nullptr);
        std::ostringstream csv;
        write_rounds_csv(csv, s.completed());
        write_atomic(dir / "rounds.csv", csv.str());
        write_atomic(dir / "session.json", j.dump(2));
    }

    std::shared_ptr<Session> find(const std::string& id) const {
        std::shared_lock lock(sessions_mutex);
        const auto it = sessions.find(id);
        if (it == sessions.end()) throw HttpError{404, "unknown session '" + id + "'"};
        return it->second;
    }

    std::shared_ptr<const CandidateGrid> grid(Augmentation a) {
        std::lock_guard lock(grids_mutex);
        auto& g = grids[a];
        if (!g) {
            if (!grids.empty()) {
                for (const auto& [key, existing] : grids)
                    if (existing) {
                        g = std::make_shared<const CandidateGrid>(existing->with_augmentation(a));
                        return g;
                    }
            }
            GridConfig cfg;
            cfg.augmentation = a;
            cfg.coarse_tau = config.coarse_tau;
            g = std::make_shared<const CandidateGrid>(precompute_grid(cfg));
        }
        return g;
    }

    void run_jobs() {
        while (true) {
            std::shared_ptr<Job> job;
            {
                std::unique_lock lock(jobs_mutex);
                jobs_cv.wait(lock, [&] { return stopping || !queue.empty(); });
                if (stopping) return;
                job = jobs.at(queue.front());
                queue.pop_front();
                job->status = "running";
            }
            std::string result, error;
            try {
                const auto fit = posterior(job->observations, grid(job->augmentation));
                result = fit_to_json(fit);
            } catch (const std::exception& e) {
                error = e.what();
            }
            std::lock_guard lock(jobs_mutex);
            job->result = std::move(result);
            job->error = std::move(error);
            job->status = job->error.empty() ? "done" : "failed";
        }
    }

    json create_session(const json& body) {
        auto s = std::make_shared<Session>();
        if (body.contains("seed")) {
            if (!body["seed"].is_number_unsigned()) throw HttpError{422, "seed must be a nonnegative integer"};
            s->seed = body["seed"].get<std::uint64_t>();
        } else {
            s->seed = static_cast<std::uint64_t>(std::chrono::system_clock::now().time_since_epoch().count());
        }
        if (body.contains("task_radius")) s->geometry.task_radius = number_field(body, "task_radius");
        if (body.contains("click_radius")) s->geometry.click_radius = number_field(body, "click_radius");
        try {
            s->geometry.validate();
        } catch (const InvalidArgument& e) {
            throw HttpError{422, e.what()};
        }
        s->created_at = now_iso();
        {
            std::unique_lock lock(sessions_mutex);
            s->id = "s" + std::to_string(next_session++);
            sessions[s->id] = s;
        }
        std::lock_guard lock(s->mutex);
        save(*s);
        return {{"schema_version", schema_version},
                {"session_id", s->id},
                {"seed", s->seed},
                {"created_at", s->created_at},
                {"geometry", geometry_json(s->geometry)}};
    }

    json new_round(const std::string& sid) {
        auto s = find(sid);
        std::lock_guard lock(s->mutex);
        if (s->live()) throw HttpError{409, "a round is already in progress"};
        const int rid = static_cast<int>(s->rounds.size());
        Rng rng = Rng(s->seed).split(static_cast<std::uint64_t>(rid));
        s->rounds.push_back(ibo::new_round(s->geometry, rng, rid));
        save(*s);
        const Round& r = s->rounds.back();
        return {{"schema_version", schema_version},
                {"round_id", rid},
                {"position", point_json(r.moves.front())},
                {"score", r.r0},
                {"round_over", false}};
    }

    json move(const std::string& sid, const std::string& rid_text, const json& body) {
        auto s = find(sid);
        const Point2 target{number_field(body, "x"), number_field(body, "y")};
        std::lock_guard lock(s->mutex);
        Round& r = round_ref(*s, rid_text);
        if (r.over()) throw HttpError{409, "round is over"};
        const auto res = submit_move(r, target, s->geometry);
        r = res.round;
        save(*s);
        return {{"schema_version", schema_version},
                {"round_id", r.id},
                {"move_index", r.moves.size() - 1},
                {"position", point_json(res.outcome.position)},
                {"reward", res.outcome.reward},
                {"delta_r", res.outcome.delta_r},
                {"round_over", res.outcome.round_over}};
    }

    Round& round_ref(Session& s, const std::string& rid_text) {
        std::size_t pos = 0;
        long long rid = -1;
        try {
            rid = std::stoll(rid_text, &pos);
        } catch (...) {
        }
        if (pos != rid_text.size() || rid < 0 || rid >= static_cast<long long>(s.rounds.size()))
            throw HttpError{404, "unknown round '" + rid_text + "'"};
        return s.rounds[static_cast<std::size_t>(rid)];
    }

    json get_round(const std::string& sid, const std::string& rid_text) {
        auto s = find(sid);
        std::lock_guard lock(s->mutex);
        return round_json(round_ref(*s, rid_text));
    }

    json observations(const std::string& sid) {
        auto s = find(sid);
        std::lock_guard lock(s->mutex);
        const auto obs = s->observations();
        json pairs = json::array();
        for (const auto& o : obs.pairs) pairs.push_back({{"delta_r1", o.delta_r1}, {"theta2", o.theta2}});
        return {{"schema_version", schema_version}, {"subject_id", obs.subject_id}, {"n", obs.size()}, {"pairs", pairs}};
    }

    json start_fit(const std::string& sid, const json& body) {
        auto s = find(sid);
        Augmentation a = Augmentation::none;
        if (body.contains("augmentation")) {
            if (!body["augmentation"].is_string()) throw HttpError{422, "augmentation must be a string"};
            try {
                a = parse_augmentation(body["augmentation"].get<std::string>());
            } catch (const InvalidArgument& e) {
                throw HttpError{422, e.what()};
            }
        }
        ObservationSet obs;
        {
            std::lock_guard lock(s->mutex);
            obs = s->observations();
        }
        if (obs.size() < 5)
            throw HttpError{422, "fit needs at least 5 completed unreachable rounds; have " + std::to_string(obs.size())};
        auto job = std::make_shared<Job>();
        job->session_id = sid;
        job->augmentation = a;
        job->observations = std::move(obs);
        std::string id;
        {
            std::lock_guard lock(jobs_mutex);
            id = "j" + std::to_string(next_job++);
            jobs[id] = job;
            queue.push_back(id);
        }
        jobs_cv.notify_one();
        return {{"schema_version", schema_version}, {"job_id", id}, {"status", "queued"}};
    }

    json job_status(const std::string& id) {
        std::lock_guard lock(jobs_mutex);
        const auto it = jobs.find(id);
        if (it == jobs.end()) throw HttpError{404, "unknown job '" + id + "'"};
        const Job& job = *it->second;
        json j{{"schema_version", schema_version}, {"job_id", id}, {"session_id", job.session_id}, {"status", job.status}};
        if (job.status == "done") j["result"] = json::parse(job.result);
        if (job.status == "failed") j["error"] = job.error;
        return j;
    }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Service::~Service() = default;

std::size_t Service::session_count() const {
    std::shared_lock lock(impl_->sessions_mutex);
    return impl_->sessions.size();
}

namespace {

template <class Fn>
httplib::Server::Handler wrap(int ok_status, Fn fn) {
    return [ok_status, fn](const httplib::Request& req, httplib::Response& res) {
        json body;
        int status = ok_status;
        try {
            body = fn(req);
        } catch (const HttpError& e) {
            status = e.status;
            body = {{"schema_version", schema_version}, {"error", e.message}};
        } catch (const MoveAfterRoundOver& e) {
            status = 409;
            body = {{"schema_version", schema_version}, {"error", e.what()}};
        } catch (const InvalidArgument& e) {
            status = 422;
            body = {{"schema_version", schema_version}, {"error", e.what()}};
        } catch (const std::exception& e) {
            status = 500;
            body = {{"schema_version", schema_version}, {"error", e.what()}};
        }
        res.status = status;
        res.set_content(body.dump(), "application/json");
    };
}

}  // namespace

void Service::mount(httplib::Server& server) {
    Impl* d = impl_.get();
    server.Get("/health", wrap(200, [](const httplib::Request&) {
                   return json{{"schema_version", schema_version}, {"status", "ok"}};
               }));
    server.Post("/sessions", wrap(201, [d](const httplib::Request& req) { return d->create_session(parse_body(req)); }));
    server.Post(R"(/sessions/([^/]+)/rounds)",
                wrap(201, [d](const httplib::Request& req) { return d->new_round(req.matches[1]); }));
    server.Post(R"(/sessions/([^/]+)/rounds/([^/]+)/moves)", wrap(200, [d](const httplib::Request& req) {
                    return d->move(req.matches[1], req.matches[2], parse_body(req));
                }));
    server.Get(R"(/sessions/([^/]+)/rounds/([^/]+))",
               wrap(200, [d](const httplib::Request& req) { return d->get_round(req.matches[1], req.matches[2]); }));
    server.Get(R"(/sessions/([^/]+)/observations)",
               wrap(200, [d](const httplib::Request& req) { return d->observations(req.matches[1]); }));
    server.Post(R"(/sessions/([^/]+)/fit)", wrap(202, [d](const httplib::Request& req) {
                    return d->start_fit(req.matches[1], parse_body(req));
                }));
    server.Get(R"(/jobs/([^/]+))", wrap(200, [d](const httplib::Request& req) { return d->job_status(req.matches[1]); }));
}

int serve(const ServiceConfig& config, const std::string& host, int port) {
    Service service(config);
    httplib::Server server;
    service.mount(server);
    if (!server.listen(host, port)) return 1;
    return 0;
}

}  // namespace ibo::service
