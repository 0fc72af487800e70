#include "arl/elicitation.hpp"

#include <algorithm>
#include <chrono>

#include <httplib.h>

namespace arl {

namespace {

using Clock = std::chrono::steady_clock;

Clock::duration seconds(double s) {
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(s));
}

}  // namespace

std::string_view status_name(QueryStatus s) {
  switch (s) {
    case QueryStatus::Pending:
      return "pending";
    case QueryStatus::Answered:
      return "answered";
    case QueryStatus::Skipped:
      return "skipped";
  }
  return "?";
}

NonAttackingPair::NonAttackingPair(IdPair pair)
    : Error("pair (" + std::to_string(pair.first) + ", " + std::to_string(pair.second) + ") is not an attacking pair"),
      pair_(pair) {}

QueryConflict::QueryConflict(int query_id, bool known)
    : Error(known ? "query " + std::to_string(query_id) + " is already resolved"
                  : "unknown query " + std::to_string(query_id)),
      query_id_(query_id),
      known_(known) {}

Session::Session(MazeEnv env, const TrajectoryStore& store, const Aaf& aaf, std::filesystem::path log_path)
    : env_(std::move(env)), store_(store), aaf_(aaf) {
  if (!log_path.empty()) log_ = std::make_unique<LabelLog>(std::move(log_path));
}

std::vector<Query> Session::enqueue(const std::vector<IdPair>& pairs) {
  for (const auto& p : pairs)
    if (!aaf_.has_argument(p.first) || !aaf_.has_argument(p.second) || !aaf_.attacks(p.first, p.second))
      throw NonAttackingPair(p);
  std::vector<Query> added;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [a, b] : pairs) {
      Query q{static_cast<int>(queries_.size()), a, b, QueryStatus::Pending, std::nullopt};
      queries_.push_back(q);
      added.push_back(q);
    }
  }
  changed_.notify_all();
  return added;
}

std::optional<Query> Session::next_query() const {
  std::lock_guard lock(mutex_);
  for (const auto& q : queries_)
    if (q.status == QueryStatus::Pending) return q;
  return std::nullopt;
}

Query& Session::find(int query_id) {
  if (query_id < 0 || query_id >= static_cast<int>(queries_.size())) throw QueryConflict(query_id, false);
  return queries_[static_cast<std::size_t>(query_id)];
}

void Session::resolve(Query& q, Choice choice, const std::string& ts) {
  q.choice = choice;
  q.status = choice == Choice::Skip ? QueryStatus::Skipped : QueryStatus::Answered;
  if (choice == Choice::Skip) return;
  PreferenceRecord r;
  r.winner = choice == Choice::Left ? q.left : q.right;
  r.loser = choice == Choice::Left ? q.right : q.left;
  r.source = LabelSource::Human;
  r.query_id = q.query_id;
  r.timestamp = ts;
  records_.push_back(r);
}

std::optional<PreferenceRecord> Session::submit_label(int query_id, Choice choice) {
  std::optional<PreferenceRecord> out;
  {
    std::lock_guard lock(mutex_);
    Query& q = find(query_id);
    if (q.status != QueryStatus::Pending) throw QueryConflict(query_id, true);
    const LabelLogEntry entry{q.query_id, q.left, q.right, choice, LabelSource::Human, utc_timestamp()};
    if (log_) log_->append(entry);
    resolve(q, choice, entry.ts);
    if (choice != Choice::Skip) out = records_.back();
  }
  changed_.notify_all();
  return out;
}

std::size_t Session::replay(const std::vector<LabelLogEntry>& entries) {
  std::size_t applied = 0;
  {
    std::lock_guard lock(mutex_);
    for (const auto& e : entries) {
      if (e.query_id < 0 || e.query_id >= static_cast<int>(queries_.size())) continue;
      Query& q = queries_[static_cast<std::size_t>(e.query_id)];
      if (q.status != QueryStatus::Pending || q.left != e.left || q.right != e.right) continue;
      resolve(q, e.choice, e.ts);
      ++applied;
    }
  }
  changed_.notify_all();
  return applied;
}

std::optional<Query> Session::wait_for(int query_id, double timeout_seconds) const {
  std::unique_lock lock(mutex_);
  if (query_id < 0 || query_id >= static_cast<int>(queries_.size())) throw QueryConflict(query_id, false);
  const auto& q = queries_[static_cast<std::size_t>(query_id)];
  const bool done = changed_.wait_for(lock, seconds(timeout_seconds),
                                      [&] { return closed_ || q.status != QueryStatus::Pending; });
  if (!done || q.status == QueryStatus::Pending) return std::nullopt;
  return q;
}

bool Session::wait_until_drained(double timeout_seconds) const {
  std::unique_lock lock(mutex_);
  auto drained = [&] {
    return std::none_of(queries_.begin(), queries_.end(),
                        [](const Query& q) { return q.status == QueryStatus::Pending; });
  };
  changed_.wait_for(lock, seconds(timeout_seconds), [&] { return closed_ || drained(); });
  return drained();
}

void Session::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  changed_.notify_all();
}

Query Session::query(int query_id) const {
  std::lock_guard lock(mutex_);
  if (query_id < 0 || query_id >= static_cast<int>(queries_.size())) throw QueryConflict(query_id, false);
  return queries_[static_cast<std::size_t>(query_id)];
}

std::vector<Query> Session::queries() const {
  std::lock_guard lock(mutex_);
  return queries_;
}

std::vector<PreferenceRecord> Session::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t Session::count(QueryStatus s) const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(
      std::count_if(queries_.begin(), queries_.end(), [s](const Query& q) { return q.status == s; }));
}

nlohmann::json Session::summary_json() const {
  return {{"maze", env_.to_json()},
          {"pending", count(QueryStatus::Pending)},
          {"answered", count(QueryStatus::Answered)},
          {"skipped", count(QueryStatus::Skipped)}};
}

nlohmann::json Session::query_json(const Query& q) const {
  return {{"query_id", q.query_id},
          {"left", trajectory_to_json(store_.at(q.left))},
          {"right", trajectory_to_json(store_.at(q.right))}};
}

struct ElicitationServer::Impl {
  httplib::Server server;
};

ElicitationServer::ElicitationServer(Session& session, int port, std::string ui_dir)
    : impl_(std::make_unique<Impl>()), port_(port) {
  auto& srv = impl_->server;
  auto send_json = [](httplib::Response& res, const nlohmann::json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  };
  srv.Get("/api/session", [&session, send_json](const httplib::Request&, httplib::Response& res) {
    send_json(res, session.summary_json());
  });
  srv.Get("/api/maze", [&session, send_json](const httplib::Request&, httplib::Response& res) {
    send_json(res, session.env().to_json());
  });
  srv.Get("/api/query/next", [&session, send_json](const httplib::Request&, httplib::Response& res) {
    if (auto q = session.next_query()) {
      send_json(res, session.query_json(*q));
    } else {
      res.status = 204;
    }
  });
  srv.Post("/api/label", [&session, send_json](const httplib::Request& req, httplib::Response& res) {
    int query_id = 0;
    Choice choice = Choice::Skip;
    try {
      const auto body = nlohmann::json::parse(req.body);
      query_id = body.at("query_id").get<int>();
      choice = choice_from_name(body.at("choice").get<std::string>());
    } catch (const std::exception& e) {
      send_json(res, {{"error", e.what()}}, 400);
      return;
    }
    try {
      const auto rec = session.submit_label(query_id, choice);
      send_json(res, {{"recorded", rec.has_value()}});
    } catch (const QueryConflict& e) {
      send_json(res, {{"error", e.what()}}, e.known() ? 409 : 404);
    }
  });
  if (!ui_dir.empty() && !srv.set_mount_point("/", ui_dir)) throw Error("cannot serve UI directory " + ui_dir);
}

ElicitationServer::~ElicitationServer() { stop(); }

void ElicitationServer::start() {
  auto& srv = impl_->server;
  if (port_ == 0) {
    port_ = srv.bind_to_any_port("127.0.0.1");
    if (port_ < 0) throw Error("cannot bind the elicitation service");
  } else if (!srv.bind_to_port("127.0.0.1", port_)) {
    throw Error("cannot bind the elicitation service to port " + std::to_string(port_));
  }
  thread_ = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
}

void ElicitationServer::run() {
  if (!impl_->server.listen("127.0.0.1", port_))
    throw Error("cannot serve on port " + std::to_string(port_));
}

void ElicitationServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

int run_auto_labeler(const std::string& host, int port, const PairLabeler& labeler, const std::atomic<bool>& stop,
                     double poll_seconds) {
  httplib::Client cli(host, port);
  cli.set_connection_timeout(1);
  int accepted = 0;
  while (!stop.load()) {
    auto res = cli.Get("/api/query/next");
    if (!res || res->status != 200) {
      std::this_thread::sleep_for(seconds(poll_seconds));
      continue;
    }
    const auto q = nlohmann::json::parse(res->body);
    const Choice c = labeler(q.at("left").at("id").get<int>(), q.at("right").at("id").get<int>());
    const nlohmann::json body{{"query_id", q.at("query_id")}, {"choice", std::string(choice_name(c))}};
    auto posted = cli.Post("/api/label", body.dump(), "application/json");
    if (posted && posted->status == 200) ++accepted;
  }
  return accepted;
}

LabelingService::LabelingService(MazeEnv env, const TrajectoryStore& store, const Aaf& aaf,
                                 std::filesystem::path log_path, int port, double timeout_seconds,
                                 std::string ui_dir, std::optional<PairLabeler> auto_labeler)
    : prior_(std::filesystem::exists(log_path) ? LabelLog::read(log_path) : std::vector<LabelLogEntry>{}),
      session_(std::move(env), store, aaf, std::move(log_path)),
      server_(session_, port, std::move(ui_dir)),
      timeout_seconds_(timeout_seconds) {
  server_.start();
  if (auto_labeler)
    auto_thread_ = std::thread([this, labeler = std::move(*auto_labeler)] {
      run_auto_labeler("127.0.0.1", server_.port(), labeler, stop_);
    });
}

LabelingService::~LabelingService() {
  stop_ = true;
  if (auto_thread_.joinable()) auto_thread_.join();
  session_.close();
  server_.stop();
}

std::vector<PreferenceRecord> LabelingService::ask(const std::vector<IdPair>& pairs) {
  const auto queries = enqueue(pairs);
  for (const auto& q : queries)
    if (!session_.wait_for(q.query_id, timeout_seconds_))
      throw Error("timed out waiting for query " + std::to_string(q.query_id));
  std::vector<PreferenceRecord> out;
  if (queries.empty()) return out;
  for (const auto& r : session_.records())
    if (*r.query_id >= queries.front().query_id && *r.query_id <= queries.back().query_id) out.push_back(r);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return *a.query_id < *b.query_id; });
  return out;
}

std::vector<Query> LabelingService::enqueue(const std::vector<IdPair>& pairs) {
  auto queries = session_.enqueue(pairs);
  if (!prior_.empty()) session_.replay(prior_);
  return queries;
}

PairLabeler LabelingService::labeler() {
  return [this](int left, int right) {
    const auto q = enqueue({{left, right}}).front();
    const auto done = session_.wait_for(q.query_id, timeout_seconds_);
    if (!done) throw Error("timed out waiting for query " + std::to_string(q.query_id));
    return *done->choice;
  };
}

}  // namespace arl
