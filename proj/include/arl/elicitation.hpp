#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "arl/argumentation.hpp"
#include "arl/error.hpp"
#include "arl/preference.hpp"

namespace arl {

enum class QueryStatus { Pending, Answered, Skipped };

std::string_view status_name(QueryStatus s);

struct Query {
  int query_id = 0;
  int left = 0;
  int right = 0;
  QueryStatus status = QueryStatus::Pending;
  std::optional<Choice> choice;
};

class NonAttackingPair : public Error {
 public:
  explicit NonAttackingPair(IdPair pair);
  IdPair pair() const { return pair_; }

 private:
  IdPair pair_;
};

/// Unknown query id, or a query that is no longer pending.
class QueryConflict : public Error {
 public:
  QueryConflict(int query_id, bool known);
  int query_id() const { return query_id_; }
  bool known() const { return known_; }

 private:
  int query_id_;
  bool known_;
};

/// Query queue over one trajectory store. All state transitions and label-log
/// writes go through one mutex; waiters are woken on every transition.
class Session {
 public:
  /// `store` and `aaf` must outlive the session. An empty log path keeps labels in memory only.
  Session(MazeEnv env, const TrajectoryStore& store, const Aaf& aaf, std::filesystem::path log_path = {});

  /// Appends one pending query per pair, ids continuing from the last one.
  /// Throws NonAttackingPair (and enqueues nothing) if any pair is not an attack.
  std::vector<Query> enqueue(const std::vector<IdPair>& pairs);

  /// Oldest pending query.
  std::optional<Query> next_query() const;

  /// Resolves a pending query and logs it. Returns the preference, or none for a skip.
  /// Throws QueryConflict for unknown or already-resolved ids.
  std::optional<PreferenceRecord> submit_label(int query_id, Choice choice);

  /// Applies logged answers to matching pending queries without logging them again.
  /// Returns the number applied.
  std::size_t replay(const std::vector<LabelLogEntry>& entries);

  /// Blocks until the query is resolved or the session closes; none on timeout.
  std::optional<Query> wait_for(int query_id, double timeout_seconds) const;
  /// Blocks until no query is pending; false on timeout or close.
  bool wait_until_drained(double timeout_seconds) const;

  /// Wakes every waiter; later waits return immediately.
  void close();

  Query query(int query_id) const;
  std::vector<Query> queries() const;
  /// Preferences from answered queries, in answer order.
  std::vector<PreferenceRecord> records() const;
  std::size_t count(QueryStatus s) const;

  const MazeEnv& env() const { return env_; }

  /// {maze, pending, answered, skipped}
  nlohmann::json summary_json() const;
  /// {query_id, left:{id,steps}, right:{id,steps}}
  nlohmann::json query_json(const Query& q) const;

 private:
  Query& find(int query_id);
  void resolve(Query& q, Choice choice, const std::string& ts);

  MazeEnv env_;
  const TrajectoryStore& store_;
  const Aaf& aaf_;
  std::unique_ptr<LabelLog> log_;
  std::vector<Query> queries_;
  std::vector<PreferenceRecord> records_;
  bool closed_ = false;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
};

/// HTTP front end for a session, bound to localhost.
///   GET  /api/session     -> {maze, pending, answered, skipped}
///   GET  /api/query/next  -> 200 query JSON, or 204 when nothing is pending
///   POST /api/label       {query_id, choice} -> 200 {recorded}, 409 when already resolved
///   GET  /api/maze        -> maze JSON
/// Static files from `ui_dir` are served at / when it is set.
class ElicitationServer {
 public:
  ElicitationServer(Session& session, int port, std::string ui_dir = {});
  ~ElicitationServer();

  ElicitationServer(const ElicitationServer&) = delete;
  ElicitationServer& operator=(const ElicitationServer&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  void start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_;
  std::thread thread_;
};

/// Answers queries from a running service with `labeler` until `stop` is set.
/// Returns the number of labels the service accepted.
int run_auto_labeler(const std::string& host, int port, const PairLabeler& labeler, const std::atomic<bool>& stop,
                     double poll_seconds = 0.002);

/// Session plus server plus, optionally, an auto-labeler thread driving the same
/// endpoints. Queries block until answered or the timeout passes. Answers already in
/// the label log are replayed onto matching queries as they are enqueued, so an
/// interrupted run resumes where it stopped.
class LabelingService {
 public:
  LabelingService(MazeEnv env, const TrajectoryStore& store, const Aaf& aaf, std::filesystem::path log_path,
                  int port, double timeout_seconds, std::string ui_dir = {},
                  std::optional<PairLabeler> auto_labeler = std::nullopt);
  ~LabelingService();

  /// Enqueues all pairs and waits for every answer. Skips yield no record.
  /// Throws arl::Error on timeout.
  std::vector<PreferenceRecord> ask(const std::vector<IdPair>& pairs);
  /// Labeler that enqueues one query and blocks for its answer.
  PairLabeler labeler();

  Session& session() { return session_; }
  int port() const { return server_.port(); }

 private:
  std::vector<Query> enqueue(const std::vector<IdPair>& pairs);

  std::vector<LabelLogEntry> prior_;
  Session session_;
  ElicitationServer server_;
  double timeout_seconds_;
  std::atomic<bool> stop_{false};
  std::thread auto_thread_;
};

}  // namespace arl
