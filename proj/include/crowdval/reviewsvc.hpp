// Copyright 2026 The crowdval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Human review queue for samples the automated check flagged.
//
// State lives in memory and is made durable by an append-only event log
// (events.log, one JSON object per line, fdatasync'd before a call returns)
// plus an occasional compacted snapshot (snapshot.json). On open, the
// snapshot is loaded and log events with a higher sequence number are
// replayed, so a crash at any point loses nothing that was acknowledged. A
// torn final log line (crash mid-write) is ignored.
//
// Lease assignments are not logged: after a restart every unlabeled item is
// pending again.
//
// A sample is finalized by one label. An iteration-1 sample may be enqueued
// again as iteration 2 (a re-recording) and reviewed once more; a labeled
// iteration-2 sample is terminal.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "crowdval/corpus.hpp"
#include "crowdval/error.hpp"

namespace httplib {
class Server;
}

namespace crowdval {

enum class ReviewStatus { kPending, kAssigned, kLabeled };
std::string_view ReviewStatusName(ReviewStatus s);

struct ReviewItem {
  std::string sample_id;
  std::string prompt;
  std::string audio;
  int iteration = 1;
  ReviewStatus status = ReviewStatus::kPending;
  std::optional<std::string> assigned_to;
  std::optional<Label> label;
  std::string labeled_at;
};

struct LabelEvent {
  std::string sample_id;
  std::string reviewer_id;
  int label = 0;  // validated to {0, 1}
  std::int64_t elapsed_ms = 0;
  std::string received_at;
};

enum class SubmitOutcome {
  kAccepted,
  /// Same (sample, reviewer) was accepted before; the original is returned.
  kDuplicate,
  /// Rejected: the sample is finalized or leased to someone else, or a
  /// duplicate carries a different label.
  kConflict,
};

struct SubmitResult {
  SubmitOutcome outcome = SubmitOutcome::kAccepted;
  Label stored_label = Label::kValid;
  /// Log sequence number of a newly accepted label; 0 otherwise.
  std::uint64_t seq = 0;
  std::string message;
};

struct ReviewProgress {
  std::size_t enqueued = 0;
  std::size_t pending = 0;
  std::size_t assigned = 0;
  std::size_t labeled = 0;
  std::size_t rejected_terminal = 0;
};

/// Thrown for requests the queue refuses: unknown sample (kind kData, not_found
/// set), terminal re-enqueue, malformed label.
class ReviewError : public DataError {
 public:
  ReviewError(const std::string& message, bool not_found = false)
      : DataError("reviewsvc", message), not_found_(not_found) {}
  bool not_found() const { return not_found_; }

 private:
  bool not_found_;
};

class ReviewQueue {
 public:
  using TimePoint = std::chrono::steady_clock::time_point;

  struct Options {
    std::filesystem::path state_dir;
    std::chrono::milliseconds lease = std::chrono::minutes(10);
    /// Compact after this many appended events; 0 disables.
    std::size_t snapshot_every = 1000;
    std::function<TimePoint()> now;
    /// Fault injection: terminate the process right after the Nth durable
    /// append of this instance, before the caller gets an answer.
    std::optional<std::size_t> crash_after_append;
  };

  explicit ReviewQueue(Options options);
  ~ReviewQueue();
  ReviewQueue(const ReviewQueue&) = delete;
  ReviewQueue& operator=(const ReviewQueue&) = delete;

  /// Returns the number of items newly made pending. Pending or assigned ids
  /// are no-ops. Throws ReviewError (nothing applied) if any item is terminal
  /// or the batch repeats an id.
  std::size_t Enqueue(const std::vector<ReviewItem>& items);

  /// Leases the oldest pending item to `reviewer`. A reviewer holding a live
  /// lease gets that item back. Never serves an item the reviewer labeled.
  std::optional<ReviewItem> NextItem(const std::string& reviewer);

  SubmitResult SubmitLabel(const LabelEvent& event);

  ReviewProgress Progress() const;
  std::optional<ReviewItem> Get(const std::string& sample_id) const;
  /// Current label of every labeled item.
  LabelMap Labels() const;
  /// Every accepted event in acceptance order.
  std::vector<LabelEvent> AcceptedEvents() const;

  /// TSV id<TAB>label with a header comment; consumable by AttachLabels.
  void ExportSilver(const std::filesystem::path& path) const;
  std::string ExportSilverText() const;

  /// Writes a snapshot and truncates the log.
  void Compact();

 private:
  struct State;
  void Replay();
  void Append(const std::string& json_line);
  void ApplyEnqueue(const ReviewItem& item, std::uint64_t seq);
  void ApplyLabel(const LabelEvent& e, std::uint64_t seq);
  void CompactLocked();
  TimePoint Now() const;

  Options options_;
  mutable std::mutex mu_;
  std::unique_ptr<State> state_;
  int log_fd_ = -1;
  std::size_t appends_ = 0;
  std::size_t since_snapshot_ = 0;
};

struct ServerOptions {
  std::filesystem::path audio_root;
  /// Static reviewer UI bundle served at "/", when the directory exists.
  std::filesystem::path ui_dir;
};

/// HTTP+JSON front end:
///   GET  /api/queue/next?reviewer=ID  → 200 item | 204
///   POST /api/labels {sample_id, reviewer_id, label, elapsed_ms} → 200 | 409
///   GET  /api/progress                → counts
///   POST /api/queue {items: [...]}    → enqueue flagged samples
///   GET  /api/export                  → silver label TSV
///   GET  /audio/{id}                  → audio bytes (Range supported)
class ReviewServer {
 public:
  ReviewServer(ReviewQueue& queue, ServerOptions options);
  ~ReviewServer();

  /// Binds; port 0 picks a free port. Returns the bound port or -1.
  int Bind(const std::string& host, int port);
  /// Blocks until Stop().
  bool ListenAfterBind();
  void Stop();

 private:
  void Routes();

  ReviewQueue& queue_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace crowdval
