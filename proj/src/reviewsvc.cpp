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

#include "crowdval/reviewsvc.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <set>
#include <sstream>

#include "crowdval/util.hpp"
#include "httplib.h"
#include "json.hpp"

namespace crowdval {

namespace {
constexpr const char* kModule = "reviewsvc";
constexpr const char* kLogName = "events.log";
constexpr const char* kSnapshotName = "snapshot.json";
constexpr int kSnapshotVersion = 1;

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void IoFail(const std::string& what) {
  throw DataError(kModule, what + ": " + std::strerror(errno));
}

void WriteAll(int fd, std::string_view data, const std::string& name) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      IoFail("write " + name);
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void FsyncDir(const std::filesystem::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) IoFail("open " + dir.string());
  ::fsync(fd);
  ::close(fd);
}

void DurableReplace(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) IoFail("open " + tmp.string());
  WriteAll(fd, content, tmp.string());
  if (::fsync(fd) != 0) IoFail("fsync " + tmp.string());
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) IoFail("rename " + tmp.string());
  FsyncDir(path.parent_path());
}

ordered_json EnqueueJson(const ReviewItem& item, std::uint64_t seq) {
  ordered_json j;
  j["seq"] = seq;
  j["type"] = "enqueue";
  j["sample_id"] = item.sample_id;
  j["prompt"] = item.prompt;
  j["audio"] = item.audio;
  j["iteration"] = item.iteration;
  return j;
}

ordered_json LabelJson(const LabelEvent& e, std::uint64_t seq) {
  ordered_json j;
  j["seq"] = seq;
  j["type"] = "label";
  j["sample_id"] = e.sample_id;
  j["reviewer_id"] = e.reviewer_id;
  j["label"] = e.label;
  j["elapsed_ms"] = e.elapsed_ms;
  j["received_at"] = e.received_at;
  return j;
}

LabelEvent LabelFromJson(const json& j) {
  LabelEvent e;
  e.sample_id = j.at("sample_id").get<std::string>();
  e.reviewer_id = j.at("reviewer_id").get<std::string>();
  e.label = j.at("label").get<int>();
  e.elapsed_ms = j.value("elapsed_ms", std::int64_t{0});
  e.received_at = j.value("received_at", std::string{});
  return e;
}

ReviewItem ItemFromJson(const json& j) {
  ReviewItem it;
  it.sample_id = j.at("sample_id").get<std::string>();
  it.prompt = j.value("prompt", std::string{});
  it.audio = j.value("audio", std::string{});
  it.iteration = j.value("iteration", 1);
  return it;
}
}  // namespace

std::string_view ReviewStatusName(ReviewStatus s) {
  switch (s) {
    case ReviewStatus::kPending: return "pending";
    case ReviewStatus::kAssigned: return "assigned";
    case ReviewStatus::kLabeled: return "labeled";
  }
  return "?";
}

struct ReviewQueue::State {
  struct Entry {
    ReviewItem item;
    TimePoint lease_expiry{};
    std::uint64_t order = 0;
  };
  std::uint64_t seq = 0;
  std::map<std::string, Entry> items;
  // Unlabeled items keyed by the sequence number of their enqueue event.
  std::map<std::uint64_t, std::string> fifo;
  std::map<std::pair<std::string, std::string>, LabelEvent> accepted;
  std::vector<LabelEvent> history;
  std::map<std::string, std::string> lease_by_reviewer;
  std::size_t rejected_terminal = 0;
};

ReviewQueue::ReviewQueue(Options options)
    : options_(std::move(options)), state_(std::make_unique<State>()) {
  if (options_.state_dir.empty()) throw UsageError(kModule, "state directory is required");
  if (!options_.now) options_.now = [] { return std::chrono::steady_clock::now(); };
  std::error_code ec;
  std::filesystem::create_directories(options_.state_dir, ec);
  if (ec) throw DataError(kModule, "cannot create " + options_.state_dir.string() + ": " + ec.message());
  Replay();
  const auto log = options_.state_dir / kLogName;
  log_fd_ = ::open(log.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (log_fd_ < 0) IoFail("open " + log.string());
  FsyncDir(options_.state_dir);
}

ReviewQueue::~ReviewQueue() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

ReviewQueue::TimePoint ReviewQueue::Now() const { return options_.now(); }

void ReviewQueue::Replay() {
  State& s = *state_;
  std::uint64_t snapshot_seq = 0;
  const auto snap_path = options_.state_dir / kSnapshotName;
  if (std::filesystem::exists(snap_path)) {
    json snap;
    try {
      snap = json::parse(util::ReadFile(snap_path));
      if (snap.at("version").get<int>() != kSnapshotVersion)
        throw DataError(kModule, "unsupported snapshot version");
      snapshot_seq = snap.at("last_seq").get<std::uint64_t>();
      for (const auto& ji : snap.at("items")) {
        State::Entry e;
        e.item = ItemFromJson(ji);
        e.order = ji.at("order").get<std::uint64_t>();
        if (!ji.at("label").is_null()) {
          e.item.label = ParseLabel(std::to_string(ji.at("label").get<int>()));
          e.item.status = ReviewStatus::kLabeled;
          e.item.labeled_at = ji.value("labeled_at", std::string{});
        } else {
          s.fifo[e.order] = e.item.sample_id;
        }
        s.items[e.item.sample_id] = std::move(e);
      }
      for (const auto& je : snap.at("history")) {
        LabelEvent e = LabelFromJson(je);
        s.accepted[{e.sample_id, e.reviewer_id}] = e;
        s.history.push_back(std::move(e));
      }
    } catch (const json::exception& err) {
      throw DataError(kModule, snap_path.string() + ": corrupt snapshot: " + err.what());
    }
    s.seq = snapshot_seq;
  }

  const auto log_path = options_.state_dir / kLogName;
  if (!std::filesystem::exists(log_path)) return;
  const std::string content = util::ReadFile(log_path);
  std::size_t pos = 0;
  std::size_t valid_end = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const std::size_t end = complete ? nl : content.size();
    const std::string_view line(content.data() + pos, end - pos);
    ++line_no;
    json j;
    bool ok = complete;
    if (ok) {
      try {
        j = json::parse(line);
        ok = j.is_object() && j.contains("seq") && j.contains("type");
      } catch (const json::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      // Only the final line may be torn by a crash mid-append.
      if (complete && content.find_first_not_of('\n', end + 1) != std::string::npos)
        throw DataError(kModule, log_path.string() + ": corrupt event at line " +
                                     std::to_string(line_no));
      break;
    }
    const auto seq = j.at("seq").get<std::uint64_t>();
    if (seq > s.seq) {
      const std::string type = j.at("type").get<std::string>();
      try {
        if (type == "enqueue") ApplyEnqueue(ItemFromJson(j), seq);
        else if (type == "label") ApplyLabel(LabelFromJson(j), seq);
        else throw DataError(kModule, "unknown event type '" + type + "'");
      } catch (const json::exception& err) {
        throw DataError(kModule, log_path.string() + ": line " + std::to_string(line_no) + ": " +
                                     err.what());
      }
      s.seq = seq;
    }
    pos = end + 1;
    valid_end = pos;
  }
  if (valid_end < content.size()) {
    // Drop the torn tail so later appends start on a clean line.
    if (::truncate(log_path.c_str(), static_cast<off_t>(valid_end)) != 0)
      IoFail("truncate " + log_path.string());
  }
}

void ReviewQueue::Append(const std::string& lines) {
  WriteAll(log_fd_, lines, kLogName);
  if (::fdatasync(log_fd_) != 0) IoFail("fdatasync events log");
  ++appends_;
  ++since_snapshot_;
  if (options_.crash_after_append && appends_ >= *options_.crash_after_append) std::_Exit(86);
}

void ReviewQueue::ApplyEnqueue(const ReviewItem& item, std::uint64_t seq) {
  State& s = *state_;
  auto it = s.items.find(item.sample_id);
  if (it == s.items.end()) {
    State::Entry e;
    e.item = item;
    e.item.status = ReviewStatus::kPending;
    e.item.assigned_to.reset();
    e.item.label.reset();
    e.item.labeled_at.clear();
    e.order = seq;
    s.fifo[seq] = item.sample_id;
    s.items.emplace(item.sample_id, std::move(e));
    return;
  }
  // A labeled iteration-1 sample starts its second round.
  State::Entry& e = it->second;
  e.item.prompt = item.prompt;
  e.item.audio = item.audio;
  e.item.iteration = item.iteration;
  e.item.status = ReviewStatus::kPending;
  e.item.assigned_to.reset();
  e.item.label.reset();
  e.item.labeled_at.clear();
  e.order = seq;
  s.fifo[seq] = item.sample_id;
}

void ReviewQueue::ApplyLabel(const LabelEvent& ev, std::uint64_t) {
  State& s = *state_;
  auto it = s.items.find(ev.sample_id);
  if (it == s.items.end())
    throw DataError(kModule, "label event for unknown sample '" + ev.sample_id + "'");
  State::Entry& e = it->second;
  if (e.item.assigned_to) {
    auto lease = s.lease_by_reviewer.find(*e.item.assigned_to);
    if (lease != s.lease_by_reviewer.end() && lease->second == ev.sample_id)
      s.lease_by_reviewer.erase(lease);
  }
  e.item.status = ReviewStatus::kLabeled;
  e.item.label = ev.label == 1 ? Label::kInvalid : Label::kValid;
  e.item.labeled_at = ev.received_at;
  e.item.assigned_to.reset();
  s.fifo.erase(e.order);
  s.accepted[{ev.sample_id, ev.reviewer_id}] = ev;
  s.history.push_back(ev);
}

std::size_t ReviewQueue::Enqueue(const std::vector<ReviewItem>& items) {
  std::lock_guard lock(mu_);
  State& s = *state_;
  std::set<std::string> seen;
  std::vector<std::string> terminal;
  std::vector<const ReviewItem*> effective;
  for (const auto& item : items) {
    if (item.sample_id.empty()) throw ReviewError("enqueue: empty sample id");
    if (item.iteration != 1 && item.iteration != 2)
      throw ReviewError("enqueue: sample '" + item.sample_id + "' has iteration " +
                        std::to_string(item.iteration) + ", expected 1 or 2");
    if (!seen.insert(item.sample_id).second)
      throw ReviewError("enqueue: sample '" + item.sample_id + "' repeated in one batch");
    auto it = s.items.find(item.sample_id);
    if (it == s.items.end()) {
      effective.push_back(&item);
      continue;
    }
    const ReviewItem& cur = it->second.item;
    if (cur.status != ReviewStatus::kLabeled) continue;
    if (cur.iteration == 2) terminal.push_back(item.sample_id);
    else if (item.iteration == 2) effective.push_back(&item);
  }
  if (!terminal.empty()) {
    s.rejected_terminal += terminal.size();
    if (terminal.size() > 10) terminal.resize(10);
    throw ReviewError("enqueue: sample(s) already finalized in iteration 2: " +
                      util::Join(terminal, ", "));
  }
  if (effective.empty()) return 0;
  std::string lines;
  std::uint64_t seq = s.seq;
  for (const ReviewItem* item : effective) lines += EnqueueJson(*item, ++seq).dump() + "\n";
  Append(lines);
  for (const ReviewItem* item : effective) ApplyEnqueue(*item, ++s.seq);
  if (options_.snapshot_every && since_snapshot_ >= options_.snapshot_every) CompactLocked();
  return effective.size();
}

std::optional<ReviewItem> ReviewQueue::NextItem(const std::string& reviewer) {
  if (reviewer.empty()) throw ReviewError("reviewer id is required");
  std::lock_guard lock(mu_);
  State& s = *state_;
  const TimePoint now = Now();
  auto held = s.lease_by_reviewer.find(reviewer);
  if (held != s.lease_by_reviewer.end()) {
    State::Entry& e = s.items.at(held->second);
    if (e.item.status == ReviewStatus::kAssigned && e.item.assigned_to == reviewer &&
        e.lease_expiry > now) {
      e.lease_expiry = now + options_.lease;
      return e.item;
    }
    s.lease_by_reviewer.erase(held);
  }
  for (const auto& [order, id] : s.fifo) {
    State::Entry& e = s.items.at(id);
    if (s.accepted.count({id, reviewer})) continue;
    const bool free = e.item.status == ReviewStatus::kPending ||
                      (e.item.status == ReviewStatus::kAssigned && e.lease_expiry <= now);
    if (!free) continue;
    if (e.item.assigned_to) s.lease_by_reviewer.erase(*e.item.assigned_to);
    e.item.status = ReviewStatus::kAssigned;
    e.item.assigned_to = reviewer;
    e.lease_expiry = now + options_.lease;
    s.lease_by_reviewer[reviewer] = id;
    return e.item;
  }
  return std::nullopt;
}

SubmitResult ReviewQueue::SubmitLabel(const LabelEvent& event) {
  if (event.label != 0 && event.label != 1)
    throw ReviewError("label must be 0 or 1, got " + std::to_string(event.label));
  if (event.reviewer_id.empty()) throw ReviewError("reviewer id is required");
  std::lock_guard lock(mu_);
  State& s = *state_;
  auto it = s.items.find(event.sample_id);
  if (it == s.items.end())
    throw ReviewError("unknown sample '" + event.sample_id + "'", /*not_found=*/true);
  State::Entry& e = it->second;
  SubmitResult r;

  auto prior = s.accepted.find({event.sample_id, event.reviewer_id});
  if (prior != s.accepted.end()) {
    r.stored_label = prior->second.label == 1 ? Label::kInvalid : Label::kValid;
    if (prior->second.label == event.label) {
      r.outcome = SubmitOutcome::kDuplicate;
      r.message = "already accepted";
    } else {
      r.outcome = SubmitOutcome::kConflict;
      r.message = "reviewer already labeled this sample differently; original kept";
    }
    return r;
  }
  if (e.item.status == ReviewStatus::kLabeled) {
    r.outcome = SubmitOutcome::kConflict;
    r.stored_label = *e.item.label;
    r.message = "sample already labeled";
    return r;
  }
  if (e.item.status == ReviewStatus::kAssigned && e.item.assigned_to != event.reviewer_id &&
      e.lease_expiry > Now()) {
    r.outcome = SubmitOutcome::kConflict;
    r.message = "sample is leased to another reviewer";
    return r;
  }

  LabelEvent accepted = event;
  if (accepted.received_at.empty()) accepted.received_at = util::NowIso8601();
  const std::uint64_t seq = s.seq + 1;
  Append(LabelJson(accepted, seq).dump() + "\n");
  ApplyLabel(accepted, seq);
  s.seq = seq;
  r.outcome = SubmitOutcome::kAccepted;
  r.stored_label = *e.item.label;
  r.seq = seq;
  r.message = "accepted";
  if (options_.snapshot_every && since_snapshot_ >= options_.snapshot_every) CompactLocked();
  return r;
}

ReviewProgress ReviewQueue::Progress() const {
  std::lock_guard lock(mu_);
  ReviewProgress p;
  const TimePoint now = Now();
  for (const auto& [id, e] : state_->items) {
    ++p.enqueued;
    if (e.item.status == ReviewStatus::kLabeled) ++p.labeled;
    else if (e.item.status == ReviewStatus::kAssigned && e.lease_expiry > now) ++p.assigned;
    else ++p.pending;
  }
  p.rejected_terminal = state_->rejected_terminal;
  return p;
}

std::optional<ReviewItem> ReviewQueue::Get(const std::string& sample_id) const {
  std::lock_guard lock(mu_);
  auto it = state_->items.find(sample_id);
  if (it == state_->items.end()) return std::nullopt;
  return it->second.item;
}

LabelMap ReviewQueue::Labels() const {
  std::lock_guard lock(mu_);
  LabelMap out;
  for (const auto& [id, e] : state_->items)
    if (e.item.label) out[id] = *e.item.label;
  return out;
}

std::vector<LabelEvent> ReviewQueue::AcceptedEvents() const {
  std::lock_guard lock(mu_);
  return state_->history;
}

std::string ReviewQueue::ExportSilverText() const {
  std::ostringstream out;
  out << "# silver labels from human review\n";
  for (const auto& [id, label] : Labels()) out << id << '\t' << LabelValue(label) << '\n';
  return out.str();
}

void ReviewQueue::ExportSilver(const std::filesystem::path& path) const {
  util::WriteFileAtomic(path, ExportSilverText());
}

void ReviewQueue::Compact() {
  std::lock_guard lock(mu_);
  CompactLocked();
}

void ReviewQueue::CompactLocked() {
  const State& s = *state_;
  ordered_json snap;
  snap["version"] = kSnapshotVersion;
  snap["last_seq"] = s.seq;
  ordered_json items = ordered_json::array();
  for (const auto& [id, e] : s.items) {
    ordered_json j;
    j["sample_id"] = id;
    j["prompt"] = e.item.prompt;
    j["audio"] = e.item.audio;
    j["iteration"] = e.item.iteration;
    j["order"] = e.order;
    if (e.item.label) {
      j["label"] = LabelValue(*e.item.label);
      j["labeled_at"] = e.item.labeled_at;
    } else {
      j["label"] = nullptr;
    }
    items.push_back(std::move(j));
  }
  snap["items"] = std::move(items);
  ordered_json history = ordered_json::array();
  for (const auto& e : s.history) {
    ordered_json j = LabelJson(e, 0);
    j.erase("seq");
    j.erase("type");
    history.push_back(std::move(j));
  }
  snap["history"] = std::move(history);
  DurableReplace(options_.state_dir / kSnapshotName, snap.dump() + "\n");
  // Events up to last_seq are now in the snapshot; replay skips them even if
  // the truncation below is lost.
  if (::ftruncate(log_fd_, 0) != 0) IoFail("truncate events log");
  ::fdatasync(log_fd_);
  since_snapshot_ = 0;
}

// ---------------------------------------------------------------------------
// HTTP front end

namespace {
void SendJson(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& message) {
  ordered_json j;
  j["error"] = message;
  SendJson(res, status, j);
}

std::string AudioMime(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".wav") return "audio/wav";
  if (ext == ".mp3") return "audio/mpeg";
  if (ext == ".flac") return "audio/flac";
  if (ext == ".ogg" || ext == ".opus") return "audio/ogg";
  if (ext == ".webm") return "audio/webm";
  return "application/octet-stream";
}

bool Inside(const std::filesystem::path& root, const std::filesystem::path& p) {
  auto r = root.begin();
  auto q = p.begin();
  for (; r != root.end(); ++r, ++q) {
    if (r->empty()) continue;  // trailing separator
    if (q == p.end() || *r != *q) return false;
  }
  return true;
}
}  // namespace

ReviewServer::ReviewServer(ReviewQueue& queue, ServerOptions options)
    : queue_(queue), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  Routes();
}

ReviewServer::~ReviewServer() { Stop(); }

int ReviewServer::Bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool ReviewServer::ListenAfterBind() { return server_->listen_after_bind(); }

void ReviewServer::Stop() {
  if (server_) server_->stop();
}

void ReviewServer::Routes() {
  using httplib::Request;
  using httplib::Response;

  server_->set_exception_handler([](const Request&, Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      SendError(res, 500, e.what());
    } catch (...) {
      SendError(res, 500, "internal error");
    }
  });

  server_->Get("/api/queue/next", [this](const Request& req, Response& res) {
    const std::string reviewer = req.get_param_value("reviewer");
    if (reviewer.empty()) return SendError(res, 400, "missing reviewer parameter");
    auto item = queue_.NextItem(reviewer);
    if (!item) {
      res.status = 204;
      return;
    }
    ordered_json j;
    j["sample_id"] = item->sample_id;
    j["prompt"] = item->prompt;
    j["audio_url"] = "/audio/" + httplib::detail::encode_url(item->sample_id);
    j["iteration"] = item->iteration;
    SendJson(res, 200, j);
  });

  server_->Post("/api/labels", [this](const Request& req, Response& res) {
    LabelEvent ev;
    try {
      json j = json::parse(req.body);
      ev.sample_id = j.at("sample_id").get<std::string>();
      ev.reviewer_id = j.at("reviewer_id").get<std::string>();
      ev.label = j.at("label").get<int>();
      ev.elapsed_ms = j.value("elapsed_ms", std::int64_t{0});
    } catch (const json::exception& e) {
      return SendError(res, 400, std::string("bad label submission: ") + e.what());
    }
    SubmitResult r;
    try {
      r = queue_.SubmitLabel(ev);
    } catch (const ReviewError& e) {
      return SendError(res, e.not_found() ? 404 : 400, e.what());
    }
    ordered_json body;
    body["sample_id"] = ev.sample_id;
    switch (r.outcome) {
      case SubmitOutcome::kAccepted: body["status"] = "accepted"; break;
      case SubmitOutcome::kDuplicate: body["status"] = "duplicate"; break;
      case SubmitOutcome::kConflict: body["status"] = "conflict"; break;
    }
    if (r.outcome != SubmitOutcome::kConflict || r.message != "sample is leased to another reviewer")
      body["label"] = LabelValue(r.stored_label);
    body["message"] = r.message;
    SendJson(res, r.outcome == SubmitOutcome::kConflict ? 409 : 200, body);
  });

  server_->Get("/api/progress", [this](const Request&, Response& res) {
    const ReviewProgress p = queue_.Progress();
    ordered_json j;
    j["enqueued"] = p.enqueued;
    j["pending"] = p.pending;
    j["assigned"] = p.assigned;
    j["labeled"] = p.labeled;
    j["rejected_terminal"] = p.rejected_terminal;
    SendJson(res, 200, j);
  });

  server_->Post("/api/queue", [this](const Request& req, Response& res) {
    std::vector<ReviewItem> items;
    try {
      json j = json::parse(req.body);
      for (const auto& ji : j.at("items")) items.push_back(ItemFromJson(ji));
    } catch (const json::exception& e) {
      return SendError(res, 400, std::string("bad enqueue request: ") + e.what());
    }
    try {
      ordered_json body;
      body["enqueued"] = queue_.Enqueue(items);
      SendJson(res, 200, body);
    } catch (const ReviewError& e) {
      SendError(res, 409, e.what());
    }
  });

  server_->Get("/api/export", [this](const Request&, Response& res) {
    res.set_content(queue_.ExportSilverText(), "text/tab-separated-values");
  });

  server_->Get(R"(/audio/(.+))", [this](const Request& req, Response& res) {
    const std::string id = req.matches[1];
    auto item = queue_.Get(id);
    if (!item || item->audio.empty()) return SendError(res, 404, "no audio for '" + id + "'");
    std::error_code ec;
    const auto root = std::filesystem::weakly_canonical(
        options_.audio_root.empty() ? std::filesystem::current_path() : options_.audio_root, ec);
    std::filesystem::path p(item->audio);
    if (p.is_relative()) p = root / p;
    p = std::filesystem::weakly_canonical(p, ec);
    if (ec || !Inside(root, p)) return SendError(res, 403, "audio path outside audio root");
    if (!std::filesystem::is_regular_file(p, ec))
      return SendError(res, 404, "audio file missing for '" + id + "'");
    // Range requests are answered by the HTTP layer from the full body.
    res.set_content(util::ReadFile(p), AudioMime(p));
  });

  if (!options_.ui_dir.empty() && std::filesystem::is_directory(options_.ui_dir))
    server_->set_mount_point("/", options_.ui_dir.string());
}

}  // namespace crowdval
