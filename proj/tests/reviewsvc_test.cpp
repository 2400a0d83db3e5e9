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

#include <gtest/gtest.h>
#include <httplib.h>

#include <nlohmann/json.hpp>

#include "test_support.hpp"

namespace crowdval {
namespace {

using namespace std::chrono_literals;
using json = nlohmann::json;

struct FakeClock {
  ReviewQueue::TimePoint t{};
  ReviewQueue::TimePoint operator()() const { return t; }
};

class QueueTest : public ::testing::Test {
 protected:
  ReviewQueue::Options Opts() {
    ReviewQueue::Options o;
    o.state_dir = dir_.path();
    o.lease = 60s;
    o.now = [this] { return clock_.t; };
    return o;
  }

  static std::vector<ReviewItem> Items(std::initializer_list<std::string> ids, int iteration = 1) {
    std::vector<ReviewItem> out;
    for (const auto& id : ids) out.push_back({id, "prompt " + id, id + ".wav", iteration});
    return out;
  }

  static LabelEvent Ev(std::string id, std::string who, int label) {
    return {std::move(id), std::move(who), label, 1200, ""};
  }

  test::TempDir dir_;
  FakeClock clock_;
};

TEST_F(QueueTest, ServesFifoAndHonorsLeases) {
  ReviewQueue q(Opts());
  EXPECT_EQ(q.Enqueue(Items({"a", "b"})), 2u);
  EXPECT_EQ(q.Enqueue(Items({"a"})), 0u);
  auto r1 = q.NextItem("r1");
  ASSERT_TRUE(r1);
  EXPECT_EQ(r1->sample_id, "a");
  EXPECT_EQ(q.NextItem("r1")->sample_id, "a");  // own lease comes back
  EXPECT_EQ(q.NextItem("r2")->sample_id, "b");
  EXPECT_FALSE(q.NextItem("r3").has_value());
  EXPECT_EQ(q.Progress().assigned, 2u);

  SubmitResult stolen = q.SubmitLabel(Ev("a", "r3", 1));
  EXPECT_EQ(stolen.outcome, SubmitOutcome::kConflict);

  clock_.t += 61s;
  auto again = q.NextItem("r3");
  ASSERT_TRUE(again);
  EXPECT_EQ(again->sample_id, "a");
}

TEST_F(QueueTest, DuplicatesAndConflicts) {
  ReviewQueue q(Opts());
  q.Enqueue(Items({"a"}));
  q.NextItem("r1");
  SubmitResult first = q.SubmitLabel(Ev("a", "r1", 1));
  EXPECT_EQ(first.outcome, SubmitOutcome::kAccepted);
  SubmitResult dup = q.SubmitLabel(Ev("a", "r1", 1));
  EXPECT_EQ(dup.outcome, SubmitOutcome::kDuplicate);
  EXPECT_GT(first.seq, 0u);
  EXPECT_EQ(dup.stored_label, Label::kInvalid);
  SubmitResult flip = q.SubmitLabel(Ev("a", "r1", 0));
  EXPECT_EQ(flip.outcome, SubmitOutcome::kConflict);
  EXPECT_EQ(flip.stored_label, Label::kInvalid);
  EXPECT_EQ(q.SubmitLabel(Ev("a", "r2", 0)).outcome, SubmitOutcome::kConflict);
  EXPECT_EQ(q.AcceptedEvents().size(), 1u);
  EXPECT_EQ(q.Labels().at("a"), Label::kInvalid);

  try {
    q.SubmitLabel(Ev("nope", "r1", 1));
    FAIL() << "expected ReviewError";
  } catch (const ReviewError& e) {
    EXPECT_TRUE(e.not_found());
  }
  EXPECT_THROW(q.SubmitLabel(Ev("a", "r1", 2)), ReviewError);
}

TEST_F(QueueTest, SecondIterationIsReviewedOnceThenTerminal) {
  ReviewQueue q(Opts());
  q.Enqueue(Items({"a"}));
  q.NextItem("r1");
  q.SubmitLabel(Ev("a", "r1", 1));
  EXPECT_EQ(q.Enqueue(Items({"a"})), 0u);
  EXPECT_EQ(q.Enqueue(Items({"a"}, 2)), 1u);
  EXPECT_EQ(q.Get("a")->status, ReviewStatus::kPending);
  EXPECT_FALSE(q.Get("a")->label.has_value());

  // The first reviewer already labeled this sample and is not served it again.
  EXPECT_FALSE(q.NextItem("r1").has_value());
  EXPECT_EQ(q.NextItem("r2")->iteration, 2);
  EXPECT_EQ(q.SubmitLabel(Ev("a", "r2", 0)).outcome, SubmitOutcome::kAccepted);
  EXPECT_THROW(q.Enqueue(Items({"a"}, 2)), ReviewError);
  EXPECT_EQ(q.Progress().rejected_terminal, 1u);
  EXPECT_EQ(q.Labels().at("a"), Label::kValid);
}

TEST_F(QueueTest, ExportFeedsLabelAttachment) {
  ReviewQueue q(Opts());
  q.Enqueue(Items({"a", "b", "c"}));
  q.NextItem("r1");
  q.SubmitLabel(Ev("a", "r1", 0));
  q.NextItem("r1");
  q.SubmitLabel(Ev("b", "r1", 1));
  q.ExportSilver(dir_ / "silver.tsv");
  LabelMap m = LoadLabelFile(dir_ / "silver.tsv");
  EXPECT_EQ(m, (LabelMap{{"a", Label::kValid}, {"b", Label::kInvalid}}));
}

TEST_F(QueueTest, StateSurvivesReopen) {
  {
    ReviewQueue q(Opts());
    q.Enqueue(Items({"a", "b", "c"}));
    q.NextItem("r1");
    q.SubmitLabel(Ev("a", "r1", 1));
    q.NextItem("r2");  // lease on b is not persisted
  }
  ReviewQueue q(Opts());
  ReviewProgress p = q.Progress();
  EXPECT_EQ(p.enqueued, 3u);
  EXPECT_EQ(p.labeled, 1u);
  EXPECT_EQ(p.pending, 2u);
  EXPECT_EQ(p.assigned, 0u);
  EXPECT_EQ(q.SubmitLabel(Ev("a", "r1", 1)).outcome, SubmitOutcome::kDuplicate);
  EXPECT_EQ(q.NextItem("r3")->sample_id, "b");
}

TEST_F(QueueTest, TornFinalLineIsDropped) {
  {
    ReviewQueue q(Opts());
    q.Enqueue(Items({"a", "b"}));
    q.NextItem("r1");
    q.SubmitLabel(Ev("a", "r1", 1));
  }
  {
    std::ofstream log(dir_ / "events.log", std::ios::app);
    log << R"({"seq":4,"type":"label","sample_id":"b","rev)";
  }
  ReviewQueue q(Opts());
  EXPECT_EQ(q.Progress().labeled, 1u);
  q.NextItem("r2");
  EXPECT_EQ(q.SubmitLabel(Ev("b", "r2", 0)).outcome, SubmitOutcome::kAccepted);
  {
    ReviewQueue again(Opts());
    EXPECT_EQ(again.Progress().labeled, 2u);
  }
}

TEST_F(QueueTest, CorruptMiddleLineIsAnError) {
  {
    ReviewQueue q(Opts());
    q.Enqueue(Items({"a"}));
  }
  std::string log = test::ReadFile(dir_ / "events.log");
  test::WriteFile(dir_ / "events.log", "garbage\n" + log);
  EXPECT_THROW(ReviewQueue q(Opts()), DataError);
}

TEST_F(QueueTest, CompactionKeepsEverything) {
  auto opts = Opts();
  opts.snapshot_every = 3;
  {
    ReviewQueue q(opts);
    q.Enqueue(Items({"a", "b", "c", "d"}));
    for (const char* who : {"r1", "r2", "r3"}) {
      auto it = q.NextItem(who);
      q.SubmitLabel(Ev(it->sample_id, who, 1));
    }
  }
  EXPECT_TRUE(std::filesystem::exists(dir_ / "snapshot.json"));
  ReviewQueue q(opts);
  EXPECT_EQ(q.Progress().labeled, 3u);
  EXPECT_EQ(q.AcceptedEvents().size(), 3u);
  EXPECT_EQ(q.NextItem("r9")->sample_id, "d");
  q.Compact();
  EXPECT_EQ(std::filesystem::file_size(dir_ / "events.log"), 0u);
  ReviewQueue reopened(opts);
  EXPECT_EQ(reopened.Labels(), q.Labels());
}

// HTTP surface, against a real `crowdval serve` process.
class ServeTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::filesystem::create_directories(dir_ / "audio");
    test::WriteFile(dir_ / "audio" / "a.wav", "RIFF0123456789");
  }
  test::TempDir dir_;
};

TEST_F(ServeTest, ReviewRoundTripOverHttp) {
  test::ServeProcess serve(dir_ / "state", {"--audio-root", (dir_ / "audio").string()});
  ASSERT_GT(serve.port(), 0);
  const int port = serve.port();

  EXPECT_EQ(test::HttpGet(port, "/api/queue/next?reviewer=r1").status, 204);
  EXPECT_EQ(test::HttpGet(port, "/api/queue/next").status, 400);

  json batch = {{"items",
                 {{{"sample_id", "a"}, {"prompt", "turn on"}, {"audio", (dir_ / "audio" / "a.wav").string()}},
                  {{"sample_id", "b"}, {"prompt", "lights"}, {"audio", "/etc/passwd"}}}}};
  auto enq = test::HttpPost(port, "/api/queue", batch.dump());
  ASSERT_EQ(enq.status, 200) << enq.body;
  EXPECT_EQ(json::parse(enq.body)["enqueued"], 2);

  auto next = test::HttpGet(port, "/api/queue/next?reviewer=r1");
  ASSERT_EQ(next.status, 200);
  json item = json::parse(next.body);
  EXPECT_EQ(item["sample_id"], "a");
  EXPECT_EQ(item["audio_url"], "/audio/a");
  EXPECT_EQ(item["iteration"], 1);

  httplib::Client cli("127.0.0.1", port);
  auto ranged = cli.Get("/audio/a", {{"Range", "bytes=4-7"}});
  ASSERT_TRUE(ranged);
  EXPECT_EQ(ranged->status, 206);
  EXPECT_EQ(ranged->body, "0123");
  EXPECT_EQ(ranged->get_header_value("Content-Type"), "audio/wav");
  EXPECT_EQ(test::HttpGet(port, "/audio/b").status, 403);
  EXPECT_EQ(test::HttpGet(port, "/audio/zzz").status, 404);

  json label = {{"sample_id", "a"}, {"reviewer_id", "r1"}, {"label", 1}, {"elapsed_ms", 900}};
  auto ok = test::HttpPost(port, "/api/labels", label.dump());
  EXPECT_EQ(ok.status, 200) << ok.body;
  EXPECT_EQ(json::parse(ok.body)["status"], "accepted");
  auto dup = test::HttpPost(port, "/api/labels", label.dump());
  EXPECT_EQ(dup.status, 200);
  EXPECT_EQ(json::parse(dup.body)["status"], "duplicate");
  label["reviewer_id"] = "r2";
  label["label"] = 0;
  EXPECT_EQ(test::HttpPost(port, "/api/labels", label.dump()).status, 409);
  label["sample_id"] = "missing";
  EXPECT_EQ(test::HttpPost(port, "/api/labels", label.dump()).status, 404);
  EXPECT_EQ(test::HttpPost(port, "/api/labels", "{oops").status, 400);

  json progress = json::parse(test::HttpGet(port, "/api/progress").body);
  EXPECT_EQ(progress["enqueued"], 2);
  EXPECT_EQ(progress["labeled"], 1);
  EXPECT_EQ(progress["pending"], 1);

  auto exported = test::HttpGet(port, "/api/export");
  EXPECT_NE(exported.body.find("a\t1"), std::string::npos) << exported.body;

  // Terminal re-enqueue over HTTP.
  json round2 = {{"items", {{{"sample_id", "a"}, {"prompt", "turn on"}, {"audio", "a.wav"}, {"iteration", 2}}}}};
  EXPECT_EQ(test::HttpPost(port, "/api/queue", round2.dump()).status, 200);
  auto nb = test::HttpGet(port, "/api/queue/next?reviewer=r3");
  ASSERT_EQ(json::parse(nb.body)["sample_id"], "b");  // enqueued before the re-recording
  json lb = {{"sample_id", "b"}, {"reviewer_id", "r3"}, {"label", 1}, {"elapsed_ms", 5}};
  EXPECT_EQ(test::HttpPost(port, "/api/labels", lb.dump()).status, 200);
  auto n2 = test::HttpGet(port, "/api/queue/next?reviewer=r3");
  ASSERT_EQ(n2.status, 200);
  EXPECT_EQ(json::parse(n2.body)["iteration"], 2);
  json l2 = {{"sample_id", "a"}, {"reviewer_id", "r3"}, {"label", 0}, {"elapsed_ms", 5}};
  EXPECT_EQ(test::HttpPost(port, "/api/labels", l2.dump()).status, 200);
  EXPECT_EQ(test::HttpPost(port, "/api/queue", round2.dump()).status, 409);
}

TEST_F(ServeTest, AcknowledgedLabelsSurviveKill) {
  auto state = dir_ / "state";
  {
    test::ServeProcess serve(state);
    json batch = {{"items", {{{"sample_id", "a"}, {"prompt", "p"}, {"audio", "a.wav"}},
                             {{"sample_id", "b"}, {"prompt", "q"}, {"audio", "b.wav"}}}}};
    ASSERT_EQ(test::HttpPost(serve.port(), "/api/queue", batch.dump()).status, 200);
    test::HttpGet(serve.port(), "/api/queue/next?reviewer=r1");
    json label = {{"sample_id", "a"}, {"reviewer_id", "r1"}, {"label", 1}, {"elapsed_ms", 1}};
    ASSERT_EQ(test::HttpPost(serve.port(), "/api/labels", label.dump()).status, 200);
    serve.Kill();
  }
  test::ServeProcess serve(state);
  json progress = json::parse(test::HttpGet(serve.port(), "/api/progress").body);
  EXPECT_EQ(progress["labeled"], 1);
  EXPECT_EQ(progress["pending"], 1);
}

TEST_F(ServeTest, CrashAfterAppendKeepsTheWrite) {
  auto state = dir_ / "state";
  {
    test::ServeProcess serve(state, {}, {"CROWDVAL_CRASH_AFTER_APPEND=2"});
    json batch = {{"items", {{{"sample_id", "a"}, {"prompt", "p"}, {"audio", "a.wav"}}}}};
    ASSERT_EQ(test::HttpPost(serve.port(), "/api/queue", batch.dump()).status, 200);
    test::HttpGet(serve.port(), "/api/queue/next?reviewer=r1");
    json label = {{"sample_id", "a"}, {"reviewer_id", "r1"}, {"label", 0}, {"elapsed_ms", 1}};
    EXPECT_EQ(test::HttpPost(serve.port(), "/api/labels", label.dump()).status, 0);
    EXPECT_EQ(serve.Wait(), 86);
  }
  test::ServeProcess serve(state);
  json label = {{"sample_id", "a"}, {"reviewer_id", "r1"}, {"label", 0}, {"elapsed_ms", 1}};
  auto retry = test::HttpPost(serve.port(), "/api/labels", label.dump());
  EXPECT_EQ(json::parse(retry.body)["status"], "duplicate") << retry.body;
}

}  // namespace
}  // namespace crowdval
