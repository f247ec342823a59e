// Copyright 2026 The splitpub Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <chrono>
#include <set>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "splitpub/broker.h"
#include "splitpub/errors.h"

namespace splitpub {
namespace {

using namespace std::chrono_literals;

ChannelMessage Embedding(std::size_t batch_id, double tag, std::size_t rows = 1) {
  ChannelMessage m;
  m.batch_id = batch_id;
  m.kind = MessageKind::kEmbedding;
  m.payload = Matrix(rows, 2, tag);
  m.sample_range = {0, rows};
  return m;
}

TEST(PayloadTest, EncodeDecodeRoundTrip) {
  const Matrix m = Matrix::FromRows({{1.5, -2.0, 3.25}, {0.0, 1e-300, -7.0}});
  const std::vector<std::uint8_t> bytes = EncodePayload(m);
  EXPECT_EQ(bytes.size(), PayloadWireSize(m));
  EXPECT_EQ(bytes.size(), 16u + 8u * 6u);
  EXPECT_EQ(bytes[0], 2u);  // rows, little-endian
  EXPECT_EQ(bytes[8], 3u);  // cols
  EXPECT_EQ(DecodePayload(bytes), m);
}

TEST(PayloadTest, RejectsTruncatedAndInconsistentBytes) {
  std::vector<std::uint8_t> bytes = EncodePayload(Matrix(2, 2, 1.0));
  EXPECT_THROW(DecodePayload(std::span(bytes).first(10)), ConfigError);
  bytes.pop_back();
  EXPECT_THROW(DecodePayload(bytes), ConfigError);
}

TEST(ChannelBufferTest, PublishToEmptyBufferHoldsOne) {
  ChannelBuffer buf(MessageKind::kEmbedding, 5);
  EXPECT_FALSE(buf.Push(Embedding(0, 1.0)));
  EXPECT_EQ(buf.size(), 1u);
}

TEST(ChannelBufferTest, SixIntoFiveEvictsTheOldest) {
  ChannelBuffer buf(MessageKind::kEmbedding, 5);
  for (int k = 1; k <= 6; ++k) buf.Push(Embedding(0, k));
  EXPECT_EQ(buf.size(), 5u);
  EXPECT_EQ(buf.stats().evicted, 1u);
  for (int k = 2; k <= 6; ++k) {
    auto m = buf.TryPop();
    ASSERT_TRUE(m);
    EXPECT_EQ(m->payload(0, 0), k);
  }
  EXPECT_FALSE(buf.TryPop());
}

TEST(ChannelBufferTest, RejectsWrongKindAndZeroCapacity) {
  EXPECT_THROW(ChannelBuffer(MessageKind::kGradient, 0), ConfigError);
  ChannelBuffer buf(MessageKind::kGradient, 2);
  EXPECT_THROW(buf.Push(Embedding(0, 1.0)), ConfigError);
}

TEST(ChannelBufferTest, StalenessGuardDropsOldMessages) {
  ChannelBuffer buf(MessageKind::kEmbedding, 5);
  ChannelMessage old = Embedding(0, 1.0);
  old.param_version = 1;
  ChannelMessage fresh = Embedding(0, 2.0);
  fresh.param_version = 9;
  buf.Push(old);
  buf.Push(fresh);
  SubscribeOptions opts;
  opts.max_staleness = 2;
  opts.subscriber_version = 10;
  const SubscribeResult r = buf.Pop(Clock::now() + 10ms, opts);
  ASSERT_TRUE(r.message);
  EXPECT_EQ(r.message->payload(0, 0), 2.0);
  EXPECT_EQ(buf.stats().stale_rejected, 1u);
}

TEST(ChannelBufferTest, CancelWakesBlockedSubscriber) {
  ChannelBuffer buf(MessageKind::kEmbedding, 5);
  std::thread t([&] {
    std::this_thread::sleep_for(20ms);
    buf.Cancel();
  });
  const SubscribeResult r = buf.Pop(Clock::now() + 5s, {});
  t.join();
  EXPECT_TRUE(r.cancelled);
  EXPECT_LT(r.waited, 2s);
  buf.Reset();
  buf.Push(Embedding(0, 1.0));
  EXPECT_TRUE(buf.Pop(Clock::now() + 10ms, {}).message);
}

TEST(BrokerTest, BufferedMessageReturnsAtOnce) {
  Broker broker({1, 5, 5});
  broker.Publish(Embedding(0, 3.0));
  const SubscribeResult r = broker.Subscribe(MessageKind::kEmbedding, 0, 10s);
  ASSERT_TRUE(r.message);
  EXPECT_LT(r.waited, 50ms);
}

TEST(BrokerTest, DeadlineExpiresWithinJitterBudget) {
  Broker broker({1, 5, 5});
  const auto start = Clock::now();
  const SubscribeResult r = broker.Subscribe(MessageKind::kEmbedding, 0, 50ms);
  const auto elapsed = Clock::now() - start;
  EXPECT_TRUE(r.expired());
  EXPECT_FALSE(r.cancelled);
  EXPECT_GE(elapsed, 50ms);
  EXPECT_LT(elapsed, 150ms);
}

TEST(BrokerTest, ChannelsAreIsolated) {
  Broker broker({2, 5, 5});
  for (int k = 0; k < 4; ++k) broker.Publish(Embedding(k % 2, k % 2 ? 10.0 + k : k));
  for (int k = 0; k < 2; ++k) {
    auto r = broker.Subscribe(MessageKind::kEmbedding, 0, 1ms);
    ASSERT_TRUE(r.message);
    EXPECT_EQ(r.message->batch_id, 0u);
    EXPECT_LT(r.message->payload(0, 0), 10.0);
  }
  EXPECT_TRUE(broker.Subscribe(MessageKind::kEmbedding, 0, 1ms).expired());
  EXPECT_TRUE(broker.Subscribe(MessageKind::kGradient, 1, 1ms).expired());
  EXPECT_EQ(broker.channel(MessageKind::kEmbedding, 1).size(), 2u);
}

TEST(BrokerTest, PublishValidatesIdAndRows) {
  Broker broker({2, 5, 5});
  EXPECT_THROW(broker.Publish(Embedding(2, 1.0)), ConfigError);
  ChannelMessage m = Embedding(0, 1.0, 3);
  m.sample_range = {0, 2};
  EXPECT_THROW(broker.Publish(m), ConfigError);
  EXPECT_THROW(Broker({0, 5, 5}), ConfigError);
}

TEST(BrokerTest, StampsSequenceAndCountsBytes) {
  Broker broker({1, 5, 5});
  broker.Publish(Embedding(0, 1.0, 4));
  broker.Publish(Embedding(0, 2.0, 4));
  auto a = broker.Subscribe(MessageKind::kEmbedding, 0, 1ms);
  auto b = broker.Subscribe(MessageKind::kEmbedding, 0, 1ms);
  ASSERT_TRUE(a.message && b.message);
  EXPECT_LT(a.message->sequence, b.message->sequence);
  EXPECT_LE(a.message->publish_time, b.message->publish_time);
  EXPECT_EQ(broker.bytes_published(), 2u * (16u + 8u * 8u));
}

TEST(BrokerTest, DrainAllEmptiesEveryChannel) {
  Broker broker({3, 5, 5});
  for (std::size_t b = 0; b < 3; ++b) broker.Publish(Embedding(b, 1.0));
  EXPECT_EQ(broker.DrainAll(), 3u);
  EXPECT_EQ(broker.stats().residual(), 0u);
  EXPECT_EQ(broker.stats().drained(), 3u);
}

TEST(BrokerTest, ConcurrentPublishSubscribeConserves) {
  constexpr std::size_t kChannels = 4;
  constexpr int kPerPublisher = 500;
  Broker broker({kChannels, 5, 5});
  std::atomic<bool> done{false};
  std::vector<std::thread> threads;
  std::vector<std::vector<double>> got(4);
  for (int p = 0; p < 4; ++p) {
    threads.emplace_back([&, p] {
      for (int k = 0; k < kPerPublisher; ++k) {
        broker.Publish(Embedding((p + k) % kChannels, p * 100000 + k));
      }
    });
  }
  for (int s = 0; s < 4; ++s) {
    threads.emplace_back([&, s] {
      while (!done.load()) {
        auto r = broker.Subscribe(MessageKind::kEmbedding, s % kChannels, 1ms);
        if (r.message) got[s].push_back(r.message->payload(0, 0));
      }
    });
  }
  for (int p = 0; p < 4; ++p) threads[p].join();
  done = true;
  for (std::size_t t = 4; t < threads.size(); ++t) threads[t].join();
  const BrokerStats st = broker.stats();
  EXPECT_EQ(st.published(), 4u * kPerPublisher);
  EXPECT_EQ(st.published(), st.delivered() + st.evicted() + st.residual());
  std::set<double> unique;
  std::size_t total = 0;
  for (const auto& g : got) {
    unique.insert(g.begin(), g.end());
    total += g.size();
  }
  EXPECT_EQ(unique.size(), total);
  EXPECT_LE(st.embedding.peak_occupancy, 5u);
}

TEST(ChannelCountTest, CeilingCases) {
  EXPECT_EQ(ChannelCountFor(1000, 256), 4u);
  EXPECT_EQ(ChannelCountFor(60021, 512), 118u);
  EXPECT_EQ(ChannelCountFor(777, 777), 1u);
  EXPECT_THROW(ChannelCountFor(10, 0), ConfigError);
}

}  // namespace
}  // namespace splitpub
