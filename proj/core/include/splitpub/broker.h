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

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "splitpub/tensor.h"

namespace splitpub {

using Clock = std::chrono::steady_clock;

enum class MessageKind { kEmbedding, kGradient };

const char* MessageKindName(MessageKind kind);

// [begin, end) offsets into the epoch's batch order. Two messages refer to
// the same samples iff epoch and range agree.
struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const SampleRange&, const SampleRange&) = default;
};

// The unit of inter-party exchange: an embedding (passive -> active) or a
// cut-layer gradient (active -> passive) for one batch id.
struct ChannelMessage {
  std::size_t batch_id = 0;
  MessageKind kind = MessageKind::kEmbedding;
  Matrix payload;
  SampleRange sample_range;
  std::size_t epoch = 0;
  std::size_t sender_worker = 0;
  Clock::time_point publish_time{};
  std::uint64_t param_version = 0;
  // Set once privacy noise has been added to the payload.
  bool noise_applied = false;
  // Stamped by the broker; unique per broker, increasing in publish order.
  std::uint64_t sequence = 0;
};

// Wire format used for byte accounting: rows and cols as little-endian
// uint64, then rows * cols little-endian IEEE-754 doubles in row-major order.
std::vector<std::uint8_t> EncodePayload(const Matrix& m);
Matrix DecodePayload(std::span<const std::uint8_t> bytes);
// Size of EncodePayload(m) without building it.
std::size_t PayloadWireSize(const Matrix& m);

struct SubscribeOptions {
  // Staleness guard: when set, messages whose param_version is more than
  // this many versions behind `subscriber_version` are dropped unread.
  std::optional<std::uint64_t> max_staleness;
  std::uint64_t subscriber_version = 0;
};

struct SubscribeResult {
  std::optional<ChannelMessage> message;  // empty: deadline expired
  Clock::duration waited{};
  bool cancelled = false;

  bool expired() const { return !message.has_value(); }
};

struct ChannelStats {
  std::uint64_t published = 0;
  std::uint64_t delivered = 0;
  std::uint64_t evicted = 0;
  std::uint64_t stale_rejected = 0;
  std::uint64_t drained = 0;
  std::size_t residual = 0;
  std::size_t peak_occupancy = 0;

  ChannelStats& operator+=(const ChannelStats& o);
};

// Bounded timestamped FIFO. Publishing into a full buffer evicts the oldest
// entry first. All operations lock only this buffer.
class ChannelBuffer {
 public:
  ChannelBuffer(MessageKind kind, std::size_t capacity);

  ChannelBuffer(const ChannelBuffer&) = delete;
  ChannelBuffer& operator=(const ChannelBuffer&) = delete;

  // Returns true if an older message was evicted to make room.
  bool Push(ChannelMessage message);
  // Blocks until a message is available, `deadline` passes, or Cancel().
  SubscribeResult Pop(Clock::time_point deadline, const SubscribeOptions& opts);
  std::optional<ChannelMessage> TryPop();
  // Removes and returns everything still buffered.
  std::vector<ChannelMessage> Drain();
  void Cancel();
  void Reset();

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const;
  ChannelStats stats() const;

 private:
  const MessageKind kind_;
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<ChannelMessage> queue_;
  ChannelStats stats_;
  bool cancelled_ = false;
};

struct BrokerOptions {
  std::size_t channel_count = 1;
  std::size_t embedding_capacity = 5;  // p
  std::size_t gradient_capacity = 5;   // q
};

struct BrokerStats {
  ChannelStats embedding;
  ChannelStats gradient;
  std::uint64_t bytes_published = 0;

  std::uint64_t published() const { return embedding.published + gradient.published; }
  std::uint64_t delivered() const { return embedding.delivered + gradient.delivered; }
  std::uint64_t evicted() const { return embedding.evicted + gradient.evicted; }
  std::uint64_t stale_rejected() const {
    return embedding.stale_rejected + gradient.stale_rejected;
  }
  std::uint64_t drained() const { return embedding.drained + gradient.drained; }
  std::size_t residual() const { return embedding.residual + gradient.residual; }
};

// In-process publish/subscribe broker with one embedding channel and one
// gradient channel per batch id. Thread-safe; there is no lock spanning
// channels, and a blocked subscriber never holds up publishers on the same
// channel.
class Broker {
 public:
  explicit Broker(const BrokerOptions& options);

  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  // Throws ConfigError for an unknown batch id or a payload whose row count
  // does not match its sample range. Stamps publish_time and sequence.
  void Publish(ChannelMessage message);

  SubscribeResult Subscribe(MessageKind kind, std::size_t batch_id,
                            Clock::duration timeout,
                            const SubscribeOptions& opts = {});

  // Empties every channel; returns how many messages were discarded.
  std::size_t DrainAll();
  // Wakes all blocked subscribers; subsequent subscribes return at once.
  void Cancel();

  std::size_t channel_count() const { return embedding_.size(); }
  const ChannelBuffer& channel(MessageKind kind, std::size_t batch_id) const;
  BrokerStats stats() const;
  std::uint64_t bytes_published() const { return bytes_.load(); }

 private:
  ChannelBuffer& Channel(MessageKind kind, std::size_t batch_id);

  std::vector<std::unique_ptr<ChannelBuffer>> embedding_;
  std::vector<std::unique_ptr<ChannelBuffer>> gradient_;
  std::atomic<std::uint64_t> bytes_{0};
  std::atomic<std::uint64_t> next_sequence_{1};
};

// Number of channels of each kind for n samples at batch size B: ceil(n/B).
std::size_t ChannelCountFor(std::size_t n, std::size_t batch_size);

}  // namespace splitpub
