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

#include "splitpub/broker.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include "splitpub/errors.h"

namespace splitpub {
namespace {

void PutU64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t GetU64(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
  }
  return v;
}

constexpr std::size_t kHeaderBytes = 16;

}  // namespace

const char* MessageKindName(MessageKind kind) {
  return kind == MessageKind::kEmbedding ? "embedding" : "gradient";
}

std::vector<std::uint8_t> EncodePayload(const Matrix& m) {
  std::vector<std::uint8_t> out;
  out.reserve(PayloadWireSize(m));
  PutU64(out, m.rows());
  PutU64(out, m.cols());
  for (double v : m.values()) PutU64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Matrix DecodePayload(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) {
    throw ConfigError("payload shorter than its 16-byte header");
  }
  const std::uint64_t rows = GetU64(bytes, 0);
  const std::uint64_t cols = GetU64(bytes, 8);
  if (cols != 0 && rows > (bytes.size() - kHeaderBytes) / 8 / cols) {
    throw ConfigError("payload header claims more values than present");
  }
  if (bytes.size() != kHeaderBytes + 8 * rows * cols) {
    throw ConfigError("payload length does not match its header");
  }
  std::vector<double> data(rows * cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<double>(GetU64(bytes, kHeaderBytes + 8 * i));
  }
  return Matrix(rows, cols, std::move(data));
}

std::size_t PayloadWireSize(const Matrix& m) { return kHeaderBytes + 8 * m.size(); }

ChannelStats& ChannelStats::operator+=(const ChannelStats& o) {
  published += o.published;
  delivered += o.delivered;
  evicted += o.evicted;
  stale_rejected += o.stale_rejected;
  drained += o.drained;
  residual += o.residual;
  peak_occupancy = std::max(peak_occupancy, o.peak_occupancy);
  return *this;
}

ChannelBuffer::ChannelBuffer(MessageKind kind, std::size_t capacity)
    : kind_(kind), capacity_(capacity) {
  if (capacity == 0) throw ConfigError("channel capacity must be at least 1");
}

bool ChannelBuffer::Push(ChannelMessage message) {
  if (message.kind != kind_) {
    throw ConfigError(std::string("a ") + MessageKindName(message.kind) +
                      " message cannot go to a " + MessageKindName(kind_) +
                      " channel");
  }
  bool evicted = false;
  {
    std::lock_guard lock(mu_);
    if (queue_.size() == capacity_) {
      queue_.pop_front();
      ++stats_.evicted;
      evicted = true;
    }
    queue_.push_back(std::move(message));
    ++stats_.published;
    stats_.peak_occupancy = std::max(stats_.peak_occupancy, queue_.size());
  }
  cv_.notify_one();
  return evicted;
}

SubscribeResult ChannelBuffer::Pop(Clock::time_point deadline,
                                   const SubscribeOptions& opts) {
  const Clock::time_point start = Clock::now();
  SubscribeResult result;
  std::unique_lock lock(mu_);
  while (true) {
    cv_.wait_until(lock, deadline, [&] { return cancelled_ || !queue_.empty(); });
    if (cancelled_) {
      result.cancelled = true;
      break;
    }
    if (queue_.empty()) break;  // deadline
    ChannelMessage m = std::move(queue_.front());
    queue_.pop_front();
    if (opts.max_staleness &&
        m.param_version + *opts.max_staleness < opts.subscriber_version) {
      ++stats_.stale_rejected;
      continue;
    }
    ++stats_.delivered;
    result.message = std::move(m);
    break;
  }
  result.waited = Clock::now() - start;
  return result;
}

std::optional<ChannelMessage> ChannelBuffer::TryPop() {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  ChannelMessage m = std::move(queue_.front());
  queue_.pop_front();
  ++stats_.delivered;
  return m;
}

std::vector<ChannelMessage> ChannelBuffer::Drain() {
  std::lock_guard lock(mu_);
  std::vector<ChannelMessage> out(std::make_move_iterator(queue_.begin()),
                                  std::make_move_iterator(queue_.end()));
  queue_.clear();
  stats_.drained += out.size();
  return out;
}

void ChannelBuffer::Cancel() {
  {
    std::lock_guard lock(mu_);
    cancelled_ = true;
  }
  cv_.notify_all();
}

void ChannelBuffer::Reset() {
  std::lock_guard lock(mu_);
  cancelled_ = false;
}

std::size_t ChannelBuffer::size() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

ChannelStats ChannelBuffer::stats() const {
  std::lock_guard lock(mu_);
  ChannelStats s = stats_;
  s.residual = queue_.size();
  return s;
}

Broker::Broker(const BrokerOptions& options) {
  if (options.channel_count == 0) {
    throw ConfigError("broker needs at least one channel");
  }
  embedding_.reserve(options.channel_count);
  gradient_.reserve(options.channel_count);
  for (std::size_t b = 0; b < options.channel_count; ++b) {
    embedding_.push_back(std::make_unique<ChannelBuffer>(
        MessageKind::kEmbedding, options.embedding_capacity));
    gradient_.push_back(std::make_unique<ChannelBuffer>(
        MessageKind::kGradient, options.gradient_capacity));
  }
}

ChannelBuffer& Broker::Channel(MessageKind kind, std::size_t batch_id) {
  if (batch_id >= embedding_.size()) {
    throw ConfigError("unknown batch id " + std::to_string(batch_id) + " (" +
                      std::to_string(embedding_.size()) + " channels)");
  }
  return kind == MessageKind::kEmbedding ? *embedding_[batch_id]
                                         : *gradient_[batch_id];
}

const ChannelBuffer& Broker::channel(MessageKind kind,
                                     std::size_t batch_id) const {
  return const_cast<Broker*>(this)->Channel(kind, batch_id);
}

void Broker::Publish(ChannelMessage message) {
  ChannelBuffer& buffer = Channel(message.kind, message.batch_id);
  if (message.payload.rows() != message.sample_range.size()) {
    throw ConfigError("payload has " + std::to_string(message.payload.rows()) +
                      " rows but its sample range covers " +
                      std::to_string(message.sample_range.size()));
  }
  message.publish_time = Clock::now();
  message.sequence = next_sequence_.fetch_add(1);
  bytes_.fetch_add(PayloadWireSize(message.payload));
  buffer.Push(std::move(message));
}

SubscribeResult Broker::Subscribe(MessageKind kind, std::size_t batch_id,
                                  Clock::duration timeout,
                                  const SubscribeOptions& opts) {
  ChannelBuffer& buffer = Channel(kind, batch_id);
  return buffer.Pop(Clock::now() + timeout, opts);
}

std::size_t Broker::DrainAll() {
  std::size_t n = 0;
  for (auto& c : embedding_) n += c->Drain().size();
  for (auto& c : gradient_) n += c->Drain().size();
  return n;
}

void Broker::Cancel() {
  for (auto& c : embedding_) c->Cancel();
  for (auto& c : gradient_) c->Cancel();
}

BrokerStats Broker::stats() const {
  BrokerStats s;
  for (const auto& c : embedding_) s.embedding += c->stats();
  for (const auto& c : gradient_) s.gradient += c->stats();
  s.bytes_published = bytes_.load();
  return s;
}

std::size_t ChannelCountFor(std::size_t n, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  return (n + batch_size - 1) / batch_size;
}

}  // namespace splitpub
