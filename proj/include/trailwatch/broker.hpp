#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "trailwatch/error.hpp"
#include "trailwatch/messages.hpp"

namespace trailwatch {

/// In-process topic bus. Bounded per-subscriber queues; publish blocks while
/// any subscriber of the topic is full (backpressure), so a fixed-size buffer
/// bounds memory under bursty emission. Messages fan out to every subscriber
/// registered at publish time, FIFO per topic, exactly once.
class Broker {
  struct Queue {
    explicit Queue(std::size_t cap) : capacity(cap) {}
    std::size_t capacity;
    std::deque<Message> items;
    bool detached = false;
  };

  struct State {
    std::mutex mu;
    std::condition_variable cv;
    bool closed = false;
    std::uint64_t next_sequence[kTopicCount] = {};
    std::vector<std::shared_ptr<Queue>> subscribers[kTopicCount];
  };

 public:
  static constexpr std::size_t kDefaultCapacity = 4096;

  /// Pull side of one subscription. Destroying it detaches the queue so a
  /// slow or abandoned consumer cannot wedge publishers forever.
  class Subscription {
   public:
    Subscription(std::shared_ptr<State> st, std::shared_ptr<Queue> q)
        : state_(std::move(st)), queue_(std::move(q)) {}

    Subscription(Subscription&&) = default;
    Subscription& operator=(Subscription&&) = default;
    Subscription(const Subscription&) = delete;
    Subscription& operator=(const Subscription&) = delete;

    ~Subscription() {
      if (!state_ || !queue_) return;
      std::lock_guard<std::mutex> lk(state_->mu);
      queue_->detached = true;
      queue_->items.clear();
      state_->cv.notify_all();
    }

    /// Non-blocking pop; empty optional when nothing is pending.
    std::optional<Message> try_pop() {
      std::lock_guard<std::mutex> lk(state_->mu);
      if (queue_->items.empty()) return std::nullopt;
      Message m = std::move(queue_->items.front());
      queue_->items.pop_front();
      state_->cv.notify_all();
      return m;
    }

    /// Blocking pop; empty optional once the broker is closed and drained.
    std::optional<Message> pop() {
      std::unique_lock<std::mutex> lk(state_->mu);
      state_->cv.wait(lk, [&] { return !queue_->items.empty() || state_->closed; });
      if (queue_->items.empty()) return std::nullopt;
      Message m = std::move(queue_->items.front());
      queue_->items.pop_front();
      state_->cv.notify_all();
      return m;
    }

    std::size_t pending() const {
      std::lock_guard<std::mutex> lk(state_->mu);
      return queue_->items.size();
    }

   private:
    std::shared_ptr<State> state_;
    std::shared_ptr<Queue> queue_;
  };

  Broker() : state_(std::make_shared<State>()) {}

  /// Stamp the per-topic sequence and enqueue for all current subscribers.
  void publish(Message m) {
    std::unique_lock<std::mutex> lk(state_->mu);
    if (state_->closed) throw BrokerClosedError("publish on closed broker");
    const int t = static_cast<int>(m.topic);
    m.sequence = state_->next_sequence[t]++;
    auto& subs = state_->subscribers[t];
    for (std::size_t i = 0; i < subs.size(); ++i) {
      auto& q = subs[i];
      if (q->detached) continue;
      state_->cv.wait(lk, [&] {
        return state_->closed || q->detached || q->items.size() < q->capacity;
      });
      if (state_->closed) throw BrokerClosedError("broker closed while publishing");
      if (q->detached) continue;
      q->items.push_back(m);
    }
    state_->cv.notify_all();
  }

  Subscription subscribe(Topic t, std::size_t capacity = kDefaultCapacity) {
    if (capacity == 0) throw std::invalid_argument("subscription capacity must be positive");
    std::lock_guard<std::mutex> lk(state_->mu);
    if (state_->closed) throw BrokerClosedError("subscribe on closed broker");
    auto q = std::make_shared<Queue>(capacity);
    state_->subscribers[static_cast<int>(t)].push_back(q);
    return Subscription(state_, q);
  }

  /// Stop accepting publishes; pending messages remain consumable.
  void close() {
    std::lock_guard<std::mutex> lk(state_->mu);
    state_->closed = true;
    state_->cv.notify_all();
  }

  bool closed() const {
    std::lock_guard<std::mutex> lk(state_->mu);
    return state_->closed;
  }

 private:
  std::shared_ptr<State> state_;
};

}  // namespace trailwatch
