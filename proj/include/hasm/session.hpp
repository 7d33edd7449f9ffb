#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "hasm/config.hpp"
#include "hasm/controller.hpp"
#include "hasm/protocol.hpp"

namespace hasm {

// One authoritative tick loop. Commands from any thread are queued in order
// and applied at the next tick boundary; tick messages go to the observer
// from the loop thread, which must not block.
class Session {
 public:
  using Reply = std::function<void(const wire::ServerMessage&)>;
  using Observer = std::function<void(const std::string& tick_message)>;

  Session(AppConfig config, std::uint64_t seed);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  void submit(wire::ClientMessage msg, Reply reply = {});
  void set_observer(Observer observer);

  // Loads a bank right away (outside the tick loop); used before start().
  void load_bank(MemoryBank bank);

  wire::Hello hello() const;

  // Runs one tick on the calling thread. Not to be mixed with start().
  wire::Tick step();

  void start();
  void stop();
  bool running() const { return running_.load(); }

  std::uint64_t tick_count() const { return ticks_.load(); }

  // Wall-clock periods between the starts of consecutive ticks (most recent
  // 4096), for cadence checks.
  std::vector<double> tick_periods() const;

 private:
  struct Pending {
    wire::ClientMessage msg;
    Reply reply;
  };

  void apply(const Pending& p);
  void loop();

  AppConfig config_;
  Controller controller_;
  std::map<std::string, double> held_;

  mutable std::mutex queue_mu_;
  std::deque<Pending> queue_;

  mutable std::mutex observer_mu_;
  Observer observer_;

  mutable std::mutex stats_mu_;
  std::deque<double> periods_;

  std::atomic<std::uint64_t> ticks_{0};
  std::atomic<bool> running_{false};
  std::mutex wake_mu_;
  std::condition_variable wake_;
  std::thread thread_;
};

}  // namespace hasm
