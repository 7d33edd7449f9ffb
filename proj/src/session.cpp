#include "hasm/session.hpp"

#include "hasm/bank_io.hpp"
#include "hasm/error.hpp"
#include "hasm/log.hpp"

namespace hasm {
namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

Session::Session(AppConfig config, std::uint64_t seed) : config_(config), controller_(std::move(config), seed) {}

Session::~Session() { stop(); }

void Session::submit(wire::ClientMessage msg, Reply reply) {
  std::lock_guard lock(queue_mu_);
  queue_.push_back({std::move(msg), std::move(reply)});
}

void Session::set_observer(Observer observer) {
  std::lock_guard lock(observer_mu_);
  observer_ = std::move(observer);
}

void Session::load_bank(MemoryBank bank) { controller_.load_bank(std::move(bank)); }

wire::Hello Session::hello() const {
  wire::Hello h;
  for (const auto& j : config_.joints) h.joints.push_back(j.name);
  for (const auto& p : config_.patches) h.patches.push_back(p.id);
  h.tick_rate_hz = config_.tick_rate_hz;
  return h;
}

void Session::apply(const Pending& p) {
  struct Visitor {
    Session& s;
    void operator()(const wire::Touch& t) {
      s.config_.patch_index(t.patch_id);
      if (t.pressed) {
        s.held_[t.patch_id] = t.magnitude;
      } else {
        s.held_.erase(t.patch_id);
      }
    }
    void operator()(const wire::LoadBank& l) { s.controller_.load_bank(hasm::load_bank(l.path, s.config_.encoder())); }
    void operator()(const wire::Reset& r) {
      JointAngles start = s.config_.home();
      if (r.angles) {
        if (r.angles->size() != s.config_.joints.size()) fail(ErrorKind::data, "reset: wrong number of angles");
        start = Eigen::Map<const Eigen::VectorXd>(r.angles->data(), static_cast<Eigen::Index>(r.angles->size()));
      }
      s.held_.clear();
      s.controller_.reset(start);
    }
    void operator()(const wire::SetBeta& b) { s.controller_.set_beta(b.beta); }
  };
  try {
    std::visit(Visitor{*this}, p.msg);
    if (p.reply && !std::holds_alternative<wire::Touch>(p.msg)) p.reply(wire::Ack{std::string(wire::type_name(p.msg))});
  } catch (const Error& e) {
    if (p.reply) p.reply(wire::ErrorReply{e.what()});
  }
}

wire::Tick Session::step() {
  std::deque<Pending> batch;
  {
    std::lock_guard lock(queue_mu_);
    batch.swap(queue_);
  }
  for (const auto& p : batch) apply(p);

  std::vector<double> mags(config_.patches.size(), 0.0);
  for (const auto& [id, m] : held_) mags[config_.patch_index(id)] = m;
  const TrajectoryRow row = controller_.tick(mags);

  wire::Tick msg;
  msg.tick = row.tick;
  msg.t = row.t;
  msg.angles = to_vector(controller_.world().angles());
  msg.f_total = row.f_total;
  if (row.active_patch >= 0) msg.active_patch = config_.patches[static_cast<std::size_t>(row.active_patch)].id;
  if (row.target) msg.target = to_vector(*row.target);
  msg.entropy = row.entropy;
  msg.beta = controller_.beta_override();
  ticks_.store(row.tick + 1);

  Observer observer;
  {
    std::lock_guard lock(observer_mu_);
    observer = observer_;
  }
  if (observer) observer(wire::serialize(wire::ServerMessage{msg}));
  return msg;
}

void Session::start() {
  if (running_.exchange(true)) return;
  thread_ = std::thread([this] { loop(); });
}

void Session::stop() {
  if (!running_.exchange(false)) return;
  wake_.notify_all();
  if (thread_.joinable()) thread_.join();
}

std::vector<double> Session::tick_periods() const {
  std::lock_guard lock(stats_mu_);
  return {periods_.begin(), periods_.end()};
}

void Session::loop() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(config_.tick_period()));
  auto next = clock::now();
  std::optional<clock::time_point> last;
  while (running_.load()) {
    const auto now = clock::now();
    if (last) {
      std::lock_guard lock(stats_mu_);
      periods_.push_back(std::chrono::duration<double>(now - *last).count());
      if (periods_.size() > 4096) periods_.pop_front();
    }
    last = now;
    try {
      step();
    } catch (const std::exception& e) {
      log_warning(std::string("session tick failed: ") + e.what());
    }
    next += period;
    // After a long stall, resume the cadence from now instead of bursting.
    if (clock::now() > next + period) next = clock::now();
    std::unique_lock lock(wake_mu_);
    wake_.wait_until(lock, next, [this] { return !running_.load(); });
  }
}

}  // namespace hasm
