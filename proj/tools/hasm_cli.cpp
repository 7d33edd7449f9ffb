// Command-line front end; talks to the library only through hasm.h.

#include <csignal>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <chrono>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "hasm/hasm.h"

namespace {

// Exit codes: 0 success, 2 configuration or usage error, 3 data error,
// 1 anything else (I/O, internal).
int exit_code(hasm_status s) {
  switch (s) {
    case HASM_OK: return 0;
    case HASM_ERR_CONFIG:
    case HASM_ERR_INVALID_ARGUMENT: return 2;
    case HASM_ERR_DATA:
    case HASM_ERR_DIMENSION: return 3;
    default: return 1;
  }
}

struct Failure {
  hasm_status status;
};

void check(hasm_status s) {
  if (s != HASM_OK) {
    std::fprintf(stderr, "hasm: %s: %s\n", hasm_status_name(s), hasm_last_error());
    throw Failure{s};
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "hasm: cannot read %s\n", path.c_str());
    throw Failure{HASM_ERR_IO};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Config {
 public:
  Config(const std::string& path, std::optional<std::uint64_t> seed, std::optional<double> beta) {
    if (path.empty()) {
      check(hasm_config_default(&ptr_));
    } else {
      check(hasm_config_load(path.c_str(), &ptr_));
    }
    if (seed) check(hasm_config_set_seed(ptr_, *seed));
    if (beta) check(hasm_config_set_beta(ptr_, *beta));
  }
  ~Config() { hasm_config_free(ptr_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
  hasm_config* get() const { return ptr_; }

 private:
  hasm_config* ptr_ = nullptr;
};

class Banks {
 public:
  Banks(const Config& cfg, const std::vector<std::string>& paths) {
    for (const auto& p : paths) {
      hasm_bank* b = nullptr;
      check(hasm_bank_load(cfg.get(), p.c_str(), &b));
      banks_.push_back(b);
    }
  }
  ~Banks() {
    for (auto* b : banks_) hasm_bank_free(b);
  }
  Banks(const Banks&) = delete;
  Banks& operator=(const Banks&) = delete;
  const hasm_bank* const* data() const { return banks_.data(); }
  std::size_t size() const { return banks_.size(); }
  hasm_bank* operator[](std::size_t i) const { return banks_[i]; }

 private:
  std::vector<hasm_bank*> banks_;
};

// Adds key=value to a JSON options object given as text.
std::string with_option(const std::string& options, const char* key, const std::string& value) {
  nlohmann::json doc = nlohmann::json::object();
  if (!options.empty()) {
    try {
      doc = nlohmann::json::parse(options);
    } catch (const nlohmann::json::parse_error& e) {
      std::fprintf(stderr, "hasm: options are not valid JSON: %s\n", e.what());
      throw Failure{HASM_ERR_INVALID_ARGUMENT};
    }
  }
  if (!doc.is_object()) {
    std::fprintf(stderr, "hasm: options must be a JSON object\n");
    throw Failure{HASM_ERR_INVALID_ARGUMENT};
  }
  doc[key] = value;
  return doc.dump();
}

void print_metrics(const hasm_eval_metrics& m) {
  std::printf("ticks %zu, recalls %zu\n", m.ticks, m.recalls);
  if (m.recalls > 0) {
    std::printf("weights entropy: mean %.6g, min %.6g, max %.6g\n", m.entropy_mean, m.entropy_min, m.entropy_max);
  }
  if (!std::isnan(m.replay_max_error)) {
    std::printf("sequence replay: max joint error %.6g rad (%.3f x quantization resolution), %zu steps, %zu missed\n",
                m.replay_max_error, m.replay_worst_ratio, m.replay_steps, m.replay_missed);
  }
  if (!std::isnan(m.spearman) || m.compliance_increasing || m.compliance_opposite_signs) {
    std::printf("force-velocity Spearman: %.6g, strictly increasing: %s, opposite patch flips sign: %s\n", m.spearman,
                m.compliance_increasing ? "yes" : "no", m.compliance_opposite_signs ? "yes" : "no");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hetero-associative sequential memory: record, train, eval, serve, replay"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> beta;
  std::string out;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--beta", beta, "Softmax inverse temperature (overrides the config)");
  app.add_option("--out", out, "Output path");

  auto* record = app.add_subcommand("record", "Write a recording for a scripted scenario");
  std::string scenario;
  std::string options;
  std::string script;
  std::string patch;
  record->add_option("scenario", scenario, "compliance-sweep | grasp-sequence | custom-script")->required();
  record->add_option("--options", options, "Scenario options as inline JSON");
  record->add_option("--script", script, "Scenario options from a JSON file")->check(CLI::ExistingFile);
  record->add_option("--patch", patch, "Patch that receives the touch");

  auto* train = app.add_subcommand("train", "Train a memory bank from recordings");
  std::vector<std::string> recordings;
  train->add_option("--recording", recordings, "Recording file (repeatable)")->required();
  train->add_option("--patch", patch, "Patch the bank serves")->required();

  auto* eval = app.add_subcommand("eval", "Run a closed-loop evaluation and print metrics");
  std::vector<std::string> bank_paths;
  std::string recording;
  eval->add_option("--bank", bank_paths, "Bank file (repeatable)");
  eval->add_option("--scenario", scenario, "compliance | sequence | script")->required();
  eval->add_option("--recording", recording, "Recording for the sequence scenario");
  eval->add_option("--options", options, "Scenario options as inline JSON");
  eval->add_option("--script", script, "Scenario options from a JSON file")->check(CLI::ExistingFile);

  auto* serve = app.add_subcommand("serve", "Serve a live session over WebSocket");
  std::string address = "127.0.0.1";
  std::uint16_t port = 8765;
  double duration = 0.0;
  serve->add_option("--bank", bank_paths, "Bank file (repeatable)");
  serve->add_option("--address", address, "Bind address");
  serve->add_option("--port", port, "TCP port (0 picks one)");
  serve->add_option("--duration", duration, "Stop after this many seconds (0 runs until SIGINT/SIGTERM)");

  auto* replay = app.add_subcommand("replay", "Drive the closed loop with the forces of a recording");
  replay->add_option("--bank", bank_paths, "Bank file (repeatable)")->required();
  replay->add_option("--recording", recording, "Recording file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (!script.empty()) options = read_file(script);
    Config cfg(config_path, seed, beta);

    if (*record) {
      if (out.empty()) {
        std::fprintf(stderr, "hasm: record needs --out\n");
        return 2;
      }
      if (!patch.empty()) options = with_option(options, "patch", patch);
      std::size_t n = 0;
      check(hasm_record(cfg.get(), scenario.c_str(), options.empty() ? nullptr : options.c_str(), out.c_str(), &n));
      std::printf("wrote %zu samples to %s\n", n, out.c_str());
      return 0;
    }

    if (*train) {
      if (out.empty()) {
        std::fprintf(stderr, "hasm: train needs --out\n");
        return 2;
      }
      std::vector<const char*> paths;
      for (const auto& r : recordings) paths.push_back(r.c_str());
      hasm_train_stats stats{};
      hasm_bank* bank = nullptr;
      const hasm_status s = hasm_train(cfg.get(), paths.data(), paths.size(), patch.c_str(), &stats, &bank);
      std::printf("states %zu, paired %zu, dropped %zu, sequences %zu, episodes %zu\n", stats.states, stats.paired,
                  stats.dropped, stats.sequences, stats.episodes);
      check(s);
      hasm_bank_info info{};
      hasm_status saved = hasm_bank_info_get(bank, &info);
      if (saved == HASM_OK) saved = hasm_bank_save(bank, out.c_str());
      hasm_bank_free(bank);
      check(saved);
      std::printf("K %zu, D %zu, N_J %zu, beta %g, patch %s -> %s\n", info.columns, info.dimension, info.joints,
                  info.beta, info.patch_id, out.c_str());
      return 0;
    }

    if (*eval) {
      Banks banks(cfg, bank_paths);
      if (!recording.empty()) options = with_option(options, "recording", recording);
      hasm_eval_metrics m{};
      check(hasm_eval(cfg.get(), banks.data(), banks.size(), scenario.c_str(),
                      options.empty() ? nullptr : options.c_str(), out.empty() ? nullptr : out.c_str(), &m));
      print_metrics(m);
      return 0;
    }

    if (*replay) {
      Banks banks(cfg, bank_paths);
      hasm_eval_metrics m{};
      check(hasm_replay(cfg.get(), banks.data(), banks.size(), recording.c_str(), out.empty() ? nullptr : out.c_str(),
                        &m));
      print_metrics(m);
      return 0;
    }

    if (*serve) {
      // Block the stop signals before any worker thread exists so that only
      // sigwait below sees them.
      sigset_t stop_signals;
      sigemptyset(&stop_signals);
      sigaddset(&stop_signals, SIGINT);
      sigaddset(&stop_signals, SIGTERM);
      if (duration <= 0.0) pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

      Banks banks(cfg, bank_paths);
      hasm_session* session = nullptr;
      check(hasm_session_create(cfg.get(), &session));
      for (std::size_t i = 0; i < banks.size(); ++i) {
        const hasm_status s = hasm_session_load_bank(session, banks[i]);
        if (s != HASM_OK) hasm_session_free(session);
        check(s);
      }
      const hasm_status started = hasm_session_start(session, address.c_str(), port);
      if (started != HASM_OK) hasm_session_free(session);
      check(started);
      std::uint16_t bound = 0;
      hasm_session_port(session, &bound);
      std::printf("serving ws://%s:%u/session and http://%s:%u/healthz\n", address.c_str(), bound, address.c_str(),
                  bound);
      std::fflush(stdout);
      if (duration > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(duration));
      } else {
        int sig = 0;
        sigwait(&stop_signals, &sig);
      }
      std::uint64_t ticks = 0;
      hasm_session_tick_count(session, &ticks);
      hasm_session_stop(session);
      hasm_session_free(session);
      std::printf("stopped after %llu ticks\n", static_cast<unsigned long long>(ticks));
      return 0;
    }
  } catch (const Failure& f) {
    return exit_code(f.status);
  }
  return 0;
}
