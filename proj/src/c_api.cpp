#include "hasm/hasm.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <set>
#include <string>

#include <json.hpp>

#include "hasm/bank_io.hpp"
#include "hasm/config.hpp"
#include "hasm/controller.hpp"
#include "hasm/error.hpp"
#include "hasm/memory.hpp"
#include "hasm/recording.hpp"
#include "hasm/rope3d.hpp"
#include "hasm/scenarios.hpp"
#include "hasm/server.hpp"
#include "hasm/session.hpp"
#include "hasm/sim.hpp"

struct hasm_config {
  hasm::AppConfig config;
};

struct hasm_bank {
  hasm::MemoryBank bank;
};

struct hasm_session {
  std::unique_ptr<hasm::Session> session;
  std::unique_ptr<hasm::Server> server;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

hasm_status to_status(hasm::ErrorKind kind) {
  switch (kind) {
    case hasm::ErrorKind::invalid_argument: return HASM_ERR_INVALID_ARGUMENT;
    case hasm::ErrorKind::config: return HASM_ERR_CONFIG;
    case hasm::ErrorKind::data: return HASM_ERR_DATA;
    case hasm::ErrorKind::dimension: return HASM_ERR_DIMENSION;
    case hasm::ErrorKind::io: return HASM_ERR_IO;
    case hasm::ErrorKind::state: return HASM_ERR_STATE;
  }
  return HASM_ERR_INTERNAL;
}

template <typename F>
hasm_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return HASM_OK;
  } catch (const hasm::Error& e) {
    g_last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return HASM_ERR_INTERNAL;
}

template <typename T>
void need(const T* p, const char* what) {
  if (!p) hasm::fail(hasm::ErrorKind::invalid_argument, std::string(what) + " must not be NULL");
}

json options_from(const char* text) {
  if (!text || !*text) return json::object();
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) hasm::fail(hasm::ErrorKind::invalid_argument, "options must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    hasm::fail(hasm::ErrorKind::invalid_argument, std::string("options: ") + e.what());
  }
}

hasm::JointAngles angles_from(const json& doc, const char* what) {
  if (!doc.is_array()) hasm::fail(hasm::ErrorKind::invalid_argument, std::string(what) + " must be an array");
  hasm::JointAngles x(static_cast<Eigen::Index>(doc.size()));
  for (std::size_t i = 0; i < doc.size(); ++i) x[static_cast<Eigen::Index>(i)] = doc[i].get<double>();
  return x;
}

hasm::JointAngles angles_from(const double* p, std::size_t n) {
  return Eigen::Map<const Eigen::VectorXd>(p, static_cast<Eigen::Index>(n));
}

hasm::SequenceSpec sequence_from(const json& o, const hasm::SequenceSpec& fallback) {
  hasm::SequenceSpec spec = fallback;
  if (o.contains("waypoints")) {
    spec.waypoints.clear();
    for (const auto& w : o.at("waypoints")) spec.waypoints.push_back(angles_from(w, "waypoint"));
  }
  spec.segment_ticks = o.value("segment_ticks", spec.segment_ticks);
  spec.patch = o.value("patch", spec.patch);
  spec.magnitude = o.value("magnitude", spec.magnitude);
  return spec;
}

hasm::SweepSpec sweep_from(const json& o) {
  hasm::SweepSpec spec;
  spec.joint = o.at("joint").get<std::string>();
  spec.direction = o.value("direction", -1);
  spec.patch = o.at("patch").get<std::string>();
  for (const auto& seg : o.at("profile")) {
    spec.profile.push_back({seg.at("magnitude").get<double>(), seg.at("duration").get<double>()});
  }
  if (o.contains("start")) spec.start = angles_from(o.at("start"), "start");
  return spec;
}

hasm::ComplianceSetup compliance_from(const json& o) {
  hasm::ComplianceSetup s;
  s.joint = o.value("joint", s.joint);
  s.negative_patch = o.value("negative_patch", s.negative_patch);
  s.positive_patch = o.value("positive_patch", s.positive_patch);
  s.train_levels = o.value("levels", s.train_levels);
  s.repetitions = o.value("repetitions", s.repetitions);
  s.eval_levels = o.value("eval_levels", s.eval_levels);
  s.eval_duration = o.value("duration", s.eval_duration);
  return s;
}

hasm::Recording record_scenario(const hasm::AppConfig& cfg, const std::string& scenario, const json& o) {
  if (scenario == "compliance-sweep") {
    const hasm::ComplianceSetup setup = compliance_from(o);
    return hasm::compliance_recording(cfg, setup, o.value("patch", setup.negative_patch), cfg.seed);
  }
  if (scenario == "grasp-sequence") {
    return hasm::sequence_recording(cfg, sequence_from(o, hasm::default_dispatch().reach), cfg.seed);
  }
  if (scenario == "custom-script") {
    hasm::Recording rec = hasm::empty_recording(cfg);
    if (!o.contains("episodes") || !o.at("episodes").is_array() || o.at("episodes").empty()) {
      hasm::fail(hasm::ErrorKind::invalid_argument, "custom-script: options need a non-empty \"episodes\" array");
    }
    std::uint32_t episode = 0;
    for (const auto& ep : o.at("episodes")) {
      const double t0 = rec.records.empty() ? 0.0 : rec.records.back().t + 1.0;
      const std::string kind = ep.value("kind", std::string{});
      if (kind == "sweep") {
        hasm::scripted_sweep(cfg, sweep_from(ep), cfg.seed + episode, rec, episode, t0);
      } else if (kind == "sequence") {
        hasm::scripted_sequence(cfg, sequence_from(ep, hasm::default_dispatch().reach), cfg.seed + episode, rec,
                                episode, t0);
      } else {
        hasm::fail(hasm::ErrorKind::invalid_argument, "custom-script: episode kind must be \"sweep\" or \"sequence\"");
      }
      ++episode;
    }
    return rec;
  }
  hasm::fail(hasm::ErrorKind::invalid_argument, "unknown scenario '" + scenario + "'");
}

std::vector<hasm::MemoryBank> banks_from(const hasm_bank* const* banks, std::size_t n) {
  if (n > 0) need(banks, "banks");
  std::vector<hasm::MemoryBank> out;
  for (std::size_t i = 0; i < n; ++i) {
    need(banks[i], "bank");
    out.push_back(banks[i]->bank);
  }
  return out;
}

void fill_common(hasm_eval_metrics& m, const std::vector<hasm::TrajectoryRow>& rows) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.ticks = rows.size();
  m.recalls = 0;
  m.entropy_mean = m.entropy_min = m.entropy_max = nan;
  double sum = 0.0;
  for (const auto& r : rows) {
    if (!r.entropy) continue;
    const double h = *r.entropy;
    if (m.recalls == 0) {
      m.entropy_min = m.entropy_max = h;
    } else {
      m.entropy_min = std::min(m.entropy_min, h);
      m.entropy_max = std::max(m.entropy_max, h);
    }
    sum += h;
    ++m.recalls;
  }
  if (m.recalls > 0) m.entropy_mean = sum / static_cast<double>(m.recalls);
}

hasm_eval_metrics blank_metrics() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  hasm_eval_metrics m{};
  m.entropy_mean = m.entropy_min = m.entropy_max = nan;
  m.replay_max_error = m.replay_worst_ratio = nan;
  m.spearman = nan;
  return m;
}

void fill_replay(hasm_eval_metrics& m, const hasm::ReplayReport& r) {
  m.replay_max_error = r.max_error;
  m.replay_worst_ratio = r.worst_ratio;
  m.replay_steps = r.steps;
  m.replay_missed = r.missed;
}

void write_csv(const char* path, const hasm::AppConfig& cfg, const std::vector<hasm::TrajectoryRow>& rows) {
  if (!path) return;
  std::ofstream out(path);
  if (!out) hasm::fail(hasm::ErrorKind::io, std::string("cannot write ") + path);
  hasm::write_trajectory_csv(out, cfg, rows);
}

}  // namespace

extern "C" {

const char* hasm_version(void) { return "1.0.0"; }

const char* hasm_last_error(void) { return g_last_error.c_str(); }

const char* hasm_status_name(hasm_status status) {
  switch (status) {
    case HASM_OK: return "ok";
    case HASM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HASM_ERR_CONFIG: return "configuration error";
    case HASM_ERR_DATA: return "data error";
    case HASM_ERR_DIMENSION: return "dimension error";
    case HASM_ERR_IO: return "i/o error";
    case HASM_ERR_STATE: return "state error";
    case HASM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

hasm_status hasm_config_default(hasm_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new hasm_config{hasm::default_config()};
  });
}

hasm_status hasm_config_compliance(hasm_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new hasm_config{hasm::compliance_config()};
  });
}

hasm_status hasm_config_load(const char* path, hasm_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new hasm_config{hasm::load_config(path)};
  });
}

hasm_status hasm_config_set_seed(hasm_config* config, uint64_t seed) {
  return guard([&] {
    need(config, "config");
    config->config.seed = seed;
  });
}

hasm_status hasm_config_set_beta(hasm_config* config, double beta) {
  return guard([&] {
    need(config, "config");
    if (!(beta > 0.0) || !std::isfinite(beta)) hasm::fail(hasm::ErrorKind::config, "beta must be positive");
    config->config.memory.beta = beta;
  });
}

hasm_status hasm_config_dimension(const hasm_config* config, size_t* out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    *out = config->config.encoder().dimension();
  });
}

hasm_status hasm_config_joint_count(const hasm_config* config, size_t* out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    *out = config->config.joints.size();
  });
}

void hasm_config_free(hasm_config* config) { delete config; }

hasm_status hasm_encode_joints(const hasm_config* config, const double* angles, size_t n_angles, double* out,
                               size_t out_len) {
  return guard([&] {
    need(config, "config");
    need(angles, "angles");
    need(out, "out");
    const hasm::Encoder enc(config->config.encoder());
    if (n_angles != config->config.joints.size()) hasm::fail(hasm::ErrorKind::dimension, "encode: joint count");
    if (out_len != enc.dimension()) hasm::fail(hasm::ErrorKind::dimension, "encode: output length must equal D");
    const auto code = enc.place().encode(angles_from(angles, n_angles));
    std::copy(code.bits.data(), code.bits.data() + code.bits.size(), out);
  });
}

hasm_status hasm_embed(const hasm_config* config, const char* patch_id, const double* angles, size_t n_angles,
                       double rho, double* out, size_t out_len) {
  return guard([&] {
    need(config, "config");
    need(patch_id, "patch_id");
    need(angles, "angles");
    need(out, "out");
    const hasm::Encoder enc(config->config.encoder());
    if (n_angles != config->config.joints.size()) hasm::fail(hasm::ErrorKind::dimension, "embed: joint count");
    if (out_len != enc.dimension()) hasm::fail(hasm::ErrorKind::dimension, "embed: output length must equal D");
    const hasm::PatchSpec& patch = config->config.patch(patch_id);
    const auto code = enc.place().encode(angles_from(angles, n_angles));
    const Eigen::VectorXd e = hasm::build_embedding(rho, code, patch.axis, patch.theta_sign);
    std::copy(e.data(), e.data() + e.size(), out);
  });
}

hasm_status hasm_rope3d(const double* vec, size_t dimension, const double axis[3], double theta, double* out) {
  return guard([&] {
    need(vec, "vec");
    need(axis, "axis");
    need(out, "out");
    const hasm::RotationSpec spec{hasm::Vec3(axis[0], axis[1], axis[2]), theta, dimension};
    const Eigen::VectorXd r = hasm::rope3d(angles_from(vec, dimension), spec);
    std::copy(r.data(), r.data() + r.size(), out);
  });
}

hasm_status hasm_bind(const double* a, const double* b, size_t dimension, double* out) {
  return guard([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    const Eigen::VectorXd r = hasm::bind(angles_from(a, dimension), angles_from(b, dimension));
    std::copy(r.data(), r.data() + r.size(), out);
  });
}

hasm_status hasm_record(const hasm_config* config, const char* scenario, const char* options_json,
                        const char* out_path, size_t* out_records) {
  return guard([&] {
    need(config, "config");
    need(scenario, "scenario");
    need(out_path, "out_path");
    json options = options_from(options_json);
    hasm::Recording rec;
    try {
      rec = record_scenario(config->config, scenario, options);
    } catch (const json::exception& e) {
      hasm::fail(hasm::ErrorKind::invalid_argument, std::string("scenario options: ") + e.what());
    }
    hasm::save_recording(out_path, rec);
    if (out_records) *out_records = rec.records.size();
  });
}

hasm_status hasm_train(const hasm_config* config, const char* const* recording_paths, size_t n_paths,
                       const char* patch_id, hasm_train_stats* stats, hasm_bank** out) {
  return guard([&] {
    need(config, "config");
    need(recording_paths, "recording_paths");
    need(patch_id, "patch_id");
    need(out, "out");
    if (n_paths == 0) hasm::fail(hasm::ErrorKind::invalid_argument, "train: at least one recording is required");
    std::vector<hasm::Recording> recs;
    for (std::size_t i = 0; i < n_paths; ++i) {
      need(recording_paths[i], "recording path");
      recs.push_back(hasm::load_recording(recording_paths[i]));
    }
    hasm::TrainingReport report;
    hasm::MemoryBank bank;
    try {
      bank = hasm::train_from_recordings(recs, config->config, patch_id, config->config.memory.beta, &report);
    } catch (...) {
      if (stats) *stats = {report.pairing.states, report.pairing.paired, report.pairing.dropped,
                           report.pairing.sequences, report.episodes, 0};
      throw;
    }
    if (stats) {
      *stats = {report.pairing.states, report.pairing.paired, report.pairing.dropped, report.pairing.sequences,
                report.episodes, report.train.columns};
    }
    *out = new hasm_bank{std::move(bank)};
  });
}

hasm_status hasm_bank_save(const hasm_bank* bank, const char* path) {
  return guard([&] {
    need(bank, "bank");
    need(path, "path");
    hasm::save_bank(path, bank->bank);
  });
}

hasm_status hasm_bank_load(const hasm_config* config, const char* path, hasm_bank** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    std::optional<hasm::EncoderConfig> expected;
    if (config) expected = config->config.encoder();
    *out = new hasm_bank{hasm::load_bank(path, expected)};
  });
}

hasm_status hasm_bank_info_get(const hasm_bank* bank, hasm_bank_info* out) {
  return guard([&] {
    need(bank, "bank");
    need(out, "out");
    *out = {};
    out->dimension = bank->bank.dimension();
    out->columns = bank->bank.columns();
    out->joints = bank->bank.joints();
    out->beta = bank->bank.beta();
    std::strncpy(out->patch_id, bank->bank.patch_id().c_str(), sizeof(out->patch_id) - 1);
  });
}

hasm_status hasm_bank_recall(const hasm_bank* bank, const double* angles, size_t n_angles, double rho,
                             double* out_target, double* out_entropy) {
  return guard([&] {
    need(bank, "bank");
    need(angles, "angles");
    need(out_target, "out_target");
    if (n_angles != bank->bank.joints()) hasm::fail(hasm::ErrorKind::dimension, "recall: joint count");
    const hasm::Encoder enc(bank->bank.encoder());
    const auto q = enc.query(angles_from(angles, n_angles), rho, bank->bank.patch());
    const hasm::Decision d = hasm::recall_query(q, bank->bank, bank->bank.beta());
    std::copy(d.target.data(), d.target.data() + d.target.size(), out_target);
    if (out_entropy) *out_entropy = d.weights_entropy;
  });
}

void hasm_bank_free(hasm_bank* bank) { delete bank; }

hasm_status hasm_eval(const hasm_config* config, const hasm_bank* const* banks, size_t n_banks, const char* scenario,
                      const char* options_json, const char* out_csv, hasm_eval_metrics* out) {
  return guard([&] {
    need(config, "config");
    need(scenario, "scenario");
    const hasm::AppConfig& cfg = config->config;
    const auto loaded = banks_from(banks, n_banks);
    const json o = options_from(options_json);
    const std::string name = scenario;
    hasm_eval_metrics m = blank_metrics();
    std::vector<hasm::TrajectoryRow> rows;
    try {
      if (name == "compliance") {
        if (loaded.empty()) hasm::fail(hasm::ErrorKind::invalid_argument, "compliance: at least one bank");
        const auto report = hasm::evaluate_compliance(cfg, loaded, compliance_from(o), cfg.seed);
        m.compliance_increasing = report.strictly_increasing ? 1 : 0;
        m.compliance_opposite_signs = report.opposite_signs ? 1 : 0;
        for (const auto& [patch, rho] : report.spearman) {
          if (std::isnan(m.spearman) || rho < m.spearman || std::isnan(rho)) m.spearman = rho;
        }
        rows = report.rows;
      } else if (name == "sequence") {
        const hasm::Recording rec = hasm::load_recording(o.at("recording").get<std::string>());
        const auto report = hasm::evaluate_replay(cfg, loaded, rec, o.value("episode", 0u), std::nullopt, cfg.seed);
        fill_replay(m, report);
        rows = report.rows;
      } else if (name == "script") {
        hasm::ClosedLoopSpec spec;
        spec.start = o.contains("start") ? angles_from(o.at("start"), "start") : cfg.home();
        spec.duration = o.value("duration", 2.0);
        spec.seed = cfg.seed;
        for (const auto& t : o.value("touches", json::array())) {
          spec.script.push_back({t.at("patch_id").get<std::string>(), t.at("magnitude").get<double>(),
                                 t.value("start", 0.0), t.at("duration").get<double>()});
        }
        rows = hasm::run_closed_loop(cfg, loaded, spec);
      } else {
        hasm::fail(hasm::ErrorKind::invalid_argument, "unknown eval scenario '" + name + "'");
      }
    } catch (const json::exception& e) {
      hasm::fail(hasm::ErrorKind::invalid_argument, std::string("eval options: ") + e.what());
    }
    fill_common(m, rows);
    write_csv(out_csv, cfg, rows);
    if (out) *out = m;
  });
}

hasm_status hasm_replay(const hasm_config* config, const hasm_bank* const* banks, size_t n_banks,
                        const char* recording_path, const char* out_csv, hasm_eval_metrics* out) {
  return guard([&] {
    need(config, "config");
    need(recording_path, "recording_path");
    const auto loaded = banks_from(banks, n_banks);
    const hasm::Recording rec = hasm::load_recording(recording_path);
    hasm_eval_metrics m = blank_metrics();
    std::vector<hasm::TrajectoryRow> rows;
    std::set<std::uint32_t> episodes;
    for (const auto& r : rec.records) episodes.insert(r.episode);
    hasm::ReplayReport worst;
    bool first = true;
    for (std::uint32_t ep : episodes) {
      auto report = hasm::evaluate_replay(config->config, loaded, rec, ep, std::nullopt, config->config.seed);
      rows.insert(rows.end(), report.rows.begin(), report.rows.end());
      m.replay_steps += report.steps;
      m.replay_missed += report.missed;
      if (first || report.worst_ratio > worst.worst_ratio) worst = report;
      first = false;
    }
    if (!first) {
      m.replay_max_error = worst.max_error;
      m.replay_worst_ratio = worst.worst_ratio;
    }
    fill_common(m, rows);
    write_csv(out_csv, config->config, rows);
    if (out) *out = m;
  });
}

hasm_status hasm_session_create(const hasm_config* config, hasm_session** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    auto s = std::make_unique<hasm_session>();
    s->session = std::make_unique<hasm::Session>(config->config, config->config.seed);
    *out = s.release();
  });
}

hasm_status hasm_session_load_bank(hasm_session* session, const hasm_bank* bank) {
  return guard([&] {
    need(session, "session");
    need(bank, "bank");
    if (session->session->running()) hasm::fail(hasm::ErrorKind::state, "session already running; send load_bank");
    session->session->load_bank(bank->bank);
  });
}

hasm_status hasm_session_start(hasm_session* session, const char* address, uint16_t port) {
  return guard([&] {
    need(session, "session");
    if (session->server) hasm::fail(hasm::ErrorKind::state, "session already started");
    hasm::ServerOptions opts;
    if (address) opts.address = address;
    opts.port = port;
    auto server = std::make_unique<hasm::Server>(*session->session, opts);
    server->start();
    session->session->start();
    session->server = std::move(server);
  });
}

hasm_status hasm_session_port(const hasm_session* session, uint16_t* out) {
  return guard([&] {
    need(session, "session");
    need(out, "out");
    if (!session->server) hasm::fail(hasm::ErrorKind::state, "session not started");
    *out = session->server->port();
  });
}

hasm_status hasm_session_tick_count(const hasm_session* session, uint64_t* out) {
  return guard([&] {
    need(session, "session");
    need(out, "out");
    *out = session->session->tick_count();
  });
}

hasm_status hasm_session_stop(hasm_session* session) {
  return guard([&] {
    need(session, "session");
    session->session->stop();
    if (session->server) session->server->stop();
    session->server.reset();
  });
}

void hasm_session_free(hasm_session* session) {
  if (!session) return;
  session->session->stop();
  session->server.reset();
  delete session;
}

}  // extern "C"
