#include "hasm/protocol.hpp"

#include <set>

#include <json.hpp>

#include "hasm/error.hpp"

namespace hasm::wire {
namespace {

using nlohmann::json;

json envelope(const char* type) { return {{"v", kVersion}, {"type", type}}; }

json parse_object(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::data, std::string("malformed message: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::data, "message must be a JSON object");
  const auto v = doc.find("v");
  if (v == doc.end() || !v->is_number_integer() || v->get<int>() != kVersion) {
    fail(ErrorKind::data, "message needs \"v\": " + std::to_string(kVersion));
  }
  const auto type = doc.find("type");
  if (type == doc.end() || !type->is_string()) fail(ErrorKind::data, "message needs a string \"type\"");
  return doc;
}

void only_fields(const json& doc, std::set<std::string> allowed) {
  allowed.insert("v");
  allowed.insert("type");
  for (const auto& [key, _] : doc.items()) {
    if (!allowed.count(key)) fail(ErrorKind::data, "unexpected field \"" + key + "\"");
  }
}

const json& field(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) fail(ErrorKind::data, std::string("missing field \"") + key + "\"");
  return *it;
}

std::string str(const json& doc, const char* key) {
  const json& f = field(doc, key);
  if (!f.is_string()) fail(ErrorKind::data, std::string("\"") + key + "\" must be a string");
  return f.get<std::string>();
}

double num(const json& doc, const char* key) {
  const json& f = field(doc, key);
  if (!f.is_number()) fail(ErrorKind::data, std::string("\"") + key + "\" must be a number");
  return f.get<double>();
}

std::vector<double> nums(const json& f, const char* key) {
  if (!f.is_array()) fail(ErrorKind::data, std::string("\"") + key + "\" must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : f) {
    if (!x.is_number()) fail(ErrorKind::data, std::string("\"") + key + "\" must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::string> strs(const json& f, const char* key) {
  if (!f.is_array()) fail(ErrorKind::data, std::string("\"") + key + "\" must be an array of strings");
  std::vector<std::string> out;
  for (const auto& x : f) {
    if (!x.is_string()) fail(ErrorKind::data, std::string("\"") + key + "\" must be an array of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

ClientMessage parse_client(std::string_view text) {
  const json doc = parse_object(text);
  const std::string type = doc["type"].get<std::string>();
  if (type == "touch") {
    only_fields(doc, {"patch_id", "magnitude", "state"});
    Touch t{str(doc, "patch_id"), num(doc, "magnitude"), true};
    if (!(t.magnitude >= 0.0)) fail(ErrorKind::data, "\"magnitude\" must be >= 0");
    const std::string state = str(doc, "state");
    if (state == "released") {
      t.pressed = false;
    } else if (state != "pressed") {
      fail(ErrorKind::data, "\"state\" must be \"pressed\" or \"released\"");
    }
    return t;
  }
  if (type == "load_bank") {
    only_fields(doc, {"path"});
    return LoadBank{str(doc, "path")};
  }
  if (type == "reset") {
    only_fields(doc, {"angles"});
    Reset r;
    if (const auto it = doc.find("angles"); it != doc.end() && !it->is_null()) r.angles = nums(*it, "angles");
    return r;
  }
  if (type == "set_beta") {
    only_fields(doc, {"beta"});
    SetBeta s{num(doc, "beta")};
    if (!(s.beta > 0.0)) fail(ErrorKind::data, "\"beta\" must be positive");
    return s;
  }
  fail(ErrorKind::data, "unknown message type \"" + type + "\"");
}

ServerMessage parse_server(std::string_view text) {
  const json doc = parse_object(text);
  const std::string type = doc["type"].get<std::string>();
  if (type == "hello") {
    only_fields(doc, {"joints", "patches", "tick_rate_hz"});
    return Hello{strs(field(doc, "joints"), "joints"), strs(field(doc, "patches"), "patches"), num(doc, "tick_rate_hz")};
  }
  if (type == "tick") {
    only_fields(doc, {"tick", "t", "angles", "f_total", "active_patch", "target", "entropy", "beta"});
    Tick t;
    const json& tick = field(doc, "tick");
    if (!tick.is_number_unsigned()) fail(ErrorKind::data, "\"tick\" must be a non-negative integer");
    t.tick = tick.get<std::uint64_t>();
    t.t = num(doc, "t");
    t.angles = nums(field(doc, "angles"), "angles");
    t.f_total = nums(field(doc, "f_total"), "f_total");
    if (const json& a = field(doc, "active_patch"); !a.is_null()) t.active_patch = str(doc, "active_patch");
    if (const json& g = field(doc, "target"); !g.is_null()) t.target = nums(g, "target");
    if (const json& e = field(doc, "entropy"); !e.is_null()) t.entropy = num(doc, "entropy");
    if (const json& b = field(doc, "beta"); !b.is_null()) t.beta = num(doc, "beta");
    return t;
  }
  if (type == "ack") {
    only_fields(doc, {"request"});
    return Ack{str(doc, "request")};
  }
  if (type == "error") {
    only_fields(doc, {"message"});
    return ErrorReply{str(doc, "message")};
  }
  fail(ErrorKind::data, "unknown message type \"" + type + "\"");
}

std::string_view type_name(const ClientMessage& msg) {
  struct {
    std::string_view operator()(const Touch&) const { return "touch"; }
    std::string_view operator()(const LoadBank&) const { return "load_bank"; }
    std::string_view operator()(const Reset&) const { return "reset"; }
    std::string_view operator()(const SetBeta&) const { return "set_beta"; }
  } visitor;
  return std::visit(visitor, msg);
}

std::string serialize(const ClientMessage& msg) {
  struct {
    json operator()(const Touch& t) const {
      json j = envelope("touch");
      j["patch_id"] = t.patch_id;
      j["magnitude"] = t.magnitude;
      j["state"] = t.pressed ? "pressed" : "released";
      return j;
    }
    json operator()(const LoadBank& l) const {
      json j = envelope("load_bank");
      j["path"] = l.path;
      return j;
    }
    json operator()(const Reset& r) const {
      json j = envelope("reset");
      if (r.angles) j["angles"] = *r.angles;
      return j;
    }
    json operator()(const SetBeta& s) const {
      json j = envelope("set_beta");
      j["beta"] = s.beta;
      return j;
    }
  } visitor;
  return std::visit(visitor, msg).dump();
}

std::string serialize(const ServerMessage& msg) {
  struct {
    json operator()(const Hello& h) const {
      json j = envelope("hello");
      j["joints"] = h.joints;
      j["patches"] = h.patches;
      j["tick_rate_hz"] = h.tick_rate_hz;
      return j;
    }
    json operator()(const Tick& t) const {
      json j = envelope("tick");
      j["tick"] = t.tick;
      j["t"] = t.t;
      j["angles"] = t.angles;
      j["f_total"] = t.f_total;
      j["active_patch"] = opt(t.active_patch);
      j["target"] = opt(t.target);
      j["entropy"] = opt(t.entropy);
      j["beta"] = opt(t.beta);
      return j;
    }
    json operator()(const Ack& a) const {
      json j = envelope("ack");
      j["request"] = a.request;
      return j;
    }
    json operator()(const ErrorReply& e) const {
      json j = envelope("error");
      j["message"] = e.message;
      return j;
    }
  } visitor;
  return std::visit(visitor, msg).dump();
}

}  // namespace hasm::wire
