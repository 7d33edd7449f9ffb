#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hasm::wire {

inline constexpr int kVersion = 1;

// Client -> server.
struct Touch {
  std::string patch_id;
  double magnitude = 0.0;
  bool pressed = true;
};

struct LoadBank {
  std::string path;
};

struct Reset {
  std::optional<std::vector<double>> angles;  // default: home pose
};

struct SetBeta {
  double beta = 1.0;
};

using ClientMessage = std::variant<Touch, LoadBank, Reset, SetBeta>;

// Server -> client.
struct Hello {
  std::vector<std::string> joints;
  std::vector<std::string> patches;
  double tick_rate_hz = 50.0;
};

struct Tick {
  std::uint64_t tick = 0;
  double t = 0.0;
  std::vector<double> angles;
  std::vector<double> f_total;  // in Hello.patches order
  std::optional<std::string> active_patch;
  std::optional<std::vector<double>> target;
  std::optional<double> entropy;
  std::optional<double> beta;  // override in effect, if any
};

struct Ack {
  std::string request;  // message type acknowledged
};

struct ErrorReply {
  std::string message;
};

using ServerMessage = std::variant<Hello, Tick, Ack, ErrorReply>;

// Parsing is strict: unknown or missing fields, a wrong "v" or a wrong type
// raise hasm::Error (ErrorKind::data). Serialization is canonical: sorted
// keys, no whitespace, so serialize(parse(s)) == s for canonical text.
ClientMessage parse_client(std::string_view text);
ServerMessage parse_server(std::string_view text);
std::string serialize(const ClientMessage& msg);
std::string serialize(const ServerMessage& msg);

std::string_view type_name(const ClientMessage& msg);


}  // namespace hasm::wire
