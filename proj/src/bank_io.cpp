#include "hasm/bank_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "hasm/config.hpp"
#include "hasm/error.hpp"

namespace hasm {
namespace {

static_assert(std::endian::native == std::endian::little, "bank files are little-endian");

constexpr std::array<char, 8> kMagic = {'H', 'A', 'S', 'M', 'B', 'N', 'K', '\0'};
constexpr std::uint64_t kMaxHeader = 1 << 20;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(ErrorKind::data, "bank: truncated file");
  return v;
}

void read_matrix(std::istream& in, Eigen::MatrixXd& m) {
  const auto bytes = static_cast<std::streamsize>(m.size() * static_cast<Eigen::Index>(sizeof(double)));
  if (bytes > 0 && !in.read(reinterpret_cast<char*>(m.data()), bytes)) fail(ErrorKind::data, "bank: truncated matrix");
}

}  // namespace

void write_bank(std::ostream& out, const MemoryBank& bank) {
  if (!bank.trained()) fail(ErrorKind::state, "bank: refusing to save an untrained bank");
  const nlohmann::json header = {{"D", bank.dimension()},
                                 {"K", bank.columns()},
                                 {"N_J", bank.joints()},
                                 {"beta", bank.beta()},
                                 {"patch", patch_to_json(bank.patch())},
                                 {"encoder", encoder_to_json(bank.encoder())}};
  const std::string text = header.dump();
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kBankVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(bank.m().data()),
            static_cast<std::streamsize>(bank.m().size() * static_cast<Eigen::Index>(sizeof(double))));
  out.write(reinterpret_cast<const char*>(bank.s_shift().data()),
            static_cast<std::streamsize>(bank.s_shift().size() * static_cast<Eigen::Index>(sizeof(double))));
  if (!out) fail(ErrorKind::io, "bank: write failed");
}

MemoryBank read_bank(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) fail(ErrorKind::data, "bank: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kBankVersion) fail(ErrorKind::data, "bank: unsupported version " + std::to_string(version));
  const auto header_len = get<std::uint64_t>(in);
  if (header_len == 0 || header_len > kMaxHeader) fail(ErrorKind::data, "bank: implausible header length");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) fail(ErrorKind::data, "bank: truncated header");

  std::size_t d = 0, k = 0, nj = 0;
  double beta = 0.0;
  PatchSpec patch;
  EncoderConfig encoder;
  try {
    const auto header = nlohmann::json::parse(text);
    d = header.at("D").get<std::size_t>();
    k = header.at("K").get<std::size_t>();
    nj = header.at("N_J").get<std::size_t>();
    beta = header.at("beta").get<double>();
    patch = patch_from_json(header.at("patch"));
    encoder = encoder_from_json(header.at("encoder"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, std::string("bank header: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorKind::data, std::string("bank header: ") + e.what());
  }
  if (d != encoder.dimension() || nj != encoder.joint_limits.size() || k == 0 || k > (std::size_t{1} << 28)) {
    fail(ErrorKind::data, "bank: header dimensions are inconsistent");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
  Eigen::MatrixXd s(static_cast<Eigen::Index>(nj), static_cast<Eigen::Index>(k));
  read_matrix(in, m);
  read_matrix(in, s);
  if (in.peek() != std::char_traits<char>::eof()) fail(ErrorKind::data, "bank: trailing bytes");
  try {
    return MemoryBank(std::move(m), std::move(s), beta, std::move(patch), std::move(encoder));
  } catch (const Error& e) {
    fail(ErrorKind::data, std::string("bank: ") + e.what());
  }
}

void save_bank(const std::filesystem::path& path, const MemoryBank& bank) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write bank " + path.string());
  write_bank(out, bank);
}

void check_bank_compatible(const MemoryBank& bank, const EncoderConfig& expected) {
  if (!(bank.encoder() == expected)) {
    fail(ErrorKind::config, "bank for patch '" + bank.patch_id() +
                                "' was trained with a different encoder configuration");
  }
}

MemoryBank load_bank(const std::filesystem::path& path, const std::optional<EncoderConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open bank " + path.string());
  MemoryBank bank = read_bank(in);
  if (expected) check_bank_compatible(bank, *expected);
  return bank;
}

}  // namespace hasm
