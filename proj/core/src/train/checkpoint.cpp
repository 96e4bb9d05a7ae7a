#include "ctrtab/train/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ctrtab/error.hpp"

namespace ctrtab::train {

using nlohmann::json;

namespace {

constexpr std::array<char, 7> magic = {'C', 'T', 'R', 'T', 'A', 'B', '\0'};

template <typename U>
void put_le(std::ostream& out, U v) {
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, sizeof(U));
}

template <typename U>
U get_le(std::istream& in, const char* what) {
  unsigned char buf[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(U))) throw FormatError(std::string("checkpoint truncated in ") + what);
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

std::vector<net::ConstNamedTensor> all_tensors(const net::ModelBundle& b) {
  auto out = b.denoiser.named();
  if (b.control) {
    auto c = b.control->named();
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

}  // namespace

std::string fingerprint_hex(std::uint64_t fp) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << fp;
  return s.str();
}

void write_checkpoint(std::ostream& out, const net::ModelBundle& b) {
  b.denoiser.validate();
  const auto tensors = all_tensors(b);
  json header;
  header["schema_fingerprint"] = fingerprint_hex(b.encoder.schema().fingerprint());
  header["encoder"] = b.encoder.to_json();
  header["ddpm"] = b.ddpm.to_json();
  header["ve"] = b.ve.to_json();
  header["flags"] = b.flags.to_json();
  header["denoiser"] = {{"dim", b.denoiser.dim},
                        {"hidden", b.denoiser.hidden},
                        {"time_dim", b.denoiser.time.dim},
                        {"max_period", b.denoiser.time.max_period}};
  if (b.control) {
    header["control"] = {{"b", b.control->b}, {"zero_conv", net::to_string(b.control->zc_in.kind)}};
  } else {
    header["control"] = nullptr;
  }
  header["tensors"] = net::shapes_json(tensors);
  header["config"] = b.config;
  const std::string text = header.dump();

  out.write(magic.data(), magic.size());
  put_le<std::uint16_t>(out, checkpoint_version);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& nt : tensors)
    for (double v : nt.tensor->data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw Error("checkpoint: write failed");
}

void save_checkpoint(const net::ModelBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, bundle);
}

net::ModelBundle read_checkpoint(std::istream& in, std::optional<std::uint64_t> expected_fingerprint) {
  std::array<char, 7> m{};
  if (!in.read(m.data(), m.size()) || m != magic) throw FormatError("not a ctrtab checkpoint (bad magic bytes)");
  const auto version = get_le<std::uint16_t>(in, "version");
  if (version != checkpoint_version) {
    throw FormatError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                      std::to_string(checkpoint_version) + ")");
  }
  const auto len = get_le<std::uint64_t>(in, "header length");
  if (len > (std::uint64_t{1} << 32)) throw FormatError("checkpoint header length implausible");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw FormatError("checkpoint truncated in header");

  net::ModelBundle b;
  try {
    const json h = json::parse(text);
    b.encoder = data::EncoderState::from_json(h.at("encoder"));
    const std::string fp = h.at("schema_fingerprint").get<std::string>();
    if (fp != fingerprint_hex(b.encoder.schema().fingerprint()))
      throw FormatError("checkpoint schema fingerprint does not match its encoder");
    if (expected_fingerprint && fp != fingerprint_hex(*expected_fingerprint)) {
      throw FormatError("checkpoint schema fingerprint " + fp + " does not match expected " +
                        fingerprint_hex(*expected_fingerprint));
    }
    b.ddpm = diffusion::DdpmSchedule::from_json(h.at("ddpm"));
    b.ve = diffusion::VeSchedule::from_json(h.at("ve"));
    b.flags = net::BundleFlags::from_json(h.at("flags"));
    const auto& d = h.at("denoiser");
    b.denoiser = net::zero_params(d.at("dim").get<std::size_t>(), d.at("hidden").get<std::size_t>(),
                                  net::TimeEmbedConfig{d.at("time_dim").get<std::size_t>(),
                                                       d.at("max_period").get<double>()});
    const auto& c = h.at("control");
    if (!c.is_null()) {
      b.control = net::attach_control(b.denoiser, c.at("b").get<double>(),
                                      net::zero_conv_kind_from_string(c.at("zero_conv").get<std::string>()));
    }
    b.config = h.at("config");
    const auto& listed = h.at("tensors");
    const auto expected = all_tensors(b);
    if (listed.size() != expected.size()) throw FormatError("checkpoint tensor list does not match its architecture");
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (listed[i].at("name").get<std::string>() != expected[i].name ||
          listed[i].at("shape").get<nd::Shape>() != expected[i].tensor->shape()) {
        throw FormatError("checkpoint tensor " + std::to_string(i) + " has unexpected name or shape");
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  } catch (const DomainError& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }

  auto fill = [&](std::vector<net::NamedTensor> tensors) {
    for (auto& nt : tensors)
      for (double& v : nt.tensor->data()) v = std::bit_cast<double>(get_le<std::uint64_t>(in, "payload"));
  };
  fill(b.denoiser.named());
  if (b.control) fill(b.control->named());
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint has trailing bytes");
  return b;
}

net::ModelBundle load_checkpoint(const std::filesystem::path& path, std::optional<std::uint64_t> expected_fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PrerequisiteError("cannot open checkpoint " + path.string());
  return read_checkpoint(in, expected_fingerprint);
}

}  // namespace ctrtab::train
