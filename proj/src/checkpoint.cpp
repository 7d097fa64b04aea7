#include "shapmix/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "shapmix/errors.hpp"

namespace shapmix {
namespace {

constexpr char kMagic[8] = {'S', 'H', 'A', 'P', 'M', 'I', 'X', '\x01'};

[[noreturn]] void bad(const std::string& what) {
  throw ParseError(ParseErrorKind::malformed_checkpoint, "checkpoint: " + what);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + static_cast<std::size_t>(b)])) << (8 * b);
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  const ModelParams& p = ck.params;
  nlohmann::ordered_json header;
  header["format"] = "shapmix-checkpoint";
  header["dims"] = {{"C", ck.dims.channels}, {"T", ck.dims.frames}, {"V", ck.dims.joints},
                    {"M", ck.dims.performers}};
  header["feature_spec"] = {{"kind", "mean_pose_motion"}, {"dim", p.input}};
  header["hidden"] = p.hidden;
  header["classes"] = p.classes;
  header["loss"] = {{"mode", ck.loss.mode == LossMode::plain_ce ? "ce" : "balanced-softmax"},
                    {"class_counts", ck.loss.class_counts}};
  header["train_counts"] = ck.train_counts;
  header["class_names"] = ck.class_names;
  header["seed"] = ck.seed;
  header["epoch"] = ck.epoch;
  header["tensors"] = nlohmann::ordered_json::array(
      {{{"name", "w1"}, {"shape", {p.hidden, p.input}}},
       {{"name", "b1"}, {"shape", {p.hidden}}},
       {{"name", "w2"}, {"shape", {p.classes, p.hidden}}},
       {{"name", "b2"}, {"shape", {p.classes}}}});
  const std::string text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  const std::uint64_t len = text.size();
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((len >> (8 * b)) & 0xffu));
  out += text;
  for (const auto* v : {&p.w1, &p.b1, &p.w2, &p.b2})
    for (double x : *v) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write checkpoint " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write to checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  const std::string in = buf.str();
  if (in.size() < 16 || std::memcmp(in.data(), kMagic, sizeof kMagic) != 0) bad("bad magic");
  const std::uint64_t len = get_u64(in, 8);
  if (len > in.size() - 16) bad("header length exceeds file size");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(in.substr(16, len));
    Checkpoint ck;
    ck.dims = {h.at("dims").at("C").get<int>(), h.at("dims").at("T").get<int>(),
               h.at("dims").at("V").get<int>(), h.at("dims").at("M").get<int>()};
    const int input = h.at("feature_spec").at("dim").get<int>();
    ck.params = ModelParams(input, h.at("hidden").get<int>(), h.at("classes").get<int>());
    ck.loss.mode = h.at("loss").at("mode").get<std::string>() == "ce" ? LossMode::plain_ce
                                                                       : LossMode::balanced_softmax;
    ck.loss.class_counts = h.at("loss").at("class_counts").get<std::vector<int>>();
    ck.train_counts = h.at("train_counts").get<std::vector<int>>();
    ck.class_names = h.at("class_names").get<std::vector<std::string>>();
    ck.seed = h.at("seed").get<std::uint64_t>();
    ck.epoch = h.at("epoch").get<int>();
    if (FeatureSpec{ck.dims}.dim() != input) bad("feature dimension does not match dims");
    std::size_t at = 16 + len;
    const std::size_t need = ck.params.parameter_count() * 4;
    if (in.size() - at != need)
      bad("payload has " + std::to_string(in.size() - at) + " bytes, expected " + std::to_string(need));
    for (auto* v : {&ck.params.w1, &ck.params.b1, &ck.params.w2, &ck.params.b2})
      for (double& x : *v) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b)
          bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + static_cast<std::size_t>(b)])) << (8 * b);
        x = std::bit_cast<float>(bits);
        at += 4;
      }
    return ck;
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("bad header: ") + e.what());
  } catch (const ConfigError& e) {
    bad(e.what());
  }
}

}  // namespace shapmix
