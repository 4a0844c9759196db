#include "amcnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "amcnet/errors.hpp"

namespace amcnet {

namespace {

constexpr char kMagic[4] = {'A', 'M', 'C', 'K'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void boolean(bool v) { u8(v ? 1 : 0); }
  void opt(const std::optional<double>& v) {
    boolean(v.has_value());
    if (v) f64(*v);
  }
  void reals(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  void text(const std::string& s) {
    u64(s.size());
    out_ += s;
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<std::uint8_t>(in_[pos_++])} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  bool boolean() {
    const std::uint8_t v = u8();
    if (v > 1) throw IoError("checkpoint: corrupt flag");
    return v == 1;
  }
  std::optional<double> opt() {
    if (!boolean()) return std::nullopt;
    return f64();
  }
  std::size_t length(std::size_t element_size) {
    const std::uint64_t n = u64();
    if (n > (in_.size() - pos_) / element_size) throw IoError("checkpoint: truncated");
    return static_cast<std::size_t>(n);
  }
  std::vector<double> reals() {
    std::vector<double> v(length(8));
    for (double& x : v) x = f64();
    return v;
  }
  std::string text() {
    const std::size_t n = length(1);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw IoError("checkpoint: truncated");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

DigestMismatchError::DigestMismatchError(std::uint64_t expected, std::uint64_t found)
    : Error("checkpoint was written for a different configuration (digest " + std::to_string(found) +
            ", expected " + std::to_string(expected) + "); refusing to resume") {}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string encode_checkpoint(const Checkpoint& cp) {
  Writer w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u8(kCheckpointVersion);
  w.u64(cp.config_digest);
  w.u64(cp.epoch);
  w.reals(cp.params);

  w.f64(cp.amc.sigma);
  w.reals(cp.amc.mu);
  w.reals(cp.amc.lambda);
  w.u64(cp.amc.consecutive_rejections);
  w.opt(cp.amc.current_loss);
  w.opt(cp.amc.current_accuracy);

  w.reals(cp.adam.m);
  w.reals(cp.adam.v);
  w.u64(cp.adam.t);

  w.text(cp.rng_state);
  w.u64(cp.acceptance_history.size());
  for (bool b : cp.acceptance_history) w.boolean(b);
  w.u64(cp.batch_size);
  w.u64(cp.batch_sizes.size());
  for (std::size_t b : cp.batch_sizes) w.u64(b);
  w.boolean(cp.stopped);

  w.boolean(cp.record.diverged);
  w.u64(cp.record.rows.size());
  for (const RunRow& r : cp.record.rows) {
    w.u64(r.epoch);
    w.opt(r.loss);
    w.opt(r.aux_loss);
    w.opt(r.accuracy);
    w.opt(r.acceptance_rate);
    w.opt(r.sigma);
    w.opt(r.grad_norm);
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  for (char c : kMagic) {
    if (r.u8() != static_cast<std::uint8_t>(c)) throw IoError("checkpoint: bad magic");
  }
  const std::uint8_t version = r.u8();
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint cp;
  cp.config_digest = r.u64();
  cp.epoch = r.u64();
  cp.params = r.reals();

  cp.amc.sigma = r.f64();
  cp.amc.mu = r.reals();
  cp.amc.lambda = r.reals();
  cp.amc.consecutive_rejections = r.u64();
  cp.amc.current_loss = r.opt();
  cp.amc.current_accuracy = r.opt();

  cp.adam.m = r.reals();
  cp.adam.v = r.reals();
  cp.adam.t = r.u64();

  cp.rng_state = r.text();
  for (std::size_t n = r.length(1); n > 0; --n) cp.acceptance_history.push_back(r.boolean());
  cp.batch_size = static_cast<std::size_t>(r.u64());
  for (std::size_t n = r.length(8); n > 0; --n) cp.batch_sizes.push_back(static_cast<std::size_t>(r.u64()));
  cp.stopped = r.boolean();

  cp.record.diverged = r.boolean();
  for (std::size_t n = r.length(9); n > 0; --n) {
    RunRow row;
    row.epoch = r.u64();
    row.loss = r.opt();
    row.aux_loss = r.opt();
    row.accuracy = r.opt();
    row.acceptance_rate = r.opt();
    row.sigma = r.opt();
    row.grad_norm = r.opt();
    cp.record.rows.push_back(row);
  }
  if (!r.done()) throw IoError("checkpoint: trailing bytes");
  return cp;
}

void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open checkpoint for writing: " + tmp.string());
    const std::string bytes = encode_checkpoint(cp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing checkpoint: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return decode_checkpoint(ss.str());
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_digest) {
  Checkpoint cp = load_checkpoint(path);
  if (cp.config_digest != expected_digest) throw DigestMismatchError(expected_digest, cp.config_digest);
  return cp;
}

}  // namespace amcnet
