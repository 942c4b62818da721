#include "lmj/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lmj/error.hpp"

namespace lmj {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) out.push_back(line);
  }
  return out;
}

// Little-endian byte writer/reader independent of host order.
class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void magic(std::string_view m) { bytes_.append(m); }
  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes_.data(), static_cast<std::streamsize>(bytes_.size()));
    if (!out) throw IoError("write failed: " + path.string());
  }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::filesystem::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path_);
    bytes_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  void expect_magic(std::string_view m) {
    need(m.size());
    if (std::string_view(bytes_).substr(pos_, m.size()) != m)
      throw IoError(path_ + ": bad magic, expected " + std::string(m));
    pos_ += m.size();
  }
  void expect_end() const {
    if (pos_ != bytes_.size()) throw IoError(path_ + ": trailing bytes");
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw IoError(path_ + ": truncated file");
  }
  std::string path_;
  std::string bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw IoError(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidInput("not a number: '" + std::string(text) + "'");
  return v;
}

std::size_t parse_count(std::string_view text) {
  text = trim(text);
  std::size_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidInput("not a non-negative integer: '" + std::string(text) + "'");
  return v;
}

std::string join_doubles(std::span<const double> v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out.push_back(sep);
    out += format_double(v[i]);
  }
  return out;
}

std::vector<double> split_doubles(std::string_view text, char sep) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (auto part : split(text, sep)) out.push_back(parse_double(part));
  return out;
}

std::string join_counts(std::span<const std::size_t> v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out.push_back(sep);
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::size_t> split_counts(std::string_view text, char sep) {
  std::vector<std::size_t> out;
  if (trim(text).empty()) return out;
  for (auto part : split(text, sep)) out.push_back(parse_count(part));
  return out;
}

KeyValueFile KeyValueFile::parse(std::string_view text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::size_t line_no = 0;
  for (const auto& raw : lines_of(std::string(text))) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw InvalidInput(origin + ": expected 'key = value', got '" + std::string(line) + "'");
    kv.values_[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  return parse(read_text(path), path.string());
}

void KeyValueFile::save(const std::filesystem::path& path) const { write_text(path, to_string()); }

std::string KeyValueFile::to_string() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

void KeyValueFile::set(const std::string& key, std::string value) {
  values_[key] = std::move(value);
}

const std::string& KeyValueFile::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput(origin_ + ": missing key '" + key + "'");
  return it->second;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_frames(const std::filesystem::path& path, std::span<const Frame> frames) {
  ByteWriter w;
  w.magic("LMJF");
  w.u32(kFrameFormatVersion);
  w.u32(checked_u32(frames.size(), "frame count"));
  const std::size_t width = frames.empty() ? 0 : frames.front().width;
  const std::size_t height = frames.empty() ? 0 : frames.front().height;
  w.u32(checked_u32(width, "width"));
  w.u32(checked_u32(height, "height"));
  for (const Frame& f : frames) {
    if (f.width != width || f.height != height)
      throw InvalidInput("write_frames: frames differ in size");
    f.validate();
    for (double v : f.pixels) w.f32(static_cast<float>(v));
  }
  w.save(path);
}

std::vector<Frame> read_frames(const std::filesystem::path& path) {
  ByteReader r(path);
  r.expect_magic("LMJF");
  const std::uint32_t version = r.u32();
  if (version != kFrameFormatVersion)
    throw IoError(path.string() + ": unsupported frame format version " + std::to_string(version));
  const std::size_t count = r.u32();
  const std::size_t width = r.u32();
  const std::size_t height = r.u32();
  if (r.remaining() != count * width * height * 4)
    throw IoError(path.string() + ": pixel payload size does not match header");
  std::vector<Frame> frames(count, Frame{width, height, std::vector<double>(width * height)});
  for (Frame& f : frames) {
    for (double& v : f.pixels) v = static_cast<double>(r.f32());
    try {
      f.validate();
    } catch (const InvalidInput& e) {
      throw IoError(path.string() + ": " + e.what());
    }
  }
  r.expect_end();
  return frames;
}

void write_labels(const std::filesystem::path& path, const std::vector<bool>& abnormal) {
  std::string out = "frame,abnormal\n";
  for (std::size_t i = 0; i < abnormal.size(); ++i)
    out += std::to_string(i) + "," + (abnormal[i] ? "1" : "0") + "\n";
  write_text(path, out);
}

std::vector<bool> read_labels(const std::filesystem::path& path) {
  const auto lines = lines_of(read_text(path));
  if (lines.empty() || trim(lines.front()) != "frame,abnormal")
    throw IoError(path.string() + ": expected header 'frame,abnormal'");
  std::vector<bool> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != 2 || parse_count(cells[0]) != i - 1)
      throw IoError(path.string() + ": malformed row " + std::to_string(i));
    out.push_back(parse_count(cells[1]) != 0);
  }
  return out;
}

void write_latents(const std::filesystem::path& path, std::span<const LatentFrame> latents) {
  const std::size_t l = latents.empty() ? 0 : latents.front().dim();
  std::string out;
  for (std::size_t i = 0; i < l; ++i) out += (i ? ",mu_" : "mu_") + std::to_string(i);
  for (std::size_t i = 0; i < l; ++i) out += ",s2_" + std::to_string(i);
  out += "\n";
  for (const auto& lf : latents) {
    if (lf.dim() != l) throw InvalidInput("write_latents: latent dimension changes");
    out += join_doubles(lf.mu) + "," + join_doubles(lf.sigma2) + "\n";
  }
  write_text(path, out);
}

std::vector<LatentFrame> read_latents(const std::filesystem::path& path) {
  const auto lines = lines_of(read_text(path));
  if (lines.empty()) throw IoError(path.string() + ": empty latent file");
  const std::size_t cols = split(lines.front(), ',').size();
  if (cols % 2 != 0 || cols == 0) throw IoError(path.string() + ": malformed latent header");
  const std::size_t l = cols / 2;
  std::vector<LatentFrame> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto v = split_doubles(lines[i]);
    if (v.size() != cols) throw IoError(path.string() + ": row " + std::to_string(i) + " width");
    out.push_back({Vector(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(l)),
                   Vector(v.begin() + static_cast<std::ptrdiff_t>(l), v.end())});
  }
  return out;
}

std::string report_csv(const AnomalyReport& report) {
  std::string out = "frame,y,thresh,raw_flag,final_flag,winning_cluster\n";
  for (std::size_t i = 0; i < report.size(); ++i) {
    out += std::to_string(report.frame[i]) + "," + format_double(report.y[i]) + "," +
           format_double(report.threshold) + "," + (report.raw_flag[i] ? "1" : "0") + "," +
           (report.final_flag[i] ? "1" : "0") + "," + std::to_string(report.winning_cluster[i]) +
           "\n";
  }
  return out;
}

void write_report(const std::filesystem::path& path, const AnomalyReport& report) {
  write_text(path, report_csv(report));
}

AnomalyReport read_report(const std::filesystem::path& path) {
  const auto lines = lines_of(read_text(path));
  if (lines.empty() || trim(lines.front()) != "frame,y,thresh,raw_flag,final_flag,winning_cluster")
    throw IoError(path.string() + ": unexpected report header");
  AnomalyReport r;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != 6) throw IoError(path.string() + ": malformed row " + std::to_string(i));
    r.frame.push_back(parse_count(cells[0]));
    r.y.push_back(parse_double(cells[1]));
    r.threshold = parse_double(cells[2]);
    r.raw_flag.push_back(parse_count(cells[3]) != 0);
    r.final_flag.push_back(parse_count(cells[4]) != 0);
    r.winning_cluster.push_back(parse_count(cells[5]));
  }
  return r;
}

void write_matrix_block(const std::filesystem::path& path, std::span<const Matrix> mats) {
  ByteWriter w;
  w.magic("LMJB");
  w.u32(1);
  w.u32(checked_u32(mats.size(), "block count"));
  const std::size_t rows = mats.empty() ? 0 : mats.front().rows();
  const std::size_t cols = mats.empty() ? 0 : mats.front().cols();
  w.u32(checked_u32(rows, "rows"));
  w.u32(checked_u32(cols, "cols"));
  for (const Matrix& m : mats) {
    if (m.rows() != rows || m.cols() != cols)
      throw InvalidInput("write_matrix_block: matrices differ in shape");
    for (double v : m.data()) w.f64(v);
  }
  w.save(path);
}

std::vector<Matrix> read_matrix_block(const std::filesystem::path& path) {
  ByteReader r(path);
  r.expect_magic("LMJB");
  if (r.u32() != 1) throw IoError(path.string() + ": unsupported block version");
  const std::size_t count = r.u32();
  const std::size_t rows = r.u32();
  const std::size_t cols = r.u32();
  if (r.remaining() != count * rows * cols * 8)
    throw IoError(path.string() + ": payload size does not match header");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < count; ++i) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = r.f64();
    out.push_back(std::move(m));
  }
  r.expect_end();
  return out;
}

void write_layer(const std::filesystem::path& path, const Matrix& weights, const Vector& biases) {
  if (biases.size() != weights.rows()) throw InvalidInput("write_layer: bias length mismatch");
  ByteWriter w;
  w.magic("LMJW");
  w.u32(1);
  w.u32(checked_u32(weights.rows(), "rows"));
  w.u32(checked_u32(weights.cols(), "cols"));
  for (double v : weights.data()) w.f64(v);
  for (double v : biases) w.f64(v);
  w.save(path);
}

void read_layer(const std::filesystem::path& path, Matrix& weights, Vector& biases) {
  ByteReader r(path);
  r.expect_magic("LMJW");
  if (r.u32() != 1) throw IoError(path.string() + ": unsupported layer version");
  const std::size_t rows = r.u32();
  const std::size_t cols = r.u32();
  if (r.remaining() != (rows * cols + rows) * 8)
    throw IoError(path.string() + ": payload size does not match header");
  weights = Matrix(rows, cols);
  for (double& v : weights.data()) v = r.f64();
  biases.assign(rows, 0.0);
  for (double& v : biases) v = r.f64();
  r.expect_end();
}

}  // namespace lmj
