#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmj/amjpf.hpp"
#include "lmj/matrix.hpp"
#include "lmj/vae.hpp"

namespace lmj {

// ---- text ---------------------------------------------------------------

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);
std::size_t parse_count(std::string_view text);
std::string join_doubles(std::span<const double> v, char sep = ',');
std::vector<double> split_doubles(std::string_view text, char sep = ',');
std::string join_counts(std::span<const std::size_t> v, char sep = ',');
std::vector<std::size_t> split_counts(std::string_view text, char sep = ',');

/// Flat `key = value` file; '#' starts a comment, blank lines are ignored.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text, const std::string& origin = "<text>");
  static KeyValueFile load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::string to_string() const;

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  /// Throws InvalidInput when missing.
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
};

// ---- frame dataset: "LMJF", u32 version, count, width, height, f32 pixels ----

inline constexpr std::uint32_t kFrameFormatVersion = 1;

void write_frames(const std::filesystem::path& path, std::span<const Frame> frames);
std::vector<Frame> read_frames(const std::filesystem::path& path);

// ---- CSV ----------------------------------------------------------------

/// Header "frame,abnormal"; values 0/1.
void write_labels(const std::filesystem::path& path, const std::vector<bool>& abnormal);
std::vector<bool> read_labels(const std::filesystem::path& path);

/// Header mu_0..mu_{L-1},s2_0..s2_{L-1}; one row per frame.
void write_latents(const std::filesystem::path& path, std::span<const LatentFrame> latents);
std::vector<LatentFrame> read_latents(const std::filesystem::path& path);

/// Header frame,y,thresh,raw_flag,final_flag,winning_cluster.
std::string report_csv(const AnomalyReport& report);
void write_report(const std::filesystem::path& path, const AnomalyReport& report);
AnomalyReport read_report(const std::filesystem::path& path);

// ---- binary blocks ------------------------------------------------------

/// "LMJB", u32 version, u32 count, u32 rows, u32 cols, f64 data. All matrices
/// in one file share a shape.
void write_matrix_block(const std::filesystem::path& path, std::span<const Matrix> mats);
std::vector<Matrix> read_matrix_block(const std::filesystem::path& path);

/// "LMJW", u32 version, u32 rows, u32 cols, f64 weights (row-major), f64 biases.
void write_layer(const std::filesystem::path& path, const Matrix& weights, const Vector& biases);
void read_layer(const std::filesystem::path& path, Matrix& weights, Vector& biases);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace lmj
