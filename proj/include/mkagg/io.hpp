#ifndef MKAGG_IO_HPP
#define MKAGG_IO_HPP

// Binary matrix files and the TSV side formats.
//
// Matrix file layout, all integers little-endian:
//   bytes 0-3   magic tag
//   bytes 4-7   u32 version (= 1)
//   bytes 8-15  u64 rows
//   bytes 16-23 u64 cols
//   then rows*cols f32 values, row-major.

#include "mkagg/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mkagg::io {

using Magic = std::array<char, 4>;

inline constexpr Magic kDescriptorMagic{'M', 'K', 'D', 'S'};
inline constexpr Magic kCodebookMagic{'M', 'K', 'C', 'B'};
inline constexpr Magic kVectorMagic{'M', 'K', 'V', 'C'};
inline constexpr Magic kRotationMagic{'M', 'K', 'R', 'T'};

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 24;

struct MatrixHeader {
  Magic magic{};
  std::uint32_t version = kFormatVersion;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
};

/// Which part of a matrix file was rejected.
enum class FormatField { magic, version, rows, cols, payload, io };

class MatrixFormatError : public FormatError {
 public:
  MatrixFormatError(FormatField field, const std::string& what) : FormatError(what), field_(field) {}
  FormatField field() const { return field_; }

 private:
  FormatField field_;
};

struct MatrixFile {
  MatrixHeader header;
  RowMatrixXf data;
};

MatrixFile read_matrix(std::istream& in, const Magic& expected_magic);
MatrixFile read_matrix_file(const std::filesystem::path& path, const Magic& expected_magic);

void write_matrix(std::ostream& out, const Magic& magic, const RowMatrixXf& m);
void write_matrix_file(const std::filesystem::path& path, const Magic& magic, const RowMatrixXf& m);

/// Narrowing helper for double matrices; rejects non-finite entries and
/// values outside the f32 range.
RowMatrixXf to_f32(const MatrixXd& m);

// Typed convenience wrappers.
DescriptorSet read_descriptors(const std::filesystem::path& path);
void write_descriptors(const std::filesystem::path& path, const DescriptorSet& set);
Codebook read_codebook(const std::filesystem::path& path);
void write_codebook(const std::filesystem::path& path, const Codebook& cb);
/// Aggregate vectors are stored as a 1×D matrix. The transform history is
/// not persisted: a vector read back is tagged `raw`, or `l2` when
/// `assume_normalized` is set and its norm is 1 within f32 precision.
AggregateVector read_vector(const std::filesystem::path& path, bool assume_normalized = false);
void write_vector(const std::filesystem::path& path, const AggregateVector& v);
MatrixXd read_rotation(const std::filesystem::path& path);
void write_rotation(const std::filesystem::path& path, const MatrixXd& r);

// ---------------------------------------------------------------------------
// TSV formats

/// `id<TAB>vector_file_path` lines. Relative paths resolve against the
/// manifest's directory.
struct ManifestEntry {
  std::string id;
  std::filesystem::path path;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base_dir);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

struct QueryTruth {
  std::set<std::string> relevant;
  std::set<std::string> junk;
};

/// Relevance judgements keyed by query id.
using GroundTruth = std::map<std::string, QueryTruth>;

/// `query_id<TAB>rel|junk<TAB>item_id` lines. Throws FormatError when an
/// item is marked both relevant and junk for the same query.
GroundTruth parse_ground_truth(std::istream& in);
GroundTruth read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(std::ostream& out, const GroundTruth& truth);

}  // namespace mkagg::io

#endif  // MKAGG_IO_HPP
