#include "mkagg/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace mkagg::io {

namespace {

std::string magic_str(const Magic& m) { return std::string(m.data(), m.size()); }

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFFu);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

std::string trim_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, '\t')) out.push_back(field);
  return out;
}

bool skip_line(const std::string& line) {
  return line.empty() || line.front() == '#';
}

}  // namespace

MatrixFile read_matrix(std::istream& in, const Magic& expected_magic) {
  std::array<unsigned char, kHeaderBytes> hdr{};
  in.read(reinterpret_cast<char*>(hdr.data()), hdr.size());
  if (in.gcount() != static_cast<std::streamsize>(hdr.size()))
    throw MatrixFormatError(FormatField::payload, "matrix file: truncated header");

  MatrixFile f;
  std::memcpy(f.header.magic.data(), hdr.data(), 4);
  if (f.header.magic != expected_magic)
    throw MatrixFormatError(FormatField::magic, "matrix file: bad magic '" + magic_str(f.header.magic) +
                                                    "', expected '" + magic_str(expected_magic) + "'");
  f.header.version = get_le<std::uint32_t>(hdr.data() + 4);
  if (f.header.version != kFormatVersion)
    throw MatrixFormatError(FormatField::version,
                            "matrix file: unsupported version " + std::to_string(f.header.version));
  f.header.rows = get_le<std::uint64_t>(hdr.data() + 8);
  f.header.cols = get_le<std::uint64_t>(hdr.data() + 16);

  constexpr auto kMaxIndex = static_cast<std::uint64_t>(std::numeric_limits<Index>::max());
  constexpr auto kMaxBytes = std::numeric_limits<std::uint64_t>::max() / 4;
  if (f.header.rows > kMaxIndex)
    throw MatrixFormatError(FormatField::rows, "matrix file: row count overflows");
  if (f.header.cols > kMaxIndex)
    throw MatrixFormatError(FormatField::cols, "matrix file: column count overflows");
  if (f.header.rows != 0 && f.header.cols > kMaxBytes / f.header.rows)
    throw MatrixFormatError(FormatField::cols, "matrix file: rows*cols overflows");

  const std::uint64_t count = f.header.rows * f.header.cols;
  // Check the remaining stream length before allocating, so a corrupt header
  // cannot trigger a huge allocation.
  const auto here = in.tellg();
  if (here != std::streampos(-1)) {
    in.seekg(0, std::ios::end);
    const auto end = in.tellg();
    in.seekg(here);
    const auto avail = static_cast<std::uint64_t>(end - here);
    if (avail < count * 4)
      throw MatrixFormatError(FormatField::payload,
                              "matrix file: truncated payload (" + std::to_string(avail / 4) + " of " +
                                  std::to_string(count) + " floats)");
  }

  f.data.resize(static_cast<Index>(f.header.rows), static_cast<Index>(f.header.cols));
  std::vector<unsigned char> buf(static_cast<std::size_t>(count) * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw MatrixFormatError(FormatField::payload, "matrix file: truncated payload");
  float* dst = f.data.data();
  for (std::uint64_t i = 0; i < count; ++i)
    dst[i] = std::bit_cast<float>(get_le<std::uint32_t>(buf.data() + 4 * i));
  return f;
}

MatrixFile read_matrix_file(const std::filesystem::path& path, const Magic& expected_magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MatrixFormatError(FormatField::io, "cannot open " + path.string());
  try {
    return read_matrix(in, expected_magic);
  } catch (const MatrixFormatError& e) {
    throw MatrixFormatError(e.field(), path.string() + ": " + e.what());
  }
}

void write_matrix(std::ostream& out, const Magic& magic, const RowMatrixXf& m) {
  if (!m.allFinite()) throw InvalidArgument("write_matrix: non-finite entry");
  out.write(magic.data(), magic.size());
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  const float* src = m.data();
  for (Index i = 0; i < m.size(); ++i) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(src[i]));
  if (!out) throw Error("write_matrix: I/O failure");
}

void write_matrix_file(const std::filesystem::path& path, const Magic& magic, const RowMatrixXf& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_matrix(out, magic, m);
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

RowMatrixXf to_f32(const MatrixXd& m) {
  if (!m.allFinite()) throw InvalidArgument("to_f32: non-finite entry");
  if (m.size() > 0 && m.cwiseAbs().maxCoeff() > std::numeric_limits<float>::max())
    throw InvalidArgument("to_f32: value outside float range");
  return m.cast<float>();
}

DescriptorSet read_descriptors(const std::filesystem::path& path) {
  auto f = read_matrix_file(path, kDescriptorMagic);
  if (f.data.cols() < 1) throw MatrixFormatError(FormatField::cols, path.string() + ": descriptor dimension is 0");
  if (!f.data.allFinite()) throw MatrixFormatError(FormatField::payload, path.string() + ": non-finite value");
  return DescriptorSet(std::move(f.data));
}

void write_descriptors(const std::filesystem::path& path, const DescriptorSet& set) {
  write_matrix_file(path, kDescriptorMagic, set.data());
}

Codebook read_codebook(const std::filesystem::path& path) {
  auto f = read_matrix_file(path, kCodebookMagic);
  try {
    return Codebook(f.data.cast<double>());
  } catch (const InvalidArgument& e) {
    throw MatrixFormatError(FormatField::payload, path.string() + ": " + e.what());
  }
}

void write_codebook(const std::filesystem::path& path, const Codebook& cb) {
  write_matrix_file(path, kCodebookMagic, to_f32(cb.centroids()));
}

AggregateVector read_vector(const std::filesystem::path& path, bool assume_normalized) {
  auto f = read_matrix_file(path, kVectorMagic);
  if (f.data.rows() != 1)
    throw MatrixFormatError(FormatField::rows, path.string() + ": aggregate vector file must have one row");
  if (!f.data.allFinite()) throw MatrixFormatError(FormatField::payload, path.string() + ": non-finite value");
  AggregateVector v;
  v.xi = f.data.row(0).transpose().cast<double>();
  if (assume_normalized) {
    const double nrm = v.xi.norm();
    if (std::abs(nrm - 1.0) > 1e-5)
      throw MatrixFormatError(FormatField::payload,
                              path.string() + ": vector is not l2-normalized (norm " + std::to_string(nrm) + ")");
    v.state.push_back(Transform{TransformKind::l2, 0.0});
  }
  return v;
}

void write_vector(const std::filesystem::path& path, const AggregateVector& v) {
  write_matrix_file(path, kVectorMagic, to_f32(v.xi.transpose()));
}

MatrixXd read_rotation(const std::filesystem::path& path) {
  auto f = read_matrix_file(path, kRotationMagic);
  if (f.data.rows() != f.data.cols())
    throw MatrixFormatError(FormatField::cols, path.string() + ": rotation matrix must be square");
  return f.data.cast<double>();
}

void write_rotation(const std::filesystem::path& path, const MatrixXd& r) {
  write_matrix_file(path, kRotationMagic, to_f32(r));
}

std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  std::vector<ManifestEntry> out;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim_cr(line);
    if (skip_line(line)) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
      throw FormatError("manifest line " + std::to_string(lineno) + ": expected id<TAB>path");
    if (!seen.insert(fields[0]).second)
      throw FormatError("manifest line " + std::to_string(lineno) + ": duplicate id '" + fields[0] + "'");
    std::filesystem::path p = fields[1];
    if (p.is_relative()) p = base_dir / p;
    out.push_back({fields[0], p});
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& e : entries) out << e.id << '\t' << e.path.string() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

GroundTruth parse_ground_truth(std::istream& in) {
  GroundTruth truth;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim_cr(line);
    if (skip_line(line)) continue;
    auto fields = split_tabs(line);
    const std::string where = "ground truth line " + std::to_string(lineno);
    if (fields.size() != 3) throw FormatError(where + ": expected query_id<TAB>rel|junk<TAB>item_id");
    auto& q = truth[fields[0]];
    if (fields[1] == "rel") {
      if (q.junk.count(fields[2])) throw FormatError(where + ": '" + fields[2] + "' is already junk");
      q.relevant.insert(fields[2]);
    } else if (fields[1] == "junk") {
      if (q.relevant.count(fields[2])) throw FormatError(where + ": '" + fields[2] + "' is already relevant");
      q.junk.insert(fields[2]);
    } else {
      throw FormatError(where + ": label must be 'rel' or 'junk', got '" + fields[1] + "'");
    }
  }
  return truth;
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open ground truth " + path.string());
  return parse_ground_truth(in);
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
  for (const auto& [qid, q] : truth) {
    for (const auto& id : q.relevant) out << qid << "\trel\t" << id << '\n';
    for (const auto& id : q.junk) out << qid << "\tjunk\t" << id << '\n';
  }
}

}  // namespace mkagg::io
