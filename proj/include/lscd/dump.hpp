#pragma once

// Binary usage-matrix dump, format v1 (little-endian):
//
//   "LSCD" | version u16 = 1 | dim u32
//   bin count u16, then per bin: label str | ordinal u16
//   word count u32, then per word:
//     lemma str | block count u16, then per block:
//       bin ordinal u16 | N u32 | N*dim binary32, row-major
//       N records: doc_id u32 | sentence_index u32 | token_index u32 |
//                  surface str | tag u16 (0xFFFF = absent) | context str
//   CRC32 (IEEE) of every preceding byte, u32
//
// str = u32 byte length followed by UTF-8 bytes.

#include <boost/crc.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lscd/error.hpp"
#include "lscd/types.hpp"

namespace lscd {

inline constexpr char kDumpMagic[4] = {'L', 'S', 'C', 'D'};
inline constexpr std::uint16_t kDumpVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "dump I/O assumes a little-endian host");

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    const auto *p = reinterpret_cast<const char *>(&value);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void put_str(const std::string &s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void put_raw(const char *p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  std::vector<char> &bytes() { return buf_; }

 private:
  std::vector<char> buf_;
};

class ByteReader {
 public:
  ByteReader(const char *data, std::size_t size) : data_(data), size_(size) {}

  template <typename T>
  T get(const char *what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_str(const char *what) {
    const auto n = get<std::uint32_t>(what);
    need(n, what);
    std::string s(data_ + pos_, n);
    pos_ += n;
    return s;
  }
  const char *take(std::size_t n, const char *what) {
    need(n, what);
    const char *p = data_ + pos_;
    pos_ += n;
    return p;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  void need(std::size_t n, const char *what) const {
    if (n > size_ - pos_)
      throw DumpError(DumpErrorKind::truncated,
                      std::string("while reading ") + what + " at offset " + std::to_string(pos_));
  }

  const char *data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32(const char *data, std::size_t n) {
  boost::crc_32_type crc;
  crc.process_bytes(data, n);
  return crc.checksum();
}

}  // namespace detail

// Serializes a store. Matrices of one word are written as consecutive blocks
// in first-appearance order, so a store read back is grouped by word.
inline std::vector<char> encode_dump(const Store &store) {
  validate(store);
  for (const auto &m : store.matrices)
    for (const auto &occ : m.occurrences)
      if (occ.lemma != m.word)
        throw DataError("occurrence lemma '" + occ.lemma + "' differs from matrix word '" + m.word + "'");

  detail::ByteWriter out;
  out.put_raw(kDumpMagic, 4);
  out.put<std::uint16_t>(kDumpVersion);
  out.put<std::uint32_t>(store.dim);
  out.put<std::uint16_t>(static_cast<std::uint16_t>(store.bins.size()));
  for (const auto &b : store.bins) {
    out.put_str(b.label);
    out.put<std::uint16_t>(b.ordinal);
  }
  const auto words = store.words();
  out.put<std::uint32_t>(static_cast<std::uint32_t>(words.size()));
  for (const auto &w : words) {
    std::vector<const UsageMatrix *> blocks;
    for (const auto &m : store.matrices)
      if (m.word == w) blocks.push_back(&m);
    out.put_str(w);
    out.put<std::uint16_t>(static_cast<std::uint16_t>(blocks.size()));
    for (const auto *m : blocks) {
      out.put<std::uint16_t>(m->bin.ordinal);
      out.put<std::uint32_t>(static_cast<std::uint32_t>(m->rows()));
      for (Eigen::Index i = 0; i < m->rows(); ++i)
        for (Eigen::Index j = 0; j < m->dim(); ++j) out.put<float>(static_cast<float>(m->vectors(i, j)));
      for (const auto &occ : m->occurrences) {
        out.put<std::uint32_t>(occ.doc_id);
        out.put<std::uint32_t>(occ.sentence_index);
        out.put<std::uint32_t>(occ.token_index);
        out.put_str(occ.surface);
        out.put<std::uint16_t>(occ.tag.value_or(kNoTag));
        out.put_str(occ.context);
      }
    }
  }
  auto &bytes = out.bytes();
  const auto crc = detail::crc32(bytes.data(), bytes.size());
  out.put<std::uint32_t>(crc);
  return std::move(bytes);
}

inline Store decode_dump(const char *data, std::size_t size) {
  if (size < 4 || std::memcmp(data, kDumpMagic, 4) != 0)
    throw DumpError(DumpErrorKind::bad_magic, "expected 'LSCD'");
  detail::ByteReader in(data, size);
  in.take(4, "magic");
  const auto version = in.get<std::uint16_t>("version");
  if (version != kDumpVersion)
    throw DumpError(DumpErrorKind::unsupported_version, "version " + std::to_string(version));

  Store store;
  store.dim = in.get<std::uint32_t>("dimension");
  const auto nbins = in.get<std::uint16_t>("bin count");
  for (std::uint16_t i = 0; i < nbins; ++i) {
    TimeBin b;
    b.label = in.get_str("bin label");
    b.ordinal = in.get<std::uint16_t>("bin ordinal");
    store.bins.push_back(std::move(b));
  }
  const auto nwords = in.get<std::uint32_t>("word count");
  for (std::uint32_t w = 0; w < nwords; ++w) {
    auto lemma = in.get_str("lemma");
    const auto nblocks = in.get<std::uint16_t>("block count");
    for (std::uint16_t k = 0; k < nblocks; ++k) {
      UsageMatrix m;
      m.word = lemma;
      const auto ordinal = in.get<std::uint16_t>("block bin ordinal");
      if (ordinal >= store.bins.size())
        throw DumpError(DumpErrorKind::invalid_content,
                        "word '" + lemma + "' refers to bin ordinal " + std::to_string(ordinal));
      m.bin = store.bins[ordinal];
      const auto n = in.get<std::uint32_t>("row count");
      const std::size_t cells = static_cast<std::size_t>(n) * store.dim;
      if (cells > in.remaining() / sizeof(float))
        throw DumpError(DumpErrorKind::truncated, "vector block of '" + lemma + "' extends past end of file");
      const char *raw = in.take(cells * sizeof(float), "vector block");
      m.vectors.resize(n, store.dim);
      for (std::size_t c = 0; c < cells; ++c) {
        float f;
        std::memcpy(&f, raw + c * sizeof(float), sizeof(float));
        m.vectors.data()[c] = f;
      }
      m.occurrences.reserve(n);
      for (std::uint32_t r = 0; r < n; ++r) {
        OccurrenceRecord occ;
        occ.doc_id = in.get<std::uint32_t>("doc_id");
        occ.sentence_index = in.get<std::uint32_t>("sentence_index");
        occ.token_index = in.get<std::uint32_t>("token_index");
        occ.surface = in.get_str("surface");
        occ.lemma = lemma;
        const auto tag = in.get<std::uint16_t>("tag");
        if (tag != kNoTag) occ.tag = tag;
        occ.context = in.get_str("context");
        m.occurrences.push_back(std::move(occ));
      }
      store.matrices.push_back(std::move(m));
    }
  }
  const auto body_end = in.pos();
  const auto stored_crc = in.get<std::uint32_t>("checksum");
  if (in.remaining() != 0)
    throw DumpError(DumpErrorKind::trailing_bytes, std::to_string(in.remaining()) + " extra bytes");
  if (detail::crc32(data, body_end) != stored_crc) throw DumpError(DumpErrorKind::checksum_mismatch, "");

  try {
    validate(store);
  } catch (const DumpError &) {
    throw;
  } catch (const DataError &e) {
    throw DumpError(DumpErrorKind::invalid_content, e.what());
  }
  return store;
}

inline void write_dump(const Store &store, const std::filesystem::path &path) {
  const auto bytes = encode_dump(store);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DumpError(DumpErrorKind::io, "cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw DumpError(DumpErrorKind::io, "write to " + path.string() + " failed");
}

inline Store read_dump(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DumpError(DumpErrorKind::io, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_dump(bytes.data(), bytes.size());
}

}  // namespace lscd
