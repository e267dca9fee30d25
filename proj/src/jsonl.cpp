#include "cutkit/jsonl.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "cutkit/errors.hpp"

namespace cutkit {

std::string format_float(double value) {
  std::string s = nlohmann::json(value).dump();
  if (s.find('e') != std::string::npos || s.find('E') != std::string::npos) {
    return s;
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) {
    s += ".000000";
    return s;
  }
  std::size_t decimals = s.size() - dot - 1;
  while (decimals < 6) {
    s += '0';
    ++decimals;
  }
  return s;
}

namespace {

void dump_rec(const nlohmann::json& v, std::string& out) {
  using nlohmann::json;
  switch (v.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump_rec(it.value(), out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ',';
        first = false;
        dump_rec(item, out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float:
      out += format_float(v.get<double>());
      break;
    default:
      out += v.dump();
      break;
  }
}

}  // namespace

std::string dump_canonical(const nlohmann::json& value) {
  std::string out;
  dump_rec(value, out);
  return out;
}

// ---------------------------------------------------------------------------

struct LineSink::Impl {
  std::ofstream owned;
  std::ostream* out = nullptr;
  bool compress = false;
  bool closed = false;
  std::uint64_t bytes = 0;
  z_stream strm{};
  gz_header header{};
  std::vector<unsigned char> zbuf;

  void init(bool comp) {
    compress = comp;
    if (!compress) return;
    std::memset(&strm, 0, sizeof(strm));
    if (deflateInit2(&strm, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK) {
      throw IoError("deflateInit2 failed");
    }
    std::memset(&header, 0, sizeof(header));
    header.time = 0;
    header.os = 3;
    deflateSetHeader(&strm, &header);
    zbuf.resize(1 << 16);
  }

  void sink(const char* data, std::size_t n) {
    out->write(data, static_cast<std::streamsize>(n));
    if (!*out) {
      throw IoError("write failed at byte offset " + std::to_string(bytes));
    }
    bytes += n;
  }

  void deflate_chunk(const char* data, std::size_t n, int flush) {
    strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data));
    strm.avail_in = static_cast<uInt>(n);
    do {
      strm.next_out = zbuf.data();
      strm.avail_out = static_cast<uInt>(zbuf.size());
      int rc = deflate(&strm, flush);
      if (rc == Z_STREAM_ERROR) throw IoError("deflate stream error");
      std::size_t produced = zbuf.size() - strm.avail_out;
      if (produced) sink(reinterpret_cast<char*>(zbuf.data()), produced);
    } while (strm.avail_out == 0 || strm.avail_in > 0);
  }

  void write(std::string_view line) {
    std::string with_nl(line);
    with_nl += '\n';
    if (compress) {
      deflate_chunk(with_nl.data(), with_nl.size(), Z_NO_FLUSH);
    } else {
      sink(with_nl.data(), with_nl.size());
    }
  }

  void finish() {
    if (closed) return;
    closed = true;
    if (compress) {
      deflate_chunk(nullptr, 0, Z_FINISH);
      deflateEnd(&strm);
    }
    out->flush();
    if (owned.is_open()) owned.close();
  }
};

LineSink::LineSink(std::ostream& out, bool compress) : impl_(new Impl) {
  impl_->out = &out;
  impl_->init(compress);
}

LineSink::LineSink(const std::string& path, bool compress) : impl_(new Impl) {
  impl_->owned.open(path, std::ios::binary);
  if (!impl_->owned) throw IoError("cannot open for writing: " + path);
  impl_->out = &impl_->owned;
  impl_->init(compress);
}

LineSink::~LineSink() {
  try {
    impl_->finish();
  } catch (...) {
  }
}

void LineSink::write_line(std::string_view line) { impl_->write(line); }
void LineSink::close() { impl_->finish(); }
std::uint64_t LineSink::bytes_written() const { return impl_->bytes; }

// ---------------------------------------------------------------------------

struct LineSource::Impl {
  std::unique_ptr<std::istream> in;
  bool gzip = false;
  bool eof = false;
  std::size_t line_no = 0;
  z_stream strm{};
  std::vector<unsigned char> inbuf;
  std::vector<unsigned char> outbuf;
  std::string pending;  // decoded bytes not yet emitted as lines

  void init() {
    char magic[2];
    in->read(magic, 2);
    std::streamsize got = in->gcount();
    gzip = got == 2 && static_cast<unsigned char>(magic[0]) == 0x1f &&
           static_cast<unsigned char>(magic[1]) == 0x8b;
    in->clear();
    in->seekg(0);
    if (gzip) {
      std::memset(&strm, 0, sizeof(strm));
      if (inflateInit2(&strm, 15 + 32) != Z_OK) {
        throw IoError("inflateInit2 failed");
      }
      inbuf.resize(1 << 16);
      outbuf.resize(1 << 16);
    }
  }

  // Pulls more decoded bytes into `pending`; returns false at stream end.
  bool fill() {
    if (eof) return false;
    if (!gzip) {
      char buf[1 << 16];
      in->read(buf, sizeof(buf));
      std::streamsize got = in->gcount();
      if (got <= 0) {
        eof = true;
        return false;
      }
      pending.append(buf, static_cast<std::size_t>(got));
      return true;
    }
    if (strm.avail_in == 0) {
      in->read(reinterpret_cast<char*>(inbuf.data()),
               static_cast<std::streamsize>(inbuf.size()));
      std::streamsize got = in->gcount();
      if (got <= 0) {
        eof = true;
        return false;
      }
      strm.next_in = inbuf.data();
      strm.avail_in = static_cast<uInt>(got);
    }
    strm.next_out = outbuf.data();
    strm.avail_out = static_cast<uInt>(outbuf.size());
    int rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      throw IoError("gzip inflate error");
    }
    std::size_t produced = outbuf.size() - strm.avail_out;
    pending.append(reinterpret_cast<char*>(outbuf.data()), produced);
    if (rc == Z_STREAM_END && strm.avail_in == 0 && in->peek() == EOF) {
      eof = true;
    }
    return produced > 0 || !eof;
  }

  std::optional<std::string> next() {
    for (;;) {
      auto nl = pending.find('\n');
      if (nl != std::string::npos) {
        std::string line = pending.substr(0, nl);
        pending.erase(0, nl + 1);
        ++line_no;
        return line;
      }
      if (!fill()) break;
    }
    if (!pending.empty()) {
      std::string line = std::move(pending);
      pending.clear();
      ++line_no;
      return line;
    }
    return std::nullopt;
  }

  ~Impl() {
    if (gzip) inflateEnd(&strm);
  }
};

LineSource::LineSource(std::unique_ptr<std::istream> in) : impl_(new Impl) {
  impl_->in = std::move(in);
  impl_->init();
}

LineSource::LineSource(const std::string& path) : impl_(new Impl) {
  auto f = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*f) throw IoError("cannot open: " + path);
  impl_->in = std::move(f);
  impl_->init();
}

LineSource::~LineSource() = default;

std::optional<std::string> LineSource::next() { return impl_->next(); }
std::size_t LineSource::line_number() const { return impl_->line_no; }

bool path_looks_gzip(const std::string& path) {
  return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

}  // namespace cutkit
