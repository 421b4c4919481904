#pragma once

#include <zlib.h>

#include <memory>
#include <string>
#include <string_view>

#include "lsc/error.hpp"

namespace lsc {

inline bool has_gz_extension(std::string_view path) {
  return path.size() > 3 && path.substr(path.size() - 3) == ".gz";
}

// Line reader over plain or gzip-compressed text. zlib reads uncompressed
// files transparently, so one code path serves both.
class LineReader {
 public:
  explicit LineReader(std::string path) : path_(std::move(path)) {
    file_.reset(gzopen(path_.c_str(), "rb"));
    if (!file_) throw IoError("cannot open '" + path_ + "' for reading");
    gzbuffer(file_.get(), 1 << 17);
  }

  // Reads the next line without its trailing newline (and CR). Returns
  // false at end of input.
  bool next(std::string& line) {
    line.clear();
    if (eof_) return false;
    char buf[1 << 14];
    bool got_any = false;
    while (true) {
      char* r = gzgets(file_.get(), buf, sizeof(buf));
      if (r == nullptr) {
        int errnum = 0;
        const char* msg = gzerror(file_.get(), &errnum);
        if (errnum != Z_OK && errnum != Z_STREAM_END)
          throw IoError("read error in '" + path_ + "': " + msg);
        eof_ = true;
        break;
      }
      got_any = true;
      std::string_view chunk(buf);
      if (!chunk.empty() && chunk.back() == '\n') {
        chunk.remove_suffix(1);
        line.append(chunk);
        ++line_no_;
        strip_cr(line);
        return true;
      }
      line.append(chunk);
    }
    if (got_any) {
      ++line_no_;
      strip_cr(line);
      return true;
    }
    return false;
  }

  void rewind() {
    gzrewind(file_.get());
    eof_ = false;
    line_no_ = 0;
  }

  std::size_t line_number() const noexcept { return line_no_; }
  const std::string& path() const noexcept { return path_; }

 private:
  struct Closer {
    void operator()(gzFile f) const noexcept { gzclose(f); }
  };

  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  std::string path_;
  std::unique_ptr<gzFile_s, Closer> file_;
  bool eof_ = false;
  std::size_t line_no_ = 0;
};

// Text writer; compresses when the path ends in ".gz".
class TextWriter {
 public:
  explicit TextWriter(std::string path) : path_(std::move(path)) {
    const char* mode = has_gz_extension(path_) ? "wb6" : "wbT";
    file_.reset(gzopen(path_.c_str(), mode));
    if (!file_) throw IoError("cannot open '" + path_ + "' for writing");
  }

  TextWriter& operator<<(std::string_view s) {
    write(s);
    return *this;
  }

  void write(std::string_view s) {
    if (s.empty()) return;
    if (gzwrite(file_.get(), s.data(), static_cast<unsigned>(s.size())) !=
        static_cast<int>(s.size()))
      throw IoError("write error in '" + path_ + "'");
  }

  void close() {
    if (file_ && gzclose(file_.release()) != Z_OK)
      throw IoError("error closing '" + path_ + "'");
  }

  ~TextWriter() {
    if (file_) gzclose(file_.release());
  }

 private:
  struct Closer {
    void operator()(gzFile f) const noexcept { gzclose(f); }
  };

  std::string path_;
  std::unique_ptr<gzFile_s, Closer> file_;
};

}  // namespace lsc
