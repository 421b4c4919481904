#pragma once

#include <cstddef>
#include <iostream>
#include <stdexcept>
#include <string>

namespace lsc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class UnknownWord : public Error {
 public:
  explicit UnknownWord(const std::string& word)
      : Error("unknown word '" + word + "'"), word_(word) {}

  const std::string& word() const noexcept { return word_; }

 private:
  std::string word_;
};

// Warnings go to stderr unless silenced (tests silence them).
inline bool& warnings_enabled() {
  static bool enabled = true;
  return enabled;
}

inline void warn(const std::string& msg) {
  if (warnings_enabled()) std::cerr << "warning: " << msg << '\n';
}

}  // namespace lsc
