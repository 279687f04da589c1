#pragma once

#include <stdexcept>
#include <string>

namespace weblog {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// detect_format saw a sample in which no line matched any known layout
struct NoParseableLines : Error {
  NoParseableLines() : Error("no sample line matches any known log format") {}
};

// canonicalize was asked to render fields the target format cannot hold
struct FormatTooNarrow : Error {
  explicit FormatTooNarrow(const std::string &what) : Error(what) {}
};

struct DuplicateServerName : Error {
  explicit DuplicateServerName(const std::string &name)
      : Error("duplicate server name in merge: " + name) {}
};

struct IoFailure : Error {
  explicit IoFailure(const std::string &what) : Error(what) {}
};

struct RefIntegrityViolation : Error {
  explicit RefIntegrityViolation(const std::string &what) : Error(what) {}
};

// caller bug: find_referrer_history requires the referrer to occur in a history
struct ReferrerNotFound : std::logic_error {
  explicit ReferrerNotFound(const std::string &ref)
      : std::logic_error("referrer not present in any history: " + ref) {}
};

} // namespace weblog
