#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "weblog/errors.hpp"
#include "weblog/log_entry.hpp"

namespace weblog {

struct ParseReport {
  std::uint64_t total_lines = 0;
  std::uint64_t parsed = 0;
  std::uint64_t rejected = 0;
  std::vector<std::pair<std::uint64_t, std::string>> rejects; // (line_no, reason)
};

namespace detail {

inline void skip_spaces(std::string_view &s) {
  while (!s.empty() && s.front() == ' ')
    s.remove_prefix(1);
}

inline bool take_token(std::string_view &s, std::string_view &tok) {
  skip_spaces(s);
  if (s.empty())
    return false;
  const auto n = s.find(' ');
  tok = s.substr(0, n);
  s.remove_prefix(n == std::string_view::npos ? s.size() : n);
  return true;
}

// Reads a double-quoted field; \" and \\ are unescaped, any other byte is
// preserved verbatim.
inline bool take_quoted(std::string_view &s, std::string &out) {
  skip_spaces(s);
  if (s.empty() || s.front() != '"')
    return false;
  s.remove_prefix(1);
  out.clear();
  while (!s.empty()) {
    const char c = s.front();
    s.remove_prefix(1);
    if (c == '"')
      return true;
    if (c == '\\' && !s.empty() && (s.front() == '"' || s.front() == '\\')) {
      out.push_back(s.front());
      s.remove_prefix(1);
      continue;
    }
    out.push_back(c);
  }
  return false; // unterminated
}

inline bool take_bracketed(std::string_view &s, std::string_view &inner) {
  skip_spaces(s);
  if (s.empty() || s.front() != '[')
    return false;
  const auto close = s.find(']');
  if (close == std::string_view::npos)
    return false;
  inner = s.substr(1, close - 1);
  s.remove_prefix(close + 1);
  return true;
}

inline std::optional<std::string> dash_to_absent(std::string_view tok) {
  if (tok == "-" || tok.empty())
    return std::nullopt;
  return std::string(tok);
}

inline bool acceptable_url(std::string_view url) {
  if (url.empty())
    return false;
  if (url.front() == '/')
    return true;
  const auto scheme = url.find("://");
  return scheme != std::string_view::npos && scheme > 0;
}

inline void append_quoted(std::string &out, std::string_view field) {
  out.push_back('"');
  for (const char c : field) {
    if (c == '"' || c == '\\')
      out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
}

} // namespace detail

// Parses one raw line in the given format. Never throws on data: a malformed
// line yields nullopt and, when `reason` is non-null, a short diagnostic.
inline std::optional<LogEntry> parse_line(std::string_view line, LogFormat format,
                                          std::string *reason = nullptr) {
  const auto fail = [&](const char *why) -> std::optional<LogEntry> {
    if (reason)
      *reason = why;
    return std::nullopt;
  };

  if (!line.empty() && line.back() == '\r')
    line.remove_suffix(1);

  LogEntry e;
  std::string_view tok;

  if (!detail::take_token(line, tok))
    return fail("empty line");
  e.ip = std::string(tok);

  if (!detail::take_token(line, tok))
    return fail("missing ident field");
  e.ident = detail::dash_to_absent(tok);

  if (!detail::take_token(line, tok))
    return fail("missing login field");
  e.login = detail::dash_to_absent(tok);

  std::string_view date;
  if (!detail::take_bracketed(line, date))
    return fail("unbracketed date");
  const auto ts = parse_log_time(date);
  if (!ts)
    return fail("bad timestamp");
  e.time = *ts;

  std::string request;
  if (!detail::take_quoted(line, request))
    return fail("bad request quoting");
  const auto sp1 = request.find(' ');
  const auto sp2 = request.rfind(' ');
  if (sp1 == std::string::npos || sp2 == sp1)
    return fail("request line is not three tokens");
  e.method = request.substr(0, sp1);
  e.url = request.substr(sp1 + 1, sp2 - sp1 - 1);
  e.protocol = request.substr(sp2 + 1);
  if (e.method.empty() || e.protocol.empty() || e.url.find(' ') != std::string::npos)
    return fail("request line is not three tokens");
  if (!detail::acceptable_url(e.url))
    return fail("bad url");

  if (!detail::take_token(line, tok))
    return fail("missing status field");
  int status = 0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), status);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    return fail("non-numeric status");
  if (status < 100 || status > 599)
    return fail("status out of range");
  e.status = status;

  if (!detail::take_token(line, tok))
    return fail("missing bytes field");
  if (tok == "-") {
    e.bytes = std::nullopt;
  } else {
    std::uint64_t n = 0;
    const auto [bp, bec] = std::from_chars(tok.data(), tok.data() + tok.size(), n);
    if (bec != std::errc{} || bp != tok.data() + tok.size())
      return fail("bad bytes field");
    e.bytes = n;
  }

  if (format_has_referrer(format)) {
    std::string field;
    if (!detail::take_quoted(line, field))
      return fail("missing referrer field");
    e.referrer = detail::dash_to_absent(field);
  }
  if (format_has_agent(format)) {
    std::string field;
    if (!detail::take_quoted(line, field))
      return fail("missing agent field");
    e.agent = detail::dash_to_absent(field);
  }

  detail::skip_spaces(line);
  if (!line.empty())
    return fail("trailing data after last field");
  return e;
}

// Renders an entry as a canonical single-spaced log line. The format must be
// rich enough for the populated fields.
inline std::string canonicalize(const LogEntry &e, LogFormat format) {
  if (!format_has_referrer(format) && e.referrer)
    throw FormatTooNarrow("entry has a referrer but format " + std::string(format_name(format)) +
                          " cannot hold it");
  if (!format_has_agent(format) && e.agent)
    throw FormatTooNarrow("entry has an agent but format " + std::string(format_name(format)) +
                          " cannot hold it");

  std::string out;
  out.reserve(96 + e.url.size() + (e.referrer ? e.referrer->size() : 0) +
              (e.agent ? e.agent->size() : 0));
  out += e.ip;
  out += ' ';
  out += e.ident ? *e.ident : "-";
  out += ' ';
  out += e.login ? *e.login : "-";
  out += " [";
  out += format_log_time(e.time);
  out += "] ";
  detail::append_quoted(out, e.method + ' ' + e.url + ' ' + e.protocol);
  out += ' ';
  out += std::to_string(e.status);
  out += ' ';
  out += e.bytes ? std::to_string(*e.bytes) : "-";
  if (format_has_referrer(format)) {
    out += ' ';
    detail::append_quoted(out, e.referrer ? *e.referrer : "-");
  }
  if (format_has_agent(format)) {
    out += ' ';
    detail::append_quoted(out, e.agent ? *e.agent : "-");
  }
  return out;
}

// Picks the richest format consistent with at least 90% of the parseable
// sample lines, preferring Combined > ECLF > CLF. Falls back to the format
// that parses the most lines when the sample is too mixed for the 90% rule.
inline LogFormat detect_format(std::span<const std::string> sample) {
  static constexpr LogFormat order[] = {LogFormat::combined, LogFormat::eclf, LogFormat::clf};
  std::uint64_t counts[3] = {0, 0, 0};
  std::uint64_t parseable = 0;
  for (const auto &line : sample) {
    bool any = false;
    for (int i = 0; i < 3; ++i) {
      if (parse_line(line, order[i])) {
        ++counts[i];
        any = true;
      }
    }
    if (any)
      ++parseable;
  }
  if (parseable == 0)
    throw NoParseableLines();
  for (int i = 0; i < 3; ++i)
    if (counts[i] * 10 >= parseable * 9)
      return order[i];
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (counts[i] > counts[best])
      best = i;
  return order[best];
}

// Parses every line of the stream; malformed lines are recorded and skipped,
// never fatal. Entries keep their 1-based source line numbers.
inline std::pair<std::vector<LogEntry>, ParseReport> parse_stream(std::istream &in,
                                                                  LogFormat format) {
  std::vector<LogEntry> entries;
  ParseReport report;
  std::string line, reason;
  while (std::getline(in, line)) {
    ++report.total_lines;
    if (auto e = parse_line(line, format, &reason)) {
      e->line_no = report.total_lines;
      entries.push_back(std::move(*e));
      ++report.parsed;
    } else {
      ++report.rejected;
      report.rejects.emplace_back(report.total_lines, reason);
    }
  }
  if (in.bad())
    throw IoFailure("read error while parsing stream");
  return {std::move(entries), std::move(report)};
}

} // namespace weblog
