#pragma once

#include <string>
#include <string_view>

namespace weblog {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char &c : out)
    if (c >= 'A' && c <= 'Z')
      c += 32;
  return out;
}

inline bool contains_ci(std::string_view haystack, std::string_view needle) {
  if (needle.empty() || haystack.size() < needle.size())
    return false;
  const auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? char(c + 32) : c; };
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    std::size_t j = 0;
    while (j < needle.size() && lower(haystack[i + j]) == lower(needle[j]))
      ++j;
    if (j == needle.size())
      return true;
  }
  return false;
}

inline std::string_view strip_query(std::string_view url) {
  return url.substr(0, url.find('?'));
}

// Scheme and host removed, query retained. Referrers appear in logs as
// absolute URLs while request urls are paths; this maps both to paths.
inline std::string_view url_path_and_query(std::string_view url) {
  if (url.empty() || url.front() == '/')
    return url;
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos)
    return url;
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string_view::npos)
    return "/";
  return url.substr(slash);
}

// Lowercased text after the last "." of the last path segment, query
// stripped. Empty when the last segment has no dot.
inline std::string url_extension(std::string_view url) {
  std::string_view path = strip_query(url_path_and_query(url));
  const auto seg_start = path.rfind('/');
  std::string_view last = seg_start == std::string_view::npos ? path : path.substr(seg_start + 1);
  const auto dot = last.rfind('.');
  if (dot == std::string_view::npos || dot + 1 == last.size())
    return {};
  return ascii_lower(last.substr(dot + 1));
}

} // namespace weblog
