#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "weblog/cleaner.hpp"
#include "weblog/exporter.hpp"
#include "weblog/identity.hpp"
#include "weblog/merger.hpp"
#include "weblog/parser.hpp"
#include "weblog/sessionizer.hpp"
#include "weblog/summarizer.hpp"

namespace weblog {

struct InputSpec {
  std::string server_name;
  std::string path; // "-" reads stdin
  std::int64_t skew_seconds = 0;
};

struct PipelineConfig {
  std::vector<InputSpec> inputs;
  std::optional<LogFormat> format; // nullopt = auto-detect per file
  CleaningConfig cleaning;
  SessionizerConfig sessionizer;
  Granularity period = Granularity::day;
  unsigned generalize_depth = 0; // 0 disables url generalization
  std::filesystem::path out_dir;
};

struct LoadedSource {
  LogSource source;
  ParseReport report;
  LogFormat format = LogFormat::combined;
};

// Parses one raw log file (or stdin for "-"). With no fixed format the file
// is sniffed on its first lines.
inline LoadedSource load_source(const InputSpec &spec, std::optional<LogFormat> format) {
  std::ifstream file;
  std::istream *in = &std::cin;
  if (spec.path != "-") {
    file.open(spec.path, std::ios::binary);
    if (!file)
      throw IoFailure("cannot open input file: " + spec.path);
    in = &file;
  }

  LoadedSource loaded;
  loaded.source.server_name = spec.server_name;
  loaded.source.clock_skew_seconds = spec.skew_seconds;

  if (format) {
    loaded.format = *format;
    auto [entries, report] = parse_stream(*in, *format);
    loaded.source.entries = std::move(entries);
    loaded.report = std::move(report);
    for (auto &e : loaded.source.entries)
      e.server = spec.server_name;
    return loaded;
  }

  std::vector<std::string> lines;
  for (std::string line; std::getline(*in, line);)
    lines.push_back(std::move(line));
  if (in->bad())
    throw IoFailure("read error on input: " + spec.path);

  static constexpr std::size_t kSniffLines = 100;
  std::span<const std::string> sample(lines.data(), std::min(lines.size(), kSniffLines));
  if (lines.empty()) {
    loaded.format = LogFormat::combined;
  } else {
    loaded.format = detect_format(sample);
  }

  std::string reason;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    ++loaded.report.total_lines;
    if (auto e = parse_line(lines[i], loaded.format, &reason)) {
      e->line_no = i + 1;
      e->server = spec.server_name;
      loaded.source.entries.push_back(std::move(*e));
      ++loaded.report.parsed;
    } else {
      ++loaded.report.rejected;
      loaded.report.rejects.emplace_back(i + 1, reason);
    }
  }
  return loaded;
}

// --- intermediate stage format ----------------------------------------------
//
// One record per line: server TAB user_id TAB canonical combined log line.
// Human-inspectable and re-parseable, so every stage boundary can be audited.

inline void write_tsv(const std::filesystem::path &path, const std::vector<LogEntry> &entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoFailure("cannot open " + path.string() + " for writing");
  for (const auto &e : entries) {
    out << e.server << '\t' << e.user_id << '\t' << canonicalize(e, LogFormat::combined) << '\n';
  }
  if (!out)
    throw IoFailure("write error on " + path.string());
}

inline std::vector<LogEntry> read_tsv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoFailure("cannot open " + path.string());
  std::vector<LogEntry> entries;
  std::string line;
  std::uint64_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos)
      throw IoFailure(path.string() + ":" + std::to_string(row) + ": not a stage record");
    std::string reason;
    auto e = parse_line(std::string_view(line).substr(tab2 + 1), LogFormat::combined, &reason);
    if (!e)
      throw IoFailure(path.string() + ":" + std::to_string(row) + ": " + reason);
    e->server = line.substr(0, tab1);
    std::uint64_t uid = 0;
    const char *uid_first = line.data() + tab1 + 1;
    const char *uid_last = line.data() + tab2;
    const auto [p, ec] = std::from_chars(uid_first, uid_last, uid);
    if (ec != std::errc{} || p != uid_last)
      throw IoFailure(path.string() + ":" + std::to_string(row) + ": bad user id column");
    e->user_id = uid;
    e->line_no = row;
    entries.push_back(std::move(*e));
  }
  if (in.bad())
    throw IoFailure("read error on " + path.string());
  return entries;
}

inline JointLog joint_from_entries(std::vector<LogEntry> entries) {
  JointLog joint;
  std::set<std::string> servers;
  for (const auto &e : entries)
    servers.insert(e.server);
  joint.source_count = servers.size();
  joint.entries = std::move(entries);
  // stage files are written in merge order; restoring it here keeps hand
  // edited or concatenated files usable
  std::sort(joint.entries.begin(), joint.entries.end(), merge_order);
  return joint;
}

// --- report plumbing ---------------------------------------------------------

inline nlohmann::json cleaning_report_to_json(const CleaningReport &r) {
  return {{"input_count", r.input_count},
          {"kept_count", r.kept_count},
          {"dropped_by_extension", r.dropped_by_extension},
          {"dropped_by_method", r.dropped_by_method},
          {"dropped_by_status", r.dropped_by_status},
          {"dropped_as_robot", r.dropped_as_robot},
          {"input_bytes", r.input_bytes},
          {"kept_bytes", r.kept_bytes},
          {"reduction_percent", r.reduction_percent}};
}

inline CleaningReport cleaning_report_from_json(const nlohmann::json &j) {
  CleaningReport r;
  r.input_count = j.at("input_count").get<std::uint64_t>();
  r.kept_count = j.at("kept_count").get<std::uint64_t>();
  r.dropped_by_extension = j.at("dropped_by_extension").get<std::uint64_t>();
  r.dropped_by_method = j.at("dropped_by_method").get<std::uint64_t>();
  r.dropped_by_status = j.at("dropped_by_status").get<std::uint64_t>();
  r.dropped_as_robot = j.at("dropped_as_robot").get<std::uint64_t>();
  r.input_bytes = j.at("input_bytes").get<std::uint64_t>();
  r.kept_bytes = j.at("kept_bytes").get<std::uint64_t>();
  r.reduction_percent = j.at("reduction_percent").get<double>();
  return r;
}

inline nlohmann::json parse_reports_to_json(const std::vector<LoadedSource> &sources) {
  auto arr = nlohmann::json::array();
  for (const auto &s : sources) {
    auto rejects = nlohmann::json::array();
    for (const auto &[line_no, reason] : s.report.rejects)
      rejects.push_back({{"line", line_no}, {"reason", reason}});
    arr.push_back({{"server", s.source.server_name},
                   {"format", format_name(s.format)},
                   {"total_lines", s.report.total_lines},
                   {"parsed", s.report.parsed},
                   {"rejected", s.report.rejected},
                   {"rejects", rejects}});
  }
  return arr;
}

inline nlohmann::json config_echo(const PipelineConfig &config) {
  auto inputs = nlohmann::json::array();
  for (const auto &i : config.inputs)
    inputs.push_back({{"server", i.server_name}, {"path", i.path}, {"skew", i.skew_seconds}});
  return {{"inputs", inputs},
          {"format", config.format ? format_name(*config.format) : "auto"},
          {"drop_extensions", config.cleaning.drop_extensions},
          {"keep_methods", config.cleaning.keep_methods},
          {"keep_status", {config.cleaning.keep_status_lo, config.cleaning.keep_status_hi}},
          {"robot_keywords", config.cleaning.robot_agent_keywords},
          {"robots_txt_rule", config.cleaning.robots_txt_rule},
          {"anonymize", config.cleaning.anonymize == AnonymizeMode::hash ? "hash" : "off"},
          {"timeout_seconds", config.sessionizer.timeout_seconds},
          {"referrer_rule", config.sessionizer.referrer_rule},
          {"period", granularity_name(config.period)},
          {"generalize_depth", config.generalize_depth}};
}

inline void write_text_file(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoFailure("cannot open " + path.string() + " for writing");
  out << content;
  if (!out)
    throw IoFailure("write error on " + path.string());
}

// --- full pipeline -----------------------------------------------------------

struct PipelineResult {
  ExportBundle bundle;
  CleaningReport cleaning;
  std::vector<LoadedSource> sources; // entries moved out, reports kept
  Report report;
  std::vector<std::filesystem::path> written;
};

inline void generalize_log(JointLog &log, unsigned depth) {
  if (depth == 0)
    return;
  for (auto &e : log.entries)
    e.url = generalize_url(e.url, depth);
}

inline RunCounts run_counts(const PipelineConfig &config, const JointLog &joint,
                            std::uint64_t sessions, std::uint64_t users) {
  RunCounts counts;
  std::set<std::string> names;
  for (const auto &e : joint.entries)
    names.insert(e.server);
  if (names.empty())
    for (const auto &i : config.inputs)
      names.insert(i.server_name);
  for (const auto &n : names)
    counts.website += (counts.website.empty() ? "" : "+") + n;
  if (!joint.entries.empty())
    counts.duration = {joint.entries.front().time.utc_epoch_seconds,
                       joint.entries.back().time.utc_epoch_seconds};
  counts.sessions = sessions;
  counts.users = users;
  counts.config = config_echo(config);
  return counts;
}

// merge -> clean -> identify users -> sessionize -> summarize -> export,
// exactly in that order. Deterministic for identical inputs and config.
inline PipelineResult run_pipeline(const PipelineConfig &config) {
  PipelineResult result;

  std::vector<LogSource> sources;
  for (const auto &spec : config.inputs) {
    result.sources.push_back(load_source(spec, config.format));
    auto &loaded = result.sources.back().source;
    sources.push_back(
        LogSource{loaded.server_name, std::move(loaded.entries), loaded.clock_skew_seconds});
  }

  const JointLog joint = merge(std::move(sources));

  auto [kept, cleaning] = clean(joint, config.cleaning);
  result.cleaning = cleaning;
  JointLog log = anonymize(std::move(kept), config.cleaning.anonymize);

  UserTable users = assign_users(log);
  SessionSet sessions = sessionize(log, config.sessionizer);
  generalize_log(log, config.generalize_depth);

  result.bundle =
      make_bundle(std::move(log), std::move(users), std::move(sessions), config.period);
  result.written = export_tables(result.bundle, config.out_dir);

  result.report = render_report(
      cleaning, run_counts(config, result.bundle.log, result.bundle.sessions.visits.size(),
                           result.bundle.users.rows.size()));
  result.report.machine["parse"] = parse_reports_to_json(result.sources);
  const auto report_path = config.out_dir / "report.json";
  write_text_file(report_path, result.report.machine.dump(2) + "\n");
  result.written.push_back(report_path);
  return result;
}

} // namespace weblog
