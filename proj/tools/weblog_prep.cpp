// Command line front end for the log preprocessing pipeline. Each stage of
// the pipeline is exposed as a subcommand that reads either raw logs or the
// tab-separated output of the previous stage, so any prefix of the pipeline
// can be run and inspected on its own.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "weblog/weblog.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNoParseableInput = 4;
constexpr int kExitInternal = 5;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TsvInput {
  std::string path;
  std::int64_t skew_seconds = 0;
};

struct Options {
  std::vector<std::string> raw_inputs;
  std::vector<std::string> tsv_inputs;
  std::string format = "auto";
  std::string out_dir;
  std::vector<std::string> drop_ext;
  std::vector<std::string> robot_keywords;
  bool no_robots_txt_rule = false;
  std::string keep_status;
  std::string anonymize = "off";
  std::int64_t timeout_seconds = 1800;
  std::string referrer_rule = "on";
  std::string period = "day";
  unsigned generalize_depth = 0;
  std::string cleaning_report_path;
  bool quiet = false;
};

std::optional<std::int64_t> parse_int64(const std::string &s) {
  if (s.empty())
    return std::nullopt;
  std::size_t pos = 0;
  try {
    const std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size())
      return std::nullopt;
    return v;
  } catch (const std::exception &) {
    return std::nullopt;
  }
}

// server_name=path[:skew_seconds]
weblog::InputSpec parse_input_flag(const std::string &arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError("--input expects server_name=path[:skew_seconds], got: " + arg);
  weblog::InputSpec spec;
  spec.server_name = arg.substr(0, eq);
  std::string rest = arg.substr(eq + 1);
  const auto colon = rest.rfind(':');
  if (colon != std::string::npos && colon + 1 < rest.size()) {
    if (const auto skew = parse_int64(rest.substr(colon + 1))) {
      spec.skew_seconds = *skew;
      rest = rest.substr(0, colon);
    }
  }
  if (rest.empty())
    throw UsageError("--input has an empty path: " + arg);
  spec.path = rest;
  return spec;
}

// path[:skew_seconds]
TsvInput parse_tsv_flag(const std::string &arg) {
  TsvInput in;
  std::string rest = arg;
  const auto colon = rest.rfind(':');
  if (colon != std::string::npos && colon + 1 < rest.size()) {
    if (const auto skew = parse_int64(rest.substr(colon + 1))) {
      in.skew_seconds = *skew;
      rest = rest.substr(0, colon);
    }
  }
  if (rest.empty())
    throw UsageError("--input-tsv has an empty path: " + arg);
  in.path = rest;
  return in;
}

std::optional<weblog::LogFormat> parse_format(const std::string &name) {
  if (name == "auto")
    return std::nullopt;
  if (name == "clf")
    return weblog::LogFormat::clf;
  if (name == "eclf")
    return weblog::LogFormat::eclf;
  if (name == "combined")
    return weblog::LogFormat::combined;
  throw UsageError("unknown format: " + name);
}

weblog::Granularity parse_period(const std::string &name) {
  if (name == "hour")
    return weblog::Granularity::hour;
  if (name == "day")
    return weblog::Granularity::day;
  if (name == "week")
    return weblog::Granularity::week;
  if (name == "month")
    return weblog::Granularity::month;
  throw UsageError("unknown period: " + name);
}

weblog::PipelineConfig build_config(const Options &opts) {
  weblog::PipelineConfig config;
  for (const auto &arg : opts.raw_inputs)
    config.inputs.push_back(parse_input_flag(arg));
  if (std::count_if(config.inputs.begin(), config.inputs.end(),
                    [](const auto &i) { return i.path == "-"; }) > 0 &&
      config.inputs.size() > 1)
    throw UsageError("stdin (\"-\") is only accepted as the single input");
  config.format = parse_format(opts.format);

  for (const auto &e : opts.drop_ext) {
    if (e.find('.') != std::string::npos)
      throw UsageError("--drop-ext entries carry no dot: " + e);
    config.cleaning.drop_extensions.insert(weblog::ascii_lower(e));
  }
  for (const auto &k : opts.robot_keywords)
    config.cleaning.robot_agent_keywords.insert(weblog::ascii_lower(k));
  config.cleaning.robots_txt_rule = !opts.no_robots_txt_rule;
  if (!opts.keep_status.empty()) {
    const auto dash = opts.keep_status.find('-');
    const auto lo = dash == std::string::npos
                        ? std::nullopt
                        : parse_int64(opts.keep_status.substr(0, dash));
    const auto hi = dash == std::string::npos
                        ? std::nullopt
                        : parse_int64(opts.keep_status.substr(dash + 1));
    if (!lo || !hi || *lo > *hi)
      throw UsageError("--keep-status expects lo-hi, got: " + opts.keep_status);
    config.cleaning.keep_status_lo = int(*lo);
    config.cleaning.keep_status_hi = int(*hi);
  }
  if (opts.anonymize == "hash")
    config.cleaning.anonymize = weblog::AnonymizeMode::hash;
  else if (opts.anonymize != "off")
    throw UsageError("--anonymize expects off or hash");

  if (opts.timeout_seconds <= 0)
    throw UsageError("--timeout-seconds must be positive");
  config.sessionizer.timeout_seconds = opts.timeout_seconds;
  if (opts.referrer_rule == "off")
    config.sessionizer.referrer_rule = false;
  else if (opts.referrer_rule != "on")
    throw UsageError("--referrer-rule expects on or off");

  config.period = parse_period(opts.period);
  config.generalize_depth = opts.generalize_depth;
  config.out_dir = opts.out_dir;
  return config;
}

void add_common_flags(CLI::App *cmd, Options &opts, bool with_stage_input) {
  cmd->add_flag("--quiet", opts.quiet, "suppress progress and report output");
  cmd->add_option("--input", opts.raw_inputs,
                  "raw log input as server_name=path[:skew_seconds]; path \"-\" reads stdin");
  if (with_stage_input)
    cmd->add_option("--input-tsv", opts.tsv_inputs,
                    "stage output of a previous subcommand as path[:skew_seconds]");
  cmd->add_option("--format", opts.format, "log format: auto, clf, eclf or combined")
      ->capture_default_str();
  cmd->add_option("--out", opts.out_dir, "output directory")->required();
}

void add_cleaning_flags(CLI::App *cmd, Options &opts) {
  cmd->add_option("--drop-ext", opts.drop_ext, "extra resource extension to drop (no dot)");
  cmd->add_option("--robot-keyword", opts.robot_keywords, "extra robot agent keyword");
  cmd->add_flag("--no-robots-txt-rule", opts.no_robots_txt_rule,
                "do not flag clients that fetched /robots.txt");
  cmd->add_option("--keep-status", opts.keep_status, "kept status range as lo-hi")
      ->default_str("200-399");
  cmd->add_option("--anonymize", opts.anonymize, "off or hash")->capture_default_str();
}

void add_session_flags(CLI::App *cmd, Options &opts) {
  cmd->add_option("--timeout-seconds", opts.timeout_seconds, "session timeout in seconds")
      ->capture_default_str();
  cmd->add_option("--referrer-rule", opts.referrer_rule,
                  "on: a request joins the history that most recently served its referrer; "
                  "off: split on timeout only")
      ->capture_default_str();
}

void add_summary_flags(CLI::App *cmd, Options &opts) {
  cmd->add_option("--period", opts.period, "aggregation period: hour, day, week or month")
      ->capture_default_str();
  cmd->add_option("--generalize-depth", opts.generalize_depth,
                  "truncate request urls to this many path segments (0 disables)")
      ->capture_default_str();
}

std::vector<weblog::LogSource> tsv_sources(const Options &opts) {
  std::vector<weblog::LogSource> sources;
  for (const auto &arg : opts.tsv_inputs) {
    const TsvInput in = parse_tsv_flag(arg);
    auto entries = weblog::read_tsv(in.path);
    std::string server = entries.empty() ? std::string() : entries.front().server;
    for (const auto &e : entries)
      if (e.server != server)
        throw weblog::IoFailure(in.path + ": holds several servers; merge expects one "
                                          "parse-stage file per server");
    sources.push_back(weblog::LogSource{std::move(server), std::move(entries), in.skew_seconds});
  }
  return sources;
}

// Reads whichever inputs the subcommand got and produces the merged joint
// log. TSV inputs are treated as already merged when there is exactly one.
weblog::JointLog load_joint(const Options &opts, const weblog::PipelineConfig &config,
                            std::vector<weblog::LoadedSource> *loaded_out) {
  if (!opts.tsv_inputs.empty() && !opts.raw_inputs.empty())
    throw UsageError("use either --input or --input-tsv, not both");
  if (opts.tsv_inputs.empty() && opts.raw_inputs.empty())
    throw UsageError("no inputs given");

  if (!opts.tsv_inputs.empty()) {
    if (opts.tsv_inputs.size() == 1 && parse_tsv_flag(opts.tsv_inputs.front()).skew_seconds == 0)
      return weblog::joint_from_entries(
          weblog::read_tsv(parse_tsv_flag(opts.tsv_inputs.front()).path));
    return weblog::merge(tsv_sources(opts));
  }

  std::vector<weblog::LogSource> sources;
  for (const auto &spec : config.inputs) {
    auto loaded = weblog::load_source(spec, config.format);
    sources.push_back(weblog::LogSource{loaded.source.server_name,
                                        std::move(loaded.source.entries),
                                        loaded.source.clock_skew_seconds});
    loaded.source.entries.clear();
    if (loaded_out)
      loaded_out->push_back(std::move(loaded));
  }
  return weblog::merge(std::move(sources));
}

void write_json_file(const std::filesystem::path &path, const nlohmann::json &j) {
  weblog::write_text_file(path, j.dump(2) + "\n");
}

int cmd_run(const Options &opts) {
  const auto config = build_config(opts);
  if (config.inputs.empty())
    throw UsageError("run needs at least one --input");
  const auto result = weblog::run_pipeline(config);
  if (!opts.quiet)
    std::cout << result.report.human;
  return kExitOk;
}

int cmd_parse(const Options &opts) {
  const auto config = build_config(opts);
  if (config.inputs.empty())
    throw UsageError("parse needs at least one --input");
  std::filesystem::create_directories(config.out_dir);
  std::vector<weblog::LoadedSource> loaded;
  for (const auto &spec : config.inputs) {
    loaded.push_back(weblog::load_source(spec, config.format));
    const auto &src = loaded.back();
    weblog::write_tsv(config.out_dir / ("parsed_" + spec.server_name + ".tsv"),
                      src.source.entries);
    if (!opts.quiet)
      std::cout << spec.server_name << ": " << src.report.parsed << " parsed, "
                << src.report.rejected << " rejected (" << weblog::format_name(src.format)
                << ")\n";
  }
  write_json_file(config.out_dir / "parse_report.json", weblog::parse_reports_to_json(loaded));
  return kExitOk;
}

int cmd_merge(const Options &opts) {
  const auto config = build_config(opts);
  std::filesystem::create_directories(config.out_dir);

  std::vector<weblog::LogSource> sources = tsv_sources(opts);
  std::vector<weblog::LoadedSource> loaded;
  for (const auto &spec : config.inputs) {
    loaded.push_back(weblog::load_source(spec, config.format));
    auto &src = loaded.back().source;
    sources.push_back(
        weblog::LogSource{src.server_name, std::move(src.entries), src.clock_skew_seconds});
  }
  if (sources.empty())
    throw UsageError("merge needs --input or --input-tsv");

  const auto joint = weblog::merge(std::move(sources));
  weblog::write_tsv(config.out_dir / "joint.tsv", joint.entries);
  if (!loaded.empty())
    write_json_file(config.out_dir / "parse_report.json", weblog::parse_reports_to_json(loaded));
  if (!opts.quiet)
    std::cout << joint.entries.size() << " entries from " << joint.source_count << " servers\n";
  return kExitOk;
}

int cmd_clean(const Options &opts) {
  const auto config = build_config(opts);
  std::filesystem::create_directories(config.out_dir);
  const auto joint = load_joint(opts, config, nullptr);
  auto [kept, report] = weblog::clean(joint, config.cleaning);
  kept = weblog::anonymize(std::move(kept), config.cleaning.anonymize);
  weblog::write_tsv(config.out_dir / "cleaned.tsv", kept.entries);
  write_json_file(config.out_dir / "cleaning_report.json",
                  weblog::cleaning_report_to_json(report));
  if (!opts.quiet)
    std::cout << "kept " << report.kept_count << " of " << report.input_count << " entries ("
              << weblog::format_percent(report.reduction_percent) << " size reduction)\n";
  return kExitOk;
}

// Entries reach this stage already cleaned when they come in as a stage
// file; raw inputs run the cleaning prefix first.
weblog::JointLog load_cleaned(const Options &opts, const weblog::PipelineConfig &config,
                              weblog::CleaningReport *report_out) {
  weblog::JointLog joint = load_joint(opts, config, nullptr);
  if (!opts.tsv_inputs.empty()) {
    if (report_out && !opts.cleaning_report_path.empty()) {
      std::ifstream in(opts.cleaning_report_path);
      if (!in)
        throw weblog::IoFailure("cannot open " + opts.cleaning_report_path);
      *report_out = weblog::cleaning_report_from_json(nlohmann::json::parse(in));
    }
    return joint;
  }
  auto [kept, report] = weblog::clean(joint, config.cleaning);
  if (report_out)
    *report_out = report;
  return weblog::anonymize(std::move(kept), config.cleaning.anonymize);
}

int cmd_sessionize(const Options &opts) {
  const auto config = build_config(opts);
  std::filesystem::create_directories(config.out_dir);
  weblog::JointLog log = load_cleaned(opts, config, nullptr);
  weblog::UserTable users = weblog::assign_users(log);
  weblog::SessionSet sessions = weblog::sessionize(log, config.sessionizer);
  weblog::generalize_log(log, config.generalize_depth);
  weblog::write_tsv(config.out_dir / "annotated.tsv", log.entries);
  const auto bundle = weblog::make_bundle(std::move(log), std::move(users), std::move(sessions),
                                          config.period);
  weblog::export_entity_tables(bundle, config.out_dir);
  if (!opts.quiet)
    std::cout << bundle.sessions.visits.size() << " visits across " << bundle.users.rows.size()
              << " users\n";
  return kExitOk;
}

int cmd_summarize(const Options &opts) {
  const auto config = build_config(opts);
  std::filesystem::create_directories(config.out_dir);
  weblog::CleaningReport cleaning;
  weblog::JointLog log = load_cleaned(opts, config, &cleaning);
  weblog::UserTable users = weblog::assign_users(log);
  weblog::SessionSet sessions = weblog::sessionize(log, config.sessionizer);
  weblog::generalize_log(log, config.generalize_depth);
  const auto bundle = weblog::make_bundle(std::move(log), std::move(users), std::move(sessions),
                                          config.period);
  weblog::export_aggregate_tables(bundle, config.out_dir);

  const auto report = weblog::render_report(
      cleaning, weblog::run_counts(config, bundle.log, bundle.sessions.visits.size(),
                                   bundle.users.rows.size()));
  write_json_file(config.out_dir / "report.json", report.machine);
  if (!opts.quiet)
    std::cout << report.human;
  return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"web access log preprocessing: merge, clean, sessionize, summarize"};
  app.set_version_flag("--version", "weblog-prep 0.1.0");
  app.require_subcommand(1);

  Options opts;
  auto *run = app.add_subcommand("run", "run the whole pipeline and export all tables");
  add_common_flags(run, opts, false);
  add_cleaning_flags(run, opts);
  add_session_flags(run, opts);
  add_summary_flags(run, opts);

  auto *parse = app.add_subcommand("parse", "parse raw logs into stage files");
  add_common_flags(parse, opts, false);

  auto *merge = app.add_subcommand("merge", "merge per-server logs into the joint log");
  add_common_flags(merge, opts, true);

  auto *cln = app.add_subcommand("clean", "drop robot, resource and failed requests");
  add_common_flags(cln, opts, true);
  add_cleaning_flags(cln, opts);

  auto *sess = app.add_subcommand("sessionize", "assign users and reconstruct visits");
  add_common_flags(sess, opts, true);
  add_cleaning_flags(sess, opts);
  add_session_flags(sess, opts);
  sess->add_option("--generalize-depth", opts.generalize_depth,
                   "truncate request urls to this many path segments (0 disables)")
      ->capture_default_str();

  auto *summ = app.add_subcommand("summarize", "compute aggregates and the run report");
  add_common_flags(summ, opts, true);
  add_cleaning_flags(summ, opts);
  add_session_flags(summ, opts);
  add_summary_flags(summ, opts);
  summ->add_option("--cleaning-report", opts.cleaning_report_path,
                   "cleaning_report.json from the clean stage (for the size columns)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run->parsed())
      return cmd_run(opts);
    if (parse->parsed())
      return cmd_parse(opts);
    if (merge->parsed())
      return cmd_merge(opts);
    if (cln->parsed())
      return cmd_clean(opts);
    if (sess->parsed())
      return cmd_sessionize(opts);
    if (summ->parsed())
      return cmd_summarize(opts);
    return kExitUsage;
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const weblog::DuplicateServerName &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const weblog::NoParseableLines &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoParseableInput;
  } catch (const weblog::IoFailure &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}
