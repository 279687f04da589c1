// Acceptance suite: every release criterion runs here and prints one
// pass/fail line. The process exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nasa_fixture.hpp"
#include "testutil.hpp"
#include "weblog/weblog.hpp"

using namespace weblog;
namespace fs = std::filesystem;

namespace {

struct Checker {
  std::vector<std::string> problems;
  void expect(bool ok, const std::string &what) {
    if (!ok)
      problems.push_back(what);
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "weblog_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string &args) {
  const std::string cmd = std::string(WEBLOG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc < 0 ? rc : WEXITSTATUS(rc);
}

const fs::path &nasa_slice_path() {
  static const fs::path path = [] {
    const fs::path p = work_dir() / "nasa_100k.log";
    const auto lines = testutil::nasa_style_lines(100000, 1995);
    std::ofstream out(p, std::ios::binary);
    for (const auto &l : lines)
      out << l << '\n';
    return p;
  }();
  return path;
}

// 1. Parser golden test: the five sample lines parse to the exact field
//    values and canonicalize->parse is the identity. Runtime < 1 s.
void criterion_parser_golden(Checker &c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto lines = testutil::vanuatu_sample_lines();

  struct Expected {
    const char *ip;
    const char *iso;
    const char *url;
    int status;
    std::int64_t bytes;
  };
  const Expected expected[5] = {
      {"72.30.252.91", "2006-06-18T12:28:33Z", "/robots.txt", 200, 52},
      {"83.77.134.184", "2006-06-18T12:29:40Z",
       "/vanuatu/export/system/modules/VTO/resources/stylesheet/vto.css", 200, 7797},
      {"83.77.134.184", "2006-06-18T12:29:41Z",
       "/vanuatu/export/sites/VTO/fr/kids/volcanoes/ambrym_eruption.html", 200, 26812},
      {"83.77.134.184", "2006-06-18T12:29:41Z",
       "/vanuatu/export/system/modules/VTO/resources/images/nto_kids_logo.jpg", 200, 10420},
      {"83.77.134.184", "2006-06-18T12:29:41Z",
       "/vanuatu/export/system/modules/VTO/resources/images/vanuatu.gif", 200, 40892},
  };

  for (int i = 0; i < 5; ++i) {
    const auto e = parse_line(lines[i], LogFormat::combined);
    if (!e) {
      c.expect(false, "line " + std::to_string(i + 1) + " did not parse");
      continue;
    }
    c.expect(e->ip == expected[i].ip, "ip mismatch on line " + std::to_string(i + 1));
    c.expect(format_iso8601(e->time.utc_epoch_seconds) == expected[i].iso,
             "timestamp mismatch on line " + std::to_string(i + 1));
    c.expect(e->url == expected[i].url, "url mismatch on line " + std::to_string(i + 1));
    c.expect(e->status == expected[i].status, "status mismatch on line " + std::to_string(i + 1));
    c.expect(e->bytes && std::int64_t(*e->bytes) == expected[i].bytes,
             "bytes mismatch on line " + std::to_string(i + 1));
    c.expect(e->method == "GET" && e->protocol.substr(0, 5) == "HTTP/",
             "request mismatch on line " + std::to_string(i + 1));

    const std::string rendered = canonicalize(*e, LogFormat::combined);
    c.expect(rendered == lines[i], "canonicalize is not the identity on line " +
                                       std::to_string(i + 1));
    const auto back = parse_line(rendered, LogFormat::combined);
    c.expect(back && same_record(*back, *e), "round trip changed line " + std::to_string(i + 1));
  }
  c.expect(!parse_line(lines[0], LogFormat::combined)->referrer, "line 1 referrer not absent");
  const auto agent = parse_line(lines[0], LogFormat::combined)->agent;
  c.expect(agent && agent->rfind("Mozilla/5.0 (compatible; Yahoo! Slurp", 0) == 0,
           "line 1 agent mismatch");
  c.expect(seconds_since(t0) < 1.0, "runtime >= 1 s");
}

// 2. Session-table reconstruction: the 14-row fixture splits into exactly
//    three visits (5/2/7 with the overnight gap) and session_detail.csv
//    reproduces the rows in the stated datetime format. Runtime < 1 s.
void criterion_session_reconstruction(Checker &c) {
  const auto t0 = std::chrono::steady_clock::now();
  auto joint = testutil::joint_from_lines(testutil::shuttle_log_lines(), LogFormat::clf);
  UserTable users = assign_users(joint);
  SessionizerConfig config; // timeout 1800 s
  config.referrer_rule = false;
  SessionSet sessions = sessionize(joint, config);

  c.expect(sessions.visits.size() == 3,
           "expected 3 visits, got " + std::to_string(sessions.visits.size()));
  if (sessions.visits.size() == 3) {
    c.expect(sessions.visits[0].page_views == 5, "evening visit should hold 5 requests");
    c.expect(sessions.visits[1].page_views == 2, "overnight visit should hold 2 requests");
    c.expect(sessions.visits[2].page_views == 7, "scan visit should hold 7 requests");
    c.expect(sessions.visits[0].user_id == sessions.visits[1].user_id,
             "the split visits must belong to one user");
    const std::int64_t gap = sessions.visits[1].start.utc_epoch_seconds -
                             sessions.visits[0].end.utc_epoch_seconds;
    c.expect(gap == 8909 && gap > 1800, "overnight gap should be 8909 s > timeout");
  }

  const fs::path dir = work_dir() / "session_reconstruction";
  export_tables(make_bundle(std::move(joint), std::move(users), std::move(sessions),
                            Granularity::day),
                dir);
  std::string expected = "session_id,ip,datetime,url\n";
  const auto rows = testutil::shuttle_detail_rows();
  const auto emit = [&](std::size_t first, std::size_t last, int visit) {
    for (std::size_t i = first; i <= last; ++i)
      expected += std::to_string(visit) + "," + rows[i].ip + "," + rows[i].datetime + "," +
                  rows[i].url + "\n";
  };
  emit(7, 11, 1);
  emit(12, 13, 2);
  emit(0, 6, 3);
  c.expect(slurp(dir / "session_detail.csv") == expected,
           "session_detail.csv does not reproduce the fixture rows");
  c.expect(seconds_since(t0) < 1.0, "runtime >= 1 s");
}

// 3. Size reduction on a 100k-line NASA-style slice with the default
//    cleaning config lands in [62, 92] percent and the report carries every
//    result column. Runtime < 30 s.
void criterion_reduction_band(Checker &c) {
  const auto t0 = std::chrono::steady_clock::now();
  PipelineConfig config;
  config.inputs.push_back({"www", nasa_slice_path().string(), 0});
  config.sessionizer.referrer_rule = false; // clf corpus has no referrers
  config.out_dir = work_dir() / "reduction_out";
  const auto result = run_pipeline(config);

  c.expect(result.cleaning.input_count == 100000, "slice should hold 100000 parsed lines");
  const double reduction = result.cleaning.reduction_percent;
  std::printf("         measured reduction %.2f%% (reference corpora: 72.22%% .. 82.50%%)\n",
              reduction);
  std::printf("         sessions %zu users %zu (reference: 16810 sessions, 12525 users on the "
              "20-24 Jul 1995 corpus)\n",
              std::size_t(result.bundle.sessions.visits.size()),
              std::size_t(result.bundle.users.rows.size()));
  c.expect(reduction >= 62.0 && reduction <= 92.0, "reduction outside [62, 92]");

  for (const char *label : {"Website", "Duration", "Original Size", "Size after Preprocessing",
                            "% Reduction in Size", "No. of Sessions", "No. of Users"})
    c.expect(result.report.human.find(label) != std::string::npos,
             std::string("report misses column: ") + label);
  for (const char *key : {"website", "duration", "original_size_bytes", "preprocessed_size_bytes",
                          "reduction_percent", "sessions", "users", "reference_results"})
    c.expect(result.report.machine.contains(key), std::string("report.json misses: ") + key);
  c.expect(seconds_since(t0) < 30.0, "runtime >= 30 s");
}

// 4. Sessionizer equivalence: over 1000 random small logs the partition
//    equals a literal brute-force transcription of the reconstruction rule.
void criterion_sessionizer_oracle(Checker &c) {
  testutil::Rng rng(404);
  std::size_t mismatches = 0;
  for (int round = 0; round < 1000; ++round) {
    auto log = testutil::random_session_log(rng);
    assign_users(log);
    SessionizerConfig config;
    config.timeout_seconds = 300 + rng() % 2400;
    config.referrer_rule = rng() % 2 == 0;
    const auto got = testutil::partition_of(sessionize(log, config));
    const auto want = testutil::literal_sessionize(log, config.timeout_seconds,
                                                   config.referrer_rule);
    if (got != want)
      ++mismatches;
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " of 1000 partitions differ");
}

// 5. Cleaning conservation on every corpus, and enlarging the drop set is
//    monotone non-increasing in kept_count across 200 random configs.
void criterion_cleaning_conservation(Checker &c) {
  testutil::Rng rng(505);
  const auto conserved = [](const CleaningReport &r) {
    return r.input_count == r.kept_count + r.dropped_as_robot + r.dropped_by_extension +
                                r.dropped_by_method + r.dropped_by_status;
  };

  const auto vanuatu = testutil::joint_from_lines(testutil::vanuatu_sample_lines());
  const auto shuttle = testutil::joint_from_lines(testutil::shuttle_log_lines(), LogFormat::clf);
  c.expect(conserved(clean(vanuatu, CleaningConfig{}).second), "conservation (crawler sample)");
  c.expect(conserved(clean(shuttle, CleaningConfig{}).second), "conservation (shuttle fixture)");

  std::ifstream nasa(nasa_slice_path(), std::ios::binary);
  auto parsed = parse_stream(nasa, LogFormat::clf);
  const auto nasa_joint = merge({LogSource{"www", std::move(parsed.first), 0}});
  c.expect(conserved(clean(nasa_joint, CleaningConfig{}).second), "conservation (nasa slice)");

  static const char *extension_pool[] = {"gif", "jpg", "jpeg", "png", "css", "js",
                                         "zip", "mp4", "txt", "html", "mpg", "wav"};
  for (int round = 0; round < 200; ++round) {
    const auto joint = testutil::random_traffic_log(rng, 150);

    CleaningConfig base;
    base.drop_extensions.clear();
    const unsigned picks = rng() % 6;
    for (unsigned i = 0; i < picks; ++i)
      base.drop_extensions.insert(extension_pool[rng() % 12]);
    base.robots_txt_rule = rng() % 2 == 0;
    if (rng() % 2)
      base.keep_status_lo = 100;

    CleaningConfig larger = base;
    const unsigned extra = 1 + rng() % 4;
    for (unsigned i = 0; i < extra; ++i)
      larger.drop_extensions.insert(extension_pool[rng() % 12]);

    const auto base_report = clean(joint, base).second;
    const auto larger_report = clean(joint, larger).second;
    c.expect(conserved(base_report), "conservation (random config)");
    c.expect(conserved(larger_report), "conservation (random enlarged config)");
    c.expect(larger_report.kept_count <= base_report.kept_count,
             "enlarging drop_extensions increased kept_count");
  }
}

// 6. Aggregation consistency: shares sum to 100 +- 1e-9, day buckets cover
//    every request, session aggregates equal a brute-force group-by.
void criterion_aggregation_consistency(Checker &c) {
  testutil::Rng rng(606);
  for (int round = 0; round < 100; ++round) {
    auto log = testutil::random_session_log(rng, 60, 6);
    assign_users(log);
    const auto sessions = sessionize(log, SessionizerConfig{});

    const auto shares = server_shares(log);
    double percent = 0;
    std::uint64_t counted = 0;
    for (const auto &s : shares) {
      percent += s.percent;
      counted += s.request_count;
    }
    if (!log.entries.empty())
      c.expect(std::abs(percent - 100.0) <= 1e-9, "server shares do not sum to 100");
    c.expect(counted == log.entries.size(), "server shares do not cover every request");

    std::uint64_t bucketed = 0;
    for (const auto &p : period_aggregates(log, sessions, Granularity::day))
      bucketed += p.request_count;
    c.expect(bucketed == log.entries.size(), "day buckets do not cover every request");

    std::map<std::uint64_t, std::uint64_t> pages;
    for (const auto &v : sessions.visits)
      pages[v.user_id] += v.page_views;
    const auto aggs = session_aggregates(sessions);
    c.expect(aggs.size() == pages.size(), "one aggregate per user");
    for (const auto &a : aggs)
      c.expect(a.page_views == pages.at(a.user_id),
               "session aggregate page views differ from group-by");
  }
}

// 7. Anonymization invariance: the visit partition under hash anonymization
//    is isomorphic to the un-anonymized partition on 100 random logs.
void criterion_anonymization_invariance(Checker &c) {
  testutil::Rng rng(707);
  for (int round = 0; round < 100; ++round) {
    auto plain = testutil::random_session_log(rng);
    auto hashed = anonymize(plain, AnonymizeMode::hash);
    assign_users(plain);
    assign_users(hashed);
    SessionizerConfig config;
    config.referrer_rule = rng() % 2 == 0;
    const auto p1 = testutil::partition_of(sessionize(plain, config));
    const auto p2 = testutil::partition_of(sessionize(hashed, config));
    c.expect(p1 == p2, "partition changed under anonymization");
  }
}

// 8. Throughput: the full run finishes the 100k slice in < 10 s and the
//    parse stage alone sustains >= 50k lines/s.
void criterion_throughput(Checker &c) {
  const auto parse_t0 = std::chrono::steady_clock::now();
  std::ifstream in(nasa_slice_path(), std::ios::binary);
  const auto [entries, report] = parse_stream(in, LogFormat::clf);
  const double parse_seconds = seconds_since(parse_t0);
  const double rate = double(report.total_lines) / parse_seconds;
  std::printf("         parse stage: %.0f lines/s\n", rate);
  c.expect(report.parsed == 100000, "parse should accept the whole slice");
  c.expect(rate >= 50000.0, "parse stage below 50k lines/s");

  const auto run_t0 = std::chrono::steady_clock::now();
  const int rc = run_cli("run --input www=" + nasa_slice_path().string() +
                         " --referrer-rule off --quiet --out " +
                         (work_dir() / "throughput_out").string());
  const double run_seconds = seconds_since(run_t0);
  std::printf("         end-to-end run: %.2f s\n", run_seconds);
  c.expect(rc == 0, "run exited with " + std::to_string(rc));
  c.expect(run_seconds < 10.0, "end-to-end run took >= 10 s");
}

// 9. Determinism: two consecutive runs produce byte-identical directories.
void criterion_determinism(Checker &c) {
  const std::string flags = "run --input www=" + nasa_slice_path().string() +
                            " --referrer-rule off --anonymize hash --quiet --out ";
  const fs::path out1 = work_dir() / "det1";
  const fs::path out2 = work_dir() / "det2";
  c.expect(run_cli(flags + out1.string()) == 0, "first run failed");
  c.expect(run_cli(flags + out2.string()) == 0, "second run failed");

  std::size_t files = 0;
  for (const auto &entry : fs::directory_iterator(out1)) {
    ++files;
    const auto other = out2 / entry.path().filename();
    if (!fs::exists(other)) {
      c.expect(false, "missing " + other.string());
      continue;
    }
    c.expect(slurp(entry.path()) == slurp(other),
             entry.path().filename().string() + " differs between runs");
  }
  c.expect(files == 8, "expected seven tables plus report.json");
}

struct Criterion {
  int id;
  const char *name;
  std::function<void(Checker &)> fn;
};

} // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "parser golden fields and round-trip identity", criterion_parser_golden},
      {2, "session reconstruction of the 14-row fixture", criterion_session_reconstruction},
      {3, "size reduction in [62, 92] percent with full report", criterion_reduction_band},
      {4, "sessionizer equals the literal rule on 1000 logs", criterion_sessionizer_oracle},
      {5, "cleaning conservation and monotone drop sets", criterion_cleaning_conservation},
      {6, "aggregation consistency checks", criterion_aggregation_consistency},
      {7, "anonymization leaves the partition unchanged", criterion_anonymization_invariance},
      {8, "throughput: 100k lines end-to-end and parse rate", criterion_throughput},
      {9, "byte-identical outputs across repeated runs", criterion_determinism},
  };

  int failures = 0;
  for (const auto &criterion : criteria) {
    Checker checker;
    try {
      criterion.fn(checker);
    } catch (const std::exception &e) {
      checker.problems.push_back(std::string("exception: ") + e.what());
    }
    if (checker.problems.empty()) {
      std::printf("[PASS] criterion %d: %s\n", criterion.id, criterion.name);
    } else {
      ++failures;
      std::printf("[FAIL] criterion %d: %s\n", criterion.id, criterion.name);
      for (const auto &problem : checker.problems)
        std::printf("       - %s\n", problem.c_str());
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
