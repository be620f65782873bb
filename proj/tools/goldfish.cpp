// goldfish: command-line front end for ingest, question answering,
// retrieval inspection, benchmarks and the HTTP service.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "goldfish/benchmark.hpp"
#include "goldfish/config.hpp"
#include "goldfish/engine.hpp"
#include "goldfish/error.hpp"
#include "goldfish/http_service.hpp"

namespace {

using goldfish::Error;
using goldfish::ErrorCode;
using json = nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 1, kInput = 2, kBackend = 3, kInternal = 4 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BackendUnavailable:
    case ErrorCode::BackendRejected:
    case ErrorCode::EmptyResponse:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::EncoderMismatch:
      return kBackend;
    case ErrorCode::CorruptIndex:
    case ErrorCode::VersionUnsupported:
    case ErrorCode::IoError:
      return kInternal;
    default:
      return kInput;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path + ": " + e.what());
  }
}

void write_output(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << j.dump(2) << "\n";
}

struct GlobalOptions {
  std::string config_file;
  std::string index_dir;
  std::string descriptor_url, embedding_url, answer_url, judge_url;
  std::size_t k = 0;
  std::string fusion;
  std::string answer_strategy;
  std::size_t parallelism = 0;
};

goldfish::EngineConfig resolve_config(const GlobalOptions& g) {
  std::optional<std::filesystem::path> file;
  if (!g.config_file.empty()) file = g.config_file;
  auto config = goldfish::load_config(file, goldfish::process_env());
  if (!g.index_dir.empty()) config.index_dir = g.index_dir;
  if (!g.descriptor_url.empty()) config.descriptor.url = g.descriptor_url;
  if (!g.embedding_url.empty()) config.embedding.url = g.embedding_url;
  if (!g.answer_url.empty()) config.answer.url = g.answer_url;
  if (!g.judge_url.empty()) config.judge.url = g.judge_url;
  if (g.k > 0) config.k = g.k;
  if (!g.fusion.empty()) config.fusion = goldfish::fusion_strategy_from(g.fusion);
  if (!g.answer_strategy.empty()) config.answer_strategy = goldfish::answer_strategy_from(g.answer_strategy);
  if (g.parallelism > 0) config.parallelism = g.parallelism;
  config.validate();
  return config;
}

goldfish::HttpService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-video question answering over clip descriptions"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("-c,--config", g.config_file, "Config file (default: $GOLDFISH_CONFIG)");
  app.add_option("--index-dir", g.index_dir, "Directory for ingested videos");
  app.add_option("--descriptor-url", g.descriptor_url, "Descriptor endpoint (mock:// for offline)");
  app.add_option("--embedding-url", g.embedding_url, "Embedding endpoint");
  app.add_option("--answer-url", g.answer_url, "Answer model endpoint");
  app.add_option("--judge-url", g.judge_url, "Judge model endpoint");
  app.add_option("--k", g.k, "Clips retrieved per question")->check(CLI::PositiveNumber);
  app.add_option("--fusion", g.fusion, "Retrieval keys: subtitles|summary|and|or");
  app.add_option("--answer-strategy", g.answer_strategy, "A|B|C");
  app.add_option("--parallelism", g.parallelism, "Concurrent backend calls")->check(CLI::PositiveNumber);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Segment, describe and index a video");
  std::string manifest_path, subtitles_path, subtitle_format;
  bool force = false;
  ingest->add_option("manifest", manifest_path, "Video manifest JSON {id, uri, fps, frame_count, ...}")
      ->required()
      ->check(CLI::ExistingFile);
  ingest->add_option("-s,--subtitles", subtitles_path, "SRT or VTT file")->check(CLI::ExistingFile);
  ingest->add_option("--subtitle-format", subtitle_format, "srt|vtt (default: from extension)");
  ingest->add_flag("--force", force, "Replace an existing video with the same id");

  // ask
  auto* ask = app.add_subcommand("ask", "Answer a question about an ingested video");
  std::string video_id, question, strategy;
  std::size_t ask_k = 0;
  ask->add_option("video_id", video_id)->required();
  ask->add_option("question", question)->required();
  ask->add_option("-k", ask_k, "Override k")->check(CLI::PositiveNumber);
  ask->add_option("--strategy", strategy, "Override fusion strategy");

  // retrieve
  auto* retrieve = app.add_subcommand("retrieve", "Show retrieval scores for a question");
  retrieve->add_option("video_id", video_id)->required();
  retrieve->add_option("question", question)->required();
  retrieve->add_option("-k", ask_k, "Override k")->check(CLI::PositiveNumber);
  retrieve->add_option("--strategy", strategy, "Override fusion strategy");

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmark tooling");
  bench->require_subcommand(1);
  std::string items_path, episodes_path, out_path, bench_path, tvqa_path, items_out, episodes_out;
  int window = 0;
  std::optional<int> run_window;
  double tvqa_fps = 3.0;
  std::int64_t tvqa_clip_ms = 90'000;

  auto* bench_build = bench->add_subcommand("build", "Build an episode or window benchmark");
  bench_build->add_option("--items", items_path, "Clip-level items (JSONL)")->required()->check(CLI::ExistingFile);
  bench_build->add_option("--episodes", episodes_path, "Episode manifest JSON")->required()->check(CLI::ExistingFile);
  bench_build->add_option("--window", window, "0 = whole episode, N = N-clip window")->check(CLI::NonNegativeNumber);
  bench_build->add_option("-o,--out", out_path, "Output file (default: stdout)");

  auto* bench_run = bench->add_subcommand("run", "Run a built benchmark");
  bench_run->add_option("benchmark", bench_path, "Benchmark JSON")->required()->check(CLI::ExistingFile);
  bench_run->add_option("--window", run_window, "Rebuild as this variant before running");
  bench_run->add_option("-k", ask_k, "Override k")->check(CLI::PositiveNumber);
  bench_run->add_option("-o,--out", out_path, "Report file (default: stdout)");

  auto* bench_tvqa = bench->add_subcommand("convert-tvqa", "Convert TVQA JSONL to items + episode skeleton");
  bench_tvqa->add_option("input", tvqa_path, "TVQA JSONL")->required()->check(CLI::ExistingFile);
  bench_tvqa->add_option("--fps", tvqa_fps, "Frame rate of the extracted frames");
  bench_tvqa->add_option("--clip-ms", tvqa_clip_ms, "Default clip duration");
  bench_tvqa->add_option("--items-out", items_out, "Items JSONL")->required();
  bench_tvqa->add_option("--episodes-out", episodes_out, "Episode manifest JSON")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(1, 65535));

  auto* show_config = app.add_subcommand("config", "Print the effective configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench_build) {
      const auto items = goldfish::parse_clip_items_jsonl(read_file(items_path));
      const auto manifest = goldfish::episode_manifest_from_json(
          read_json(episodes_path), std::filesystem::path(episodes_path).parent_path());
      write_output(out_path, goldfish::to_json(goldfish::build_benchmark(items, manifest, window)));
      return kOk;
    }
    if (*bench_tvqa) {
      const auto conv = goldfish::convert_tvqa(read_file(tvqa_path), tvqa_fps, tvqa_clip_ms);
      std::ofstream items(items_out, std::ios::trunc);
      if (!items) throw Error(ErrorCode::IoError, "cannot write " + items_out);
      for (const auto& it : conv.items) {
        items << json{{"item_id", it.item_id},
                      {"episode_id", it.episode_id},
                      {"clip_id", it.clip_id},
                      {"question", it.question},
                      {"answer", it.answer_text}}
                     .dump()
              << "\n";
      }
      write_output(episodes_out, goldfish::to_json(conv.manifest));
      std::cerr << "converted " << conv.items.size() << " items, " << conv.manifest.episodes.size() << " episodes\n";
      return kOk;
    }

    const auto config = resolve_config(g);
    if (*show_config) {
      write_output("", goldfish::to_json(config));
      return kOk;
    }

    goldfish::Engine engine(config);

    if (*ingest) {
      goldfish::IngestRequest request;
      const auto manifest = read_json(manifest_path);
      request.source = goldfish::video_source_from_json(manifest);
      if (subtitles_path.empty() && manifest.contains("subtitles_path")) {
        subtitles_path = (std::filesystem::path(manifest_path).parent_path() /
                          manifest["subtitles_path"].get<std::string>()).string();
      }
      if (!subtitles_path.empty()) {
        request.subtitles = read_file(subtitles_path);
        request.subtitle_format = goldfish::subtitle_format_from(subtitles_path);
      }
      if (!subtitle_format.empty()) request.subtitle_format = goldfish::subtitle_format_from(subtitle_format);
      request.force = force;
      const auto started = engine.ingest_video(std::move(request));
      const auto job = engine.wait(started.job_id);
      write_output("", goldfish::to_json(job));
      if (job.state != goldfish::JobState::Ready) {
        const auto& msg = job.error.value_or("");
        return msg.find("BackendUnavailable") != std::string::npos || msg.find("BackendRejected") != std::string::npos
                   ? kBackend
                   : kInput;
      }
      return kOk;
    }
    if (*ask) {
      goldfish::AskOverrides overrides;
      if (ask_k > 0) overrides.k = ask_k;
      if (!strategy.empty()) overrides.strategy = goldfish::fusion_strategy_from(strategy);
      write_output("", goldfish::to_json(engine.ask(video_id, question, overrides)));
      return kOk;
    }
    if (*retrieve) {
      std::optional<goldfish::FusionStrategy> s;
      if (!strategy.empty()) s = goldfish::fusion_strategy_from(strategy);
      std::optional<std::size_t> k;
      if (ask_k > 0) k = ask_k;
      write_output("", goldfish::to_json(engine.retrieve_debug(video_id, question, s, k)));
      return kOk;
    }
    if (*bench_run) {
      goldfish::BenchmarkOptions options;
      options.window = run_window;
      if (ask_k > 0) options.k = ask_k;
      const auto report = engine.run_benchmark(goldfish::benchmark_from_json(read_json(bench_path)), options);
      write_output(out_path, goldfish::to_json(report));
      std::cerr << "accuracy " << report.accuracy << "  mean_score " << report.mean_score << "  retrieval_accuracy "
                << report.retrieval_accuracy << "  backend_errors " << report.backend_errors << "\n";
      return report.backend_errors > 0 ? kBackend : kOk;
    }
    if (*serve) {
      goldfish::HttpService service(engine);
      if (!service.bind(host, port)) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << host << ":" << port << "\n";
      service.listen_after_bind();
      g_service = nullptr;
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
