#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <pthread.h>

#include "speech3d/adapters/mock.hpp"
#include "speech3d/adapters/stub_server.hpp"
#include "speech3d/errors.hpp"
#include "speech3d/gateway/config.hpp"
#include "speech3d/gateway/server.hpp"
#include "speech3d/geometry/measure.hpp"
#include "speech3d/geometry/obj.hpp"
#include "speech3d/geometry/simplify.hpp"

namespace speech3d::cli {

namespace {

using Clock = std::chrono::steady_clock;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("no such file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size())))
    throw PersistenceError("cannot write " + path);
}

std::string fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

double mb(std::size_t bytes) { return static_cast<double>(bytes) / 1e6; }

// Blocks SIGINT/SIGTERM for this thread and every thread it starts, so that
// wait() can pick them up synchronously.
class ShutdownSignals {
 public:
  ShutdownSignals() {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set_, &old_);
  }
  ~ShutdownSignals() { pthread_sigmask(SIG_SETMASK, &old_, nullptr); }
  int wait() {
    int sig = 0;
    sigwait(&set_, &sig);
    return sig;
  }

 private:
  sigset_t set_;
  sigset_t old_;
};

struct Common {
  std::string config_path;
  std::string data_dir;
  std::string backend_mode;

  gateway::GatewayConfig load() const {
    std::optional<std::filesystem::path> path;
    if (!config_path.empty()) path = config_path;
    gateway::Settings s = path ? gateway::read_settings(*path) : gateway::Settings{};
    gateway::apply_env(s, gateway::process_env());
    if (!data_dir.empty()) s["data_dir"] = data_dir;
    if (!backend_mode.empty()) s["backend_mode"] = backend_mode;
    return gateway::GatewayConfig::from_settings(s);
  }

  void add_to(CLI::App* app, bool with_mode = true) {
    app->add_option("-c,--config", config_path, "key = value config file");
    app->add_option("--data-dir", data_dir, "repository directory (overrides config)");
    if (with_mode)
      app->add_option("--backend-mode", backend_mode, "live or mock (overrides config)")
          ->check(CLI::IsMember({"live", "mock"}));
  }
};

// ---- serve -----------------------------------------------------------------

int cmd_serve(const Common& common, const std::string& listen, std::ostream& out) {
  auto cfg = common.load();
  if (!listen.empty()) {
    gateway::Settings s{{"listen_addr", listen}};
    auto parsed = gateway::GatewayConfig::from_settings(s);
    cfg.host = parsed.host;
    cfg.port = parsed.port;
  }
  cfg.validate(true);
  ShutdownSignals signals;
  auto app = gateway::make_app(cfg);
  gateway::Server server(app.pipeline, app.server);
  const int port = server.start(cfg.host, cfg.port);
  std::size_t live = 0;
  for (const auto& t : app.server.health) live += t.mode == adapters::BackendMode::live;
  out << "speech3d gateway listening on http://" << cfg.host << ":" << port << " (data_dir " << cfg.data_dir.string()
      << ", " << live << " live backends, " << app.store->size() << " stored assets)" << std::endl;
  signals.wait();
  server.stop();
  if (cfg.pipeline.persist_store) app.store->persist();
  out << "stopped" << std::endl;
  return kOk;
}

// ---- simplify --------------------------------------------------------------

struct SimplifyArgs {
  std::string in;
  std::string prompt;
  std::string out;
  std::size_t target = 1000;
  std::size_t passes = 5;
  std::size_t samples = 10000;
  bool report = false;
};

int cmd_simplify(const SimplifyArgs& a, std::ostream& out) {
  if (a.in.empty() == a.prompt.empty()) throw ConfigError("give exactly one of --in or --prompt");
  const geometry::TriMesh input =
      a.in.empty() ? adapters::procedural_model(a.prompt) : geometry::parse_obj(read_file(a.in));
  geometry::SimplifyConfig cfg;
  cfg.target_vertices = a.target;
  cfg.batch_passes = a.passes;
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  const auto t0 = Clock::now();
  auto [mesh, report] = geometry::simplify(input, cfg);
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  const std::string before = geometry::write_obj(input);
  const std::string after = geometry::write_obj(mesh);
  if (!a.out.empty()) write_file(a.out, after);
  const double error = a.samples > 0 ? geometry::geometric_error(input, mesh, std::max<std::size_t>(a.samples, 100)) : 0.0;
  if (a.report) {
    out << "input_vertices\tinput_faces\tinput_bytes\tinput_mesh_mb\toutput_vertices\toutput_faces\toutput_bytes\t"
           "output_mesh_mb\tsize_ratio\tgeometric_error\tseconds\n";
    out << input.vertex_count() << '\t' << input.face_count() << '\t' << before.size() << '\t' << fixed(mb(before.size()))
        << '\t' << mesh.vertex_count() << '\t' << mesh.face_count() << '\t' << after.size() << '\t'
        << fixed(mb(after.size())) << '\t' << fixed(static_cast<double>(after.size()) / static_cast<double>(before.size()))
        << '\t' << fixed(error) << '\t' << fixed(seconds, 3) << '\n';
  } else {
    out << input.vertex_count() << " -> " << mesh.vertex_count() << " vertices, " << fixed(mb(before.size()), 3) << " MB -> "
        << fixed(mb(after.size()), 3) << " MB, error " << fixed(error) << " of bbox diagonal, " << fixed(seconds, 3)
        << " s\n";
  }
  if (report.stopped_early) out << "# note: " << report.note << '\n';
  return kOk;
}

// ---- repo ------------------------------------------------------------------

struct RepoArgs {
  std::string obj;
  std::string label;
  std::string language = "en";
  std::string id;
  std::string out;
  std::string text;
  std::size_t k = 5;
};

struct Repo {
  gateway::GatewayConfig cfg;
  std::unique_ptr<vectorstore::VectorStore> store;
  adapters::Backends backends;
};

Repo open_repo(const Common& common) {
  Repo r;
  r.cfg = common.load();
  if (r.cfg.data_dir.empty()) throw ConfigError("data_dir is required (--data-dir or config)");
  r.cfg.validate(true);
  r.store = vectorstore::VectorStore::load(r.cfg.store);
  r.backends = adapters::make_backends(r.cfg.backends);
  return r;
}

std::string normalize_label(const std::string& s) {
  std::string out;
  bool space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

int cmd_repo_list(const Common& common, std::ostream& out) {
  auto r = open_repo(common);
  out << "id\tlabel\tlanguage\tsource\tcreated_at\tmesh_ref\n";
  for (const auto& rec : r.store->records())
    out << rec.id << '\t' << rec.label << '\t' << rec.language << '\t' << vectorstore::to_string(rec.source) << '\t'
        << rec.created_at << '\t' << rec.mesh_ref << '\n';
  return kOk;
}

int cmd_repo_import(const Common& common, const RepoArgs& a, std::ostream& out) {
  auto r = open_repo(common);
  const std::string label = normalize_label(a.label);
  if (label.empty()) throw ConfigError("--label must not be blank");
  const auto mesh = geometry::parse_obj(read_file(a.obj));
  vectorstore::AssetRecord rec;
  rec.id = r.store->allocate_id("asset");
  rec.label = label;
  rec.language = a.language;
  rec.embedding = r.backends.embedder->embed(label);
  rec.created_at = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  rec.source = vectorstore::AssetSource::imported;
  const std::string id = r.store->upsert_with_blob(std::move(rec), geometry::write_obj(mesh));
  r.store->persist();
  out << id << '\n';
  return kOk;
}

int cmd_repo_export(const Common& common, const RepoArgs& a, std::ostream& out) {
  auto r = open_repo(common);
  auto rec = r.store->get(a.id);
  if (!rec) throw NotFound("no asset with id " + a.id);
  const std::string bytes = r.store->read_blob(rec->mesh_ref);
  if (a.out.empty()) out << bytes;
  else write_file(a.out, bytes);
  return kOk;
}

int cmd_repo_search(const Common& common, const RepoArgs& a, std::ostream& out) {
  auto r = open_repo(common);
  const std::string text = normalize_label(a.text);
  if (text.empty()) throw ConfigError("--text must not be blank");
  auto query = r.backends.embedder->embed(text);
  out << "id\tlabel\tsimilarity\thit\n";
  for (const auto& h : r.store->search(query, a.k))
    out << h.record.id << '\t' << h.record.label << '\t' << fixed(h.similarity) << '\t'
        << (h.similarity >= r.store->config().hit_threshold ? "yes" : "no") << '\n';
  return kOk;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
  std::string script;
  long gen_delay_ms = -1;  // -1: keep the config value
  std::size_t concurrency = 1;
  std::string language = "en";
  bool records = false;
};

std::vector<std::string> read_script(const std::string& path) {
  std::vector<std::string> lines;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    lines.push_back(line.substr(b, e - b + 1));
  }
  return lines;
}

bool is_backend_failure(const Error& e) {
  const auto& c = e.code();
  return c == "backend_error" || c == "backend_timeout" || c == "unparseable_reply" || c == "generation_failed";
}

void table_row(std::ostream& out, const std::string& name, const pipeline::MetricsSummary& s, std::size_t gen_calls) {
  out << name << '\t' << s.tasks << '\t' << fixed(s.mean_completion_time, 3) << '\t' << fixed(s.success_rate, 1) << '\t'
      << fixed(s.error_rate, 3) << '\t' << fixed(s.mean_responsiveness, 3) << '\t' << fixed(s.mean_mesh_size_bytes / 1e6)
      << '\t' << fixed(s.mean_overhead, 4) << '\t' << gen_calls << '\n';
}

int cmd_bench(const Common& common, const BenchArgs& a, std::ostream& out, std::ostream& err) {
  auto cfg = common.load();
  if (a.gen_delay_ms >= 0) cfg.backends.mock_generator.delay = std::chrono::milliseconds(a.gen_delay_ms);
  if (a.concurrency == 0) throw ConfigError("--concurrency must be at least 1");
  cfg.pipeline.persist_store = false;
  cfg.validate(false);
  const auto script = read_script(a.script);
  auto app = gateway::make_app(cfg);
  auto& pipe = *app.pipeline;

  std::mutex err_mutex;
  std::atomic<std::size_t> backend_failures{0};
  auto worker = [&](std::size_t t) {
    std::string session;
    try {
      session = pipe.create_session(a.language).session_id;
    } catch (const std::exception& e) {
      std::lock_guard lock(err_mutex);
      err << "session: " << e.what() << '\n';
      if (auto* se = dynamic_cast<const Error*>(&e); se && is_backend_failure(*se)) ++backend_failures;
      return;
    }
    for (std::size_t i = t; i < script.size(); i += a.concurrency) {
      try {
        auto menu = pipe.submit_command(session, pipeline::CommandInput::from_text(script[i]));
        const std::string pick = !menu.repository.empty() ? "repository:0"
                                 : !menu.requested.empty() ? "requested:0"
                                                           : "recommended:0";
        pipe.select_offer(session, pick);
      } catch (const Error& e) {
        std::lock_guard lock(err_mutex);
        err << "command " << (i + 1) << " (" << script[i] << "): " << e.code() << ": " << e.what() << '\n';
        if (is_backend_failure(e)) ++backend_failures;
      }
    }
  };
  if (a.concurrency == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < a.concurrency; ++t) threads.emplace_back(worker, t);
    for (auto& th : threads) th.join();
  }

  const auto records = pipe.all_metrics();
  out << "task\ttasks\tcompletion_time_s\tsuccess_rate_pct\terror_rate\tresponsiveness_s\tmesh_size_mb\toverhead_s\t"
         "generate_calls\n";
  for (auto kind : {pipeline::TaskKind::generate, pipeline::TaskKind::retrieve}) {
    std::vector<pipeline::MetricsRecord> subset;
    std::copy_if(records.begin(), records.end(), std::back_inserter(subset),
                 [&](const auto& r) { return r.task_kind == kind; });
    if (subset.empty()) continue;
    const auto s = pipeline::summarize(subset);
    table_row(out, pipeline::to_string(kind), s, s.generation_calls);
  }
  if (!records.empty()) table_row(out, "all", pipeline::summarize(records), app.pipeline->backends().log->count(adapters::kGenerate));
  if (a.records) {
    out << "\nlabel\ttask\tasset_id\tcompletion_time_s\tsuccess\terrors\tuser_retries\tresponsiveness_s\tmesh_size_mb\toverhead_s\n";
    for (const auto& r : records)
      out << r.label << '\t' << pipeline::to_string(r.task_kind) << '\t' << r.asset_id << '\t'
          << fixed(r.completion_time, 3) << '\t' << (r.success ? 1 : 0) << '\t' << r.error_count << '\t' << r.user_retries
          << '\t' << fixed(r.responsiveness, 3) << '\t' << fixed(mb(r.mesh_file_size)) << '\t' << fixed(r.overhead(), 4)
          << '\n';
  }
  return backend_failures > 0 ? kBackend : kOk;
}

// ---- mock-backends ---------------------------------------------------------

int cmd_mock_backends(const std::string& listen, std::size_t dim, long delay_ms, std::ostream& out) {
  auto parsed = gateway::GatewayConfig::from_settings({{"listen_addr", listen}});
  adapters::MockGeneratorConfig gen;
  gen.delay = std::chrono::milliseconds(delay_ms);
  ShutdownSignals signals;
  adapters::BackendStubServer stub(dim, gen);
  const int port = stub.start(parsed.host, parsed.port);
  out << "mock backends listening on http://" << parsed.host << ":" << port << std::endl;
  signals.wait();
  stub.stop();
  return kOk;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (!err) return kFailure;
  const auto& c = err->code();
  if (c == "config_error") return kConfig;
  if (c == "not_found" || c == "unknown_asset" || c == "unknown_session") return kNotFound;
  if (is_backend_failure(*err)) return kBackend;
  return kFailure;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"speech3d: spoken commands to simplified 3D assets", "speech3d"};
  app.require_subcommand(1);

  Common common;

  auto* serve = app.add_subcommand("serve", "run the HTTP gateway");
  std::string listen;
  common.add_to(serve);
  serve->add_option("--listen", listen, "host:port (overrides config)");

  auto* simplify = app.add_subcommand("simplify", "simplify an OBJ mesh offline");
  SimplifyArgs sa;
  simplify->add_option("--in", sa.in, "input OBJ");
  simplify->add_option("--prompt", sa.prompt, "use the mock generator's mesh for this prompt instead of --in");
  simplify->add_option("--out", sa.out, "write the simplified OBJ here");
  simplify->add_option("--target", sa.target, "vertex target")->capture_default_str();
  simplify->add_option("--passes", sa.passes, "interpolation passes")->capture_default_str();
  simplify->add_option("--samples", sa.samples, "surface samples for the error estimate (0 skips it)")
      ->capture_default_str();
  simplify->add_flag("--report", sa.report, "print a TSV stats row");

  auto* repo = app.add_subcommand("repo", "administer the asset repository");
  repo->require_subcommand(1);
  common.add_to(repo);
  RepoArgs ra;
  auto* list = repo->add_subcommand("list", "list stored assets");
  auto* import = repo->add_subcommand("import", "store an OBJ under a label");
  import->add_option("--obj", ra.obj, "OBJ file")->required();
  import->add_option("--label", ra.label, "label, e.g. 'red apple'")->required();
  import->add_option("--language", ra.language, "language tag")->capture_default_str();
  auto* exp = repo->add_subcommand("export", "write a stored asset's OBJ");
  exp->add_option("--id", ra.id, "asset id")->required();
  exp->add_option("--out", ra.out, "output file (default stdout)");
  auto* search = repo->add_subcommand("search", "nearest stored assets for a text");
  search->add_option("--text", ra.text, "query text")->required();
  search->add_option("-k", ra.k, "hits to show")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "replay a command script in-process and print metrics");
  common.add_to(bench);
  BenchArgs ba;
  bench->add_option("--script", ba.script, "one command per line; '#' comments")->required();
  bench->add_option("--mock-gen-delay", ba.gen_delay_ms, "mock generation delay in ms");
  bench->add_option("--concurrency", ba.concurrency, "parallel sessions")->capture_default_str();
  bench->add_option("--language", ba.language, "session language")->capture_default_str();
  bench->add_flag("--records", ba.records, "also print one row per task");

  auto* mock = app.add_subcommand("mock-backends", "serve the mock backends over HTTP");
  std::string mock_listen = "127.0.0.1:9100";
  std::size_t dim = 384;
  long mock_delay = 0;
  mock->add_option("--listen", mock_listen, "host:port")->capture_default_str();
  mock->add_option("--dim", dim, "embedding dimension")->capture_default_str();
  mock->add_option("--gen-delay", mock_delay, "generation delay in ms")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kConfig;
  }

  try {
    if (*serve) return cmd_serve(common, listen, out);
    if (*simplify) return cmd_simplify(sa, out);
    if (*list) return cmd_repo_list(common, out);
    if (*import) return cmd_repo_import(common, ra, out);
    if (*exp) return cmd_repo_export(common, ra, out);
    if (*search) return cmd_repo_search(common, ra, out);
    if (*bench) return cmd_bench(common, ba, out, err);
    if (*mock) return cmd_mock_backends(mock_listen, dim, mock_delay, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kFailure;
}

}  // namespace speech3d::cli
