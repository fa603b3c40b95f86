#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "speech3d/adapters/mock.hpp"
#include "speech3d/errors.hpp"
#include "speech3d/geometry/obj.hpp"
#include "temp_dir.hpp"

using namespace speech3d;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

using Table = std::vector<std::vector<std::string>>;

Table tsv(const std::string& text) {
  Table rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, '\t')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string column(const Table& t, std::size_t row, const std::string& name) {
  for (std::size_t c = 0; c < t.at(0).size(); ++c)
    if (t[0][c] == name) return t.at(row).at(c);
  ADD_FAILURE() << "no column " << name;
  return {};
}

const std::vector<std::string>* row_named(const Table& t, const std::string& name) {
  for (const auto& r : t)
    if (!r.empty() && r[0] == name) return &r;
  return nullptr;
}

void write(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

const char* kCube =
    "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1\n"
    "f 1 3 2\nf 1 4 3\nf 5 6 7\nf 5 7 8\nf 1 2 6\nf 1 6 5\nf 2 3 7\nf 2 7 6\nf 3 4 8\nf 3 8 7\nf 4 1 5\nf 4 5 8\n";

}  // namespace

TEST(Cli, UsageErrorsAndHelp) {
  EXPECT_EQ(run({}).code, cli::kConfig);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kConfig);
  auto help = run({"--help"});
  EXPECT_EQ(help.code, cli::kOk);
  EXPECT_NE(help.out.find("bench"), std::string::npos);
}

TEST(Cli, ExitCodeMapping) {
  EXPECT_EQ(cli::exit_code_for(ConfigError("x")), cli::kConfig);
  EXPECT_EQ(cli::exit_code_for(NotFound("x")), cli::kNotFound);
  EXPECT_EQ(cli::exit_code_for(UnknownAsset("x")), cli::kNotFound);
  EXPECT_EQ(cli::exit_code_for(BackendTimeout("x")), cli::kBackend);
  EXPECT_EQ(cli::exit_code_for(BackendError("x", 500, "")), cli::kBackend);
  EXPECT_EQ(cli::exit_code_for(GenerationFailed("x")), cli::kBackend);
  EXPECT_EQ(cli::exit_code_for(ParseError(1, "x")), cli::kFailure);
  EXPECT_EQ(cli::exit_code_for(std::runtime_error("x")), cli::kFailure);
}

TEST(Cli, ServeRejectsBadConfig) {
  auto missing = run({"serve"});
  EXPECT_EQ(missing.code, cli::kConfig);
  EXPECT_NE(missing.err.find("data_dir"), std::string::npos);

  speech3d::testing::TempDir dir;
  write(dir.path() / "bad.conf", "listen_addr = 127.0.0.1:0\nnot_a_key = 1\n");
  EXPECT_EQ(run({"serve", "--config", (dir.path() / "bad.conf").string(), "--data-dir", dir.path().string()}).code,
            cli::kConfig);
  EXPECT_EQ(run({"serve", "--config", (dir.path() / "absent.conf").string()}).code, cli::kConfig);
  EXPECT_EQ(run({"serve", "--data-dir", dir.path().string(), "--backend-mode", "live"}).code, cli::kConfig);
}

TEST(Cli, SimplifyMockMeshReport) {
  auto r = run({"simplify", "--prompt", "red apple", "--report", "--samples", "2000"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto t = tsv(r.out);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_GE(std::stoul(column(t, 1, "input_vertices")), 13000u);
  EXPECT_LE(std::stoul(column(t, 1, "output_vertices")), 1000u);
  EXPECT_LE(std::stod(column(t, 1, "size_ratio")), 0.10);
  const double in_mb = std::stod(column(t, 1, "input_mesh_mb"));
  const double in_bytes = std::stod(column(t, 1, "input_bytes"));
  EXPECT_NEAR(in_mb, in_bytes / 1e6, 1e-6);
  EXPECT_LE(std::stod(column(t, 1, "geometric_error")), 0.02);
}

TEST(Cli, SimplifyFileAndTargets) {
  speech3d::testing::TempDir dir;
  const auto in = dir.path() / "cube.obj";
  const auto out = dir.path() / "out.obj";
  write(in, kCube);
  auto r = run({"simplify", "--in", in.string(), "--out", out.string(), "--target", "1000", "--report"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto t = tsv(r.out);
  EXPECT_EQ(column(t, 1, "output_vertices"), "8");
  EXPECT_EQ(column(t, 1, "output_faces"), "12");
  std::ifstream f(out, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), geometry::write_obj(geometry::parse_obj(kCube)));

  EXPECT_EQ(run({"simplify", "--in", (dir.path() / "none.obj").string()}).code, cli::kNotFound);
  EXPECT_EQ(run({"simplify"}).code, cli::kConfig);
  EXPECT_EQ(run({"simplify", "--prompt", "cup", "--target", "2"}).code, cli::kConfig);
  write(dir.path() / "bad.obj", "v 0 0\nf 1 2 3\n");
  EXPECT_EQ(run({"simplify", "--in", (dir.path() / "bad.obj").string()}).code, cli::kFailure);
}

TEST(Cli, SimplifyIsDeterministic) {
  auto a = tsv(run({"simplify", "--prompt", "tall vase", "--report", "--samples", "500"}).out);
  auto b = tsv(run({"simplify", "--prompt", "tall vase", "--report", "--samples", "500"}).out);
  a[1].pop_back();  // seconds
  b[1].pop_back();
  EXPECT_EQ(a, b);
}

TEST(Cli, RepoImportListSearchExport) {
  speech3d::testing::TempDir dir;
  const auto data = (dir.path() / "repo").string();
  const auto obj = dir.path() / "pear.obj";
  write(obj, geometry::write_obj(adapters::procedural_model("pear")));

  EXPECT_EQ(run({"repo", "list"}).code, cli::kConfig);
  auto imported = run({"repo", "--data-dir", data, "import", "--obj", obj.string(), "--label", "  Pear "});
  ASSERT_EQ(imported.code, 0) << imported.err;
  const std::string id = imported.out.substr(0, imported.out.find('\n'));

  auto list = tsv(run({"repo", "--data-dir", data, "list"}).out);
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(column(list, 1, "id"), id);
  EXPECT_EQ(column(list, 1, "label"), "pear");
  EXPECT_EQ(column(list, 1, "source"), "imported");

  auto hits = tsv(run({"repo", "--data-dir", data, "search", "--text", "pear"}).out);
  ASSERT_GE(hits.size(), 2u);
  EXPECT_EQ(column(hits, 1, "id"), id);
  EXPECT_EQ(column(hits, 1, "similarity"), "1.000000");

  auto exported = run({"repo", "--data-dir", data, "export", "--id", id});
  ASSERT_EQ(exported.code, 0);
  std::ifstream f(obj, std::ios::binary);
  std::stringstream original;
  original << f.rdbuf();
  EXPECT_EQ(exported.out, original.str());

  EXPECT_EQ(run({"repo", "--data-dir", data, "export", "--id", "asset-999999"}).code, cli::kNotFound);
  EXPECT_EQ(run({"repo", "--data-dir", data, "import", "--obj", (dir.path() / "x.obj").string(), "--label", "x"}).code,
            cli::kNotFound);
}

TEST(Cli, BenchOverheadAndReconciliation) {
  speech3d::testing::TempDir dir;
  const auto script = dir.path() / "script.txt";
  write(script,
        "# ten commands\n"
        "Matrix, create a banana\nMatrix, create a red apple\nMatrix, create a pear\nMatrix, create grapes\n"
        "Matrix, create a white plate\nMatrix, create a banana\nMatrix, create a red apple\n"
        "Matrix, create a pear\nMatrix, create grapes\nMatrix, create a white plate\n");
  auto r = run({"bench", "--script", script.string(), "--mock-gen-delay", "0", "--records"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto t = tsv(r.out);
  const auto* all = row_named(t, "all");
  const auto* gen = row_named(t, "generate");
  const auto* ret = row_named(t, "retrieve");
  ASSERT_TRUE(all && gen && ret);
  EXPECT_EQ(column(t, all - t.data(), "tasks"), "10");
  EXPECT_EQ(column(t, gen - t.data(), "tasks"), "5");
  EXPECT_EQ(column(t, ret - t.data(), "tasks"), "5");
  EXPECT_EQ(column(t, all - t.data(), "generate_calls"), "5");
  EXPECT_EQ(column(t, ret - t.data(), "generate_calls"), "0");
  EXPECT_LT(std::stod(column(t, all - t.data(), "overhead_s")), 0.1);
  EXPECT_EQ(column(t, all - t.data(), "success_rate_pct"), "100.0");

  // Per-task rows follow the summary after a blank line.
  const auto records = tsv(r.out.substr(r.out.find("\n\n") + 2));
  ASSERT_EQ(records.size(), 11u);
  double completion = 0;
  for (std::size_t i = 1; i < records.size(); ++i) completion += std::stod(column(records, i, "completion_time_s"));
  EXPECT_NEAR(completion / 10, std::stod(column(t, all - t.data(), "completion_time_s")), 0.002);
}

TEST(Cli, BenchRepositoryOnlyScriptUsesNoGeneration) {
  speech3d::testing::TempDir dir;
  const auto data = (dir.path() / "repo").string();
  for (std::string label : {"pear", "red apple"}) {
    const auto obj = dir.path() / (label + ".obj");
    write(obj, geometry::write_obj(adapters::procedural_model(label)));
    ASSERT_EQ(run({"repo", "--data-dir", data, "import", "--obj", obj.string(), "--label", label}).code, 0);
  }
  const auto script = dir.path() / "hits.txt";
  write(script, "create a pear\ncreate a red apple\ncreate a pear\n");
  auto r = run({"bench", "--data-dir", data, "--script", script.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto t = tsv(r.out);
  const auto* all = row_named(t, "all");
  ASSERT_TRUE(all);
  EXPECT_EQ(column(t, all - t.data(), "generate_calls"), "0");
  EXPECT_EQ(row_named(t, "generate"), nullptr);
  // bench never writes to the repository
  EXPECT_EQ(tsv(run({"repo", "--data-dir", data, "list"}).out).size(), 3u);
}

TEST(Cli, BenchEmptyScript) {
  speech3d::testing::TempDir dir;
  write(dir.path() / "empty.txt", "\n# nothing\n");
  auto r = run({"bench", "--script", (dir.path() / "empty.txt").string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(tsv(r.out).size(), 1u);
  EXPECT_EQ(run({"bench", "--script", (dir.path() / "missing.txt").string()}).code, cli::kNotFound);
}

TEST(Cli, BenchConcurrentSessionsAndDeterminism) {
  speech3d::testing::TempDir dir;
  write(dir.path() / "s.txt", "create a cup\ncreate a lamp\ncreate a book\ncreate a clock\ncreate a vase\ncreate a hat\n");
  auto r = run({"bench", "--script", (dir.path() / "s.txt").string(), "--concurrency", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto t = tsv(r.out);
  EXPECT_EQ(column(t, row_named(t, "all") - t.data(), "tasks"), "6");

  auto labels = [&] {
    auto out = run({"bench", "--script", (dir.path() / "s.txt").string(), "--records"}).out;
    auto rec = tsv(out.substr(out.find("\n\n") + 2));
    std::vector<std::string> v;
    for (std::size_t i = 1; i < rec.size(); ++i)
      v.push_back(column(rec, i, "label") + "|" + column(rec, i, "asset_id") + "|" + column(rec, i, "mesh_size_mb"));
    return v;
  };
  EXPECT_EQ(labels(), labels());
}

TEST(Cli, BenchBackendFailureExitCode) {
  speech3d::testing::TempDir dir;
  write(dir.path() / "s.txt", "create a cup\n");
  write(dir.path() / "c.conf", "backend_generate_url = http://127.0.0.1:1\nbackend_generate_retries = 0\n"
                               "backend_generate_timeout_ms = 200\n");
  auto r = run({"bench", "--config", (dir.path() / "c.conf").string(), "--script", (dir.path() / "s.txt").string()});
  EXPECT_EQ(r.code, cli::kBackend) << r.out << r.err;
  auto t = tsv(r.out);
  EXPECT_EQ(column(t, row_named(t, "all") - t.data(), "success_rate_pct"), "0.0");
}
