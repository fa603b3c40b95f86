#include <gtest/gtest.h>

#include <httplib.h>

#include <set>
#include <sstream>
#include <thread>

#include "speech3d/adapters/mock.hpp"
#include "speech3d/adapters/stub_server.hpp"
#include "speech3d/adapters/wav.hpp"
#include "speech3d/errors.hpp"
#include "speech3d/gateway/api_error.hpp"
#include "speech3d/gateway/config.hpp"
#include "speech3d/gateway/server.hpp"
#include "speech3d/geometry/obj.hpp"
#include "speech3d/pipeline/status.hpp"

using namespace speech3d;
using namespace speech3d::gateway;
using nlohmann::json;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

struct Live {
  explicit Live(GatewayConfig cfg = {}) {
    app = make_app(cfg);
    server = std::make_unique<Server>(app.pipeline, app.server);
    server->start();
    client = std::make_unique<httplib::Client>(server->base_url());
    client->set_read_timeout(std::chrono::seconds(30));
  }

  json post(const std::string& path, const json& body, int expect) {
    auto r = client->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r) << path;
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body, nullptr, false);
  }

  json get(const std::string& path, int expect = 200) {
    auto r = client->Get(path);
    EXPECT_TRUE(r) << path;
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body, nullptr, false);
  }

  std::string session(const std::string& lang = "en") {
    return post("/v1/sessions", {{"language", lang}}, 201).at("session_id");
  }

  std::vector<json> events(const std::string& id) {
    auto r = client->Get("/v1/sessions/" + id + "/events?follow=0");
    std::vector<json> out;
    if (!r) return out;
    std::istringstream in(r->body);
    std::string line;
    while (std::getline(in, line)) out.push_back(json::parse(line));
    return out;
  }

  App app;
  std::unique_ptr<Server> server;
  std::unique_ptr<httplib::Client> client;
};

std::vector<pipeline::StatusState> statuses(const std::vector<json>& events) {
  std::vector<pipeline::StatusState> out;
  for (const auto& e : events)
    if (e.at("type") == "status") out.push_back(*pipeline::status_from_string(e.at("data").at("status")));
  return out;
}

}  // namespace

// ---- config ----------------------------------------------------------------

TEST(Config, ParsesKeyValueLines) {
  auto s = parse_settings("# comment\n\nlisten_addr = 0.0.0.0:9000\n data_dir=/tmp/x \nhit_threshold = 0.9\n");
  EXPECT_EQ(s.size(), 3u);
  auto cfg = GatewayConfig::from_settings(s);
  EXPECT_EQ(cfg.host, "0.0.0.0");
  EXPECT_EQ(cfg.port, 9000);
  EXPECT_EQ(cfg.data_dir, "/tmp/x");
  EXPECT_EQ(cfg.store.data_dir, "/tmp/x");
  EXPECT_DOUBLE_EQ(cfg.store.hit_threshold, 0.9);
  EXPECT_THROW(parse_settings("no equals sign"), ConfigError);
  EXPECT_THROW(parse_settings(" = 3"), ConfigError);
}

TEST(Config, EnvOverridesFile) {
  Settings s = parse_settings("simplify_target = 800\nbackend_mode = mock\n");
  apply_env(s, env_of({{"MATRIX_SIMPLIFY_TARGET", "500"}, {"MATRIX_MOCK_GEN_DELAY_MS", "45000"}, {"OTHER", "x"}}));
  auto cfg = GatewayConfig::from_settings(s);
  EXPECT_EQ(cfg.pipeline.simplify.target_vertices, 500u);
  EXPECT_EQ(cfg.backends.mock_generator.delay, std::chrono::milliseconds(45000));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(GatewayConfig::from_settings({{"listen", "x"}}), ConfigError);
  EXPECT_THROW(GatewayConfig::from_settings({{"simplify_target", "lots"}}), ConfigError);
  EXPECT_THROW(GatewayConfig::from_settings({{"backend_mode", "remote"}}), ConfigError);
  EXPECT_THROW(GatewayConfig::from_settings({{"persist_store", "maybe"}}), ConfigError);
  EXPECT_THROW(GatewayConfig::from_settings({{"listen_addr", "8080"}}), ConfigError);
}

TEST(Config, ValidationNeedsDataDirForServing) {
  GatewayConfig cfg;
  EXPECT_NO_THROW(cfg.validate(false));
  EXPECT_THROW(cfg.validate(true), ConfigError);
  cfg.data_dir = "/tmp/somewhere";
  EXPECT_NO_THROW(cfg.validate(true));
  auto bad = GatewayConfig::from_settings({{"backend_retries", "7"}});
  EXPECT_THROW(bad.validate(false), ConfigError);
  auto live = GatewayConfig::from_settings({{"backend_mode", "live"}});
  EXPECT_THROW(live.validate(false), ConfigError);  // no URL
}

TEST(Config, PerBackendUrlMeansLive) {
  auto cfg = GatewayConfig::from_settings({{"backend_generate_url", "http://gpu:9000"}, {"backend_retries", "2"}});
  ASSERT_EQ(cfg.backends.endpoints.count("generate"), 1u);
  const auto& ep = cfg.backends.endpoints.at("generate");
  EXPECT_EQ(ep.mode, adapters::BackendMode::live);
  EXPECT_EQ(ep.base_url, "http://gpu:9000");
  EXPECT_EQ(ep.retries, 2);
  EXPECT_EQ(cfg.backends.fallback.mode, adapters::BackendMode::mock);
  auto targets = health_targets(cfg.backends);
  ASSERT_EQ(targets.size(), 6u);
  int live = 0;
  for (const auto& t : targets) live += t.mode == adapters::BackendMode::live;
  EXPECT_EQ(live, 1);
}

// ---- error mapping ---------------------------------------------------------

TEST(ApiErrors, EachCodeHasOneStatus) {
  std::set<std::string> seen;
  for (const auto& [code, status] : error_table()) {
    EXPECT_TRUE(seen.insert(code).second) << code;
    EXPECT_GE(status, 400);
    EXPECT_LT(status, 600);
  }
  EXPECT_EQ(http_status_for("audio_too_long"), 413);
  EXPECT_EQ(http_status_for("no_objects"), 422);
  EXPECT_EQ(http_status_for("unknown_session"), 404);
  EXPECT_EQ(http_status_for("invalid_choice"), 409);
  EXPECT_EQ(http_status_for("backend_timeout"), 504);
  EXPECT_EQ(to_api_error(AudioTooLong(16.0)).http_status, 413);
  EXPECT_EQ(to_api_error(std::runtime_error("x")).code, "internal");
}

TEST(ApiErrors, EveryLibraryErrorCodeIsMapped) {
  const std::vector<std::exception_ptr> errors = {
      std::make_exception_ptr(ParseError(1, "x")),        std::make_exception_ptr(IndexError(1, "x")),
      std::make_exception_ptr(EmptyMeshError("x")),        std::make_exception_ptr(InvalidMeshError("x")),
      std::make_exception_ptr(InvalidArgument("x")),       std::make_exception_ptr(DimensionMismatch(1, 2)),
      std::make_exception_ptr(PersistenceError("x")),      std::make_exception_ptr(CorruptIndex(1, "x")),
      std::make_exception_ptr(NotFound("x")),              std::make_exception_ptr(BackendTimeout("x")),
      std::make_exception_ptr(BackendError("x", 500, "")), std::make_exception_ptr(UnparseableReply("x")),
      std::make_exception_ptr(UnknownFixture("x")),        std::make_exception_ptr(BadAudio("x")),
      std::make_exception_ptr(UnsupportedLanguage("x")),   std::make_exception_ptr(AudioTooLong(16)),
      std::make_exception_ptr(NoObjectsFound()),           std::make_exception_ptr(IllegalTransition("x")),
      std::make_exception_ptr(InvalidState("x")),          std::make_exception_ptr(InvalidChoice("x")),
      std::make_exception_ptr(GenerationFailed("x")),      std::make_exception_ptr(UnknownSession("x")),
      std::make_exception_ptr(UnknownAsset("x")),          std::make_exception_ptr(NonPositiveScale()),
      std::make_exception_ptr(ConfigError("x"))};
  for (const auto& ep : errors) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      bool listed = false;
      for (const auto& [code, status] : error_table()) listed |= code == e.code();
      EXPECT_TRUE(listed) << e.code();
    }
  }
}

// ---- transform parsing -----------------------------------------------------

TEST(TransformOps, ParsesAllKinds) {
  auto move = parse_transform_op({{"op", {{"type", "move"}, {"delta", {1, 2, 3}}}}});
  EXPECT_DOUBLE_EQ(std::get<pipeline::MoveOp>(move).delta.y, 2.0);
  auto uniform = parse_transform_op({{"op", {{"type", "scale"}, {"factor", 2}}}});
  EXPECT_DOUBLE_EQ(std::get<pipeline::ScaleOp>(uniform).factors.z, 2.0);
  auto axes = parse_transform_op({{"op", {{"type", "scale"}, {"factors", {1, 2, 3}}}}});
  EXPECT_DOUBLE_EQ(std::get<pipeline::ScaleOp>(axes).factors.x, 1.0);
  auto rot = parse_transform_op({{"op", {{"type", "rotate"}, {"axis", {0, 0, 1}}, {"angle_deg", 180}}}});
  EXPECT_NEAR(std::get<pipeline::RotateOp>(rot).angle_radians, 3.14159265358979, 1e-12);
  EXPECT_THROW(parse_transform_op(json::object()), InvalidArgument);
  EXPECT_THROW(parse_transform_op({{"op", {{"type", "spin"}}}}), InvalidArgument);
  EXPECT_THROW(parse_transform_op({{"op", {{"type", "move"}, {"delta", {1, 2}}}}}), InvalidArgument);
}

// ---- routes ----------------------------------------------------------------

TEST(Gateway, CreateSessionPublishesWelcome) {
  Live g;
  auto body = g.post("/v1/sessions", {{"language", "en"}}, 201);
  const std::string id = body.at("session_id");
  EXPECT_FALSE(body.at("welcome_audio_ref").get<std::string>().empty());
  auto events = g.events(id);
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events[0].at("type"), "status");
  EXPECT_EQ(events[0].at("data").at("status"), "Welcome");
  auto clip = g.client->Get(body.at("welcome_audio_url").get<std::string>());
  ASSERT_TRUE(clip);
  EXPECT_EQ(clip->status, 200);
  EXPECT_EQ(clip->body.substr(0, 4), "RIFF");
}

TEST(Gateway, CreateSessionErrors) {
  Live g;
  EXPECT_EQ(g.post("/v1/sessions", {{"language", "xx"}}, 400).at("code"), "unsupported_language");
  EXPECT_EQ(g.post("/v1/sessions", {{"lang", "en"}}, 400).at("code"), "bad_request");
  auto r = g.client->Post("/v1/sessions", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
}

TEST(Gateway, Languages) {
  Live g;
  auto body = g.get("/v1/languages");
  EXPECT_GE(body.at("entries").size(), 37u);
  EXPECT_EQ(body.at("count"), body.at("entries").size());
}

TEST(Gateway, UnknownRoutesAndSessions) {
  Live g;
  EXPECT_EQ(g.get("/v1/nothing", 404).at("code"), "not_found");
  EXPECT_EQ(g.get("/v1/sessions/s-999999", 404).at("code"), "unknown_session");
  EXPECT_EQ(g.post("/v1/sessions/s-999999/command", {{"text", "create a pear"}}, 404).at("code"), "unknown_session");
  EXPECT_EQ(g.get("/v1/assets/asset-999999.obj", 404).at("code"), "unknown_asset");
  EXPECT_EQ(g.get("/v1/audio/tts-0000.wav", 404).at("code"), "not_found");
}

TEST(Gateway, TextCommandReturnsMenu) {
  Live g;
  auto id = g.session();
  auto body = g.post("/v1/sessions/" + id + "/command", {{"text", "Matrix, create a red apple"}}, 200);
  const auto& offers = body.at("offers");
  ASSERT_EQ(offers.at("requested").size(), 1u);
  EXPECT_EQ(offers.at("requested")[0].at("label"), "red apple");
  EXPECT_EQ(offers.at("requested")[0].at("offer_ref"), "requested:0");
  EXPECT_EQ(offers.at("recommended").size(), 3u);
  EXPECT_EQ(g.get("/v1/sessions/" + id).at("status"), "Offers");
}

TEST(Gateway, SixteenSecondClipIs413) {
  Live g;
  auto id = g.session();
  const auto before = g.app.pipeline->backends().log->total();
  const std::string wav = adapters::encode_wav(adapters::sine_clip(16.0));
  httplib::MultipartFormDataItems items = {{"audio", wav, "clip.wav", "audio/wav"}};
  auto r = g.client->Post("/v1/sessions/" + id + "/command", items);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 413);
  EXPECT_EQ(json::parse(r->body).at("code"), "audio_too_long");
  auto raw = g.client->Post("/v1/sessions/" + id + "/command", wav, "audio/wav");
  ASSERT_TRUE(raw);
  EXPECT_EQ(raw->status, 413);
  EXPECT_EQ(g.app.pipeline->backends().log->total(), before);
}

TEST(Gateway, OversizedUploadIs413) {
  Live g;
  auto id = g.session();
  std::string big(1200 * 1024, 'x');
  auto r = g.client->Post("/v1/sessions/" + id + "/command", big, "audio/wav");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 413);
  EXPECT_EQ(json::parse(r->body).at("code"), "payload_too_large");
}

TEST(Gateway, SpokenCommandMultipart) {
  Live g;
  auto id = g.session("es");
  httplib::MultipartFormDataItems items = {{"audio", adapters::fixture_wav("manzana-es"), "c.wav", "audio/wav"}};
  auto r = g.client->Post("/v1/sessions/" + id + "/command", items);
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  EXPECT_EQ(json::parse(r->body).at("offers").at("requested")[0].at("label"), "red apple");
}

TEST(Gateway, NoObjectsIs422WithNotice) {
  Live g;
  auto id = g.session();
  auto body = g.post("/v1/sessions/" + id + "/command", {{"text", "hello there"}}, 422);
  EXPECT_EQ(body.at("code"), "no_objects");
  const std::string url = body.at("notice_audio_url");
  ASSERT_FALSE(url.empty());
  auto clip = g.client->Get(url);
  ASSERT_TRUE(clip);
  EXPECT_EQ(clip->status, 200);
  EXPECT_EQ(g.get("/v1/sessions/" + id).at("status"), "Welcome");
}

TEST(Gateway, SelectDeliversStableObj) {
  Live g;
  auto id = g.session();
  g.post("/v1/sessions/" + id + "/command", {{"text", "create a pear"}}, 200);
  auto sel = g.post("/v1/sessions/" + id + "/select", {{"offer_ref", "requested:0"}}, 200);
  EXPECT_LE(sel.at("stats").at("vertices").get<int>(), 1000);
  EXPECT_FALSE(sel.at("from_repository").get<bool>());
  const std::string url = sel.at("mesh_url");
  auto a = g.client->Get(url);
  auto b = g.client->Get(url);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->status, 200);
  EXPECT_EQ(a->body, b->body);
  EXPECT_EQ(a->body.size(), sel.at("stats").at("bytes").get<std::size_t>());
  EXPECT_EQ(geometry::write_obj(geometry::parse_obj(a->body)), a->body);
  auto clip = g.client->Get(sel.at("confirmation_audio_url").get<std::string>());
  ASSERT_TRUE(clip);
  EXPECT_EQ(clip->status, 200);
  EXPECT_EQ(g.get("/v1/sessions/" + id).at("status"), "Presenting");
}

TEST(Gateway, IllegalSelectsAre409) {
  Live g;
  auto id = g.session();
  EXPECT_EQ(g.post("/v1/sessions/" + id + "/select", {{"offer_ref", "requested:0"}}, 409).at("code"), "invalid_state");
  g.post("/v1/sessions/" + id + "/command", {{"text", "create a pear"}}, 200);
  EXPECT_EQ(g.post("/v1/sessions/" + id + "/select", {{"offer_ref", "requested:9"}}, 409).at("code"), "invalid_choice");
  EXPECT_EQ(g.post("/v1/sessions/" + id + "/select", {{"offer_ref", "menu:0"}}, 409).at("code"), "invalid_choice");
  EXPECT_EQ(g.post("/v1/sessions/" + id + "/select", {{"ref", "requested:0"}}, 400).at("code"), "bad_request");
  g.post("/v1/sessions/" + id + "/select", {{"offer_ref", "requested:0"}}, 200);
}

TEST(Gateway, TransformRoute) {
  Live g;
  auto id = g.session();
  g.post("/v1/sessions/" + id + "/command", {{"text", "create a cup"}}, 200);
  const std::string aid = g.post("/v1/sessions/" + id + "/select", {{"offer_ref", "requested:0"}}, 200).at("asset_id");
  const std::string path = "/v1/sessions/" + id + "/assets/" + aid + "/transform";
  auto moved = g.post(path, {{"op", {{"type", "move"}, {"delta", {1, 0, -2}}}}}, 200);
  EXPECT_EQ(moved.at("placement").at("position"), json({1.0, 0.0, -2.0}));
  auto scaled = g.post(path, {{"op", {{"type", "scale"}, {"factor", 2}}}}, 200);
  EXPECT_EQ(scaled.at("placement").at("scale"), json({2.0, 2.0, 2.0}));
  EXPECT_EQ(g.post(path, {{"op", {{"type", "scale"}, {"factor", 0}}}}, 400).at("code"), "non_positive_scale");
  EXPECT_EQ(g.post(path, {{"op", {{"type", "twist"}}}}, 400).at("code"), "invalid_argument");
  EXPECT_EQ(g.post("/v1/sessions/" + id + "/assets/asset-424242/transform", {{"op", {{"type", "move"}, {"delta", {1, 0, 0}}}}},
                   404)
                .at("code"),
            "unknown_asset");
  auto snap = g.get("/v1/sessions/" + id);
  EXPECT_EQ(snap.at("placements").at(aid).at("scale"), json({2.0, 2.0, 2.0}));
}

TEST(Gateway, ScriptedFiveCommandRun) {
  Live g;
  auto id = g.session();
  std::vector<std::string> urls;
  for (std::string cmd : {"Matrix, create a banana", "Matrix, create a red apple", "Matrix, create a pear",
                          "Matrix, create grapes", "Matrix, create a white plate"}) {
    g.post("/v1/sessions/" + id + "/command", {{"text", cmd}}, 200);
    auto sel = g.post("/v1/sessions/" + id + "/select", {{"offer_ref", "requested:0"}}, 200);
    urls.push_back(sel.at("mesh_url"));
  }
  ASSERT_EQ(urls.size(), 5u);
  EXPECT_EQ(std::set<std::string>(urls.begin(), urls.end()).size(), 5u);
  for (const auto& u : urls) {
    auto r = g.client->Get(u);
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200);
    EXPECT_LE(geometry::parse_obj(r->body).vertex_count(), 1000u);
  }
  auto evs = g.events(id);
  EXPECT_TRUE(pipeline::is_legal_path(statuses(evs)));
  std::uint64_t last = 0;
  for (const auto& e : evs) {
    EXPECT_GT(e.at("seq").get<std::uint64_t>(), last);
    last = e.at("seq");
  }
  auto metrics = g.get("/v1/metrics");
  EXPECT_EQ(metrics.at("summary").at("tasks"), 5);
  EXPECT_EQ(metrics.at("records").size(), 5u);
  for (const char* col : {"mean_completion_time_s", "success_rate_pct", "error_rate", "mean_responsiveness_s",
                          "mean_mesh_size_mb"})
    EXPECT_TRUE(metrics.at("summary").contains(col)) << col;
}

TEST(Gateway, EventStreamFollowsLive) {
  Live g;
  auto id = g.session();
  std::vector<json> seen;
  std::mutex m;
  std::thread reader([&] {
    httplib::Client c(g.server->base_url());
    c.set_read_timeout(std::chrono::seconds(30));
    std::string buf;
    c.Get("/v1/sessions/" + id + "/events?after=0&follow=1", [&](const char* data, std::size_t n) {
      buf.append(data, n);
      std::size_t nl;
      bool done = false;
      while ((nl = buf.find('\n')) != std::string::npos) {
        auto e = json::parse(buf.substr(0, nl));
        buf.erase(0, nl + 1);
        std::lock_guard lock(m);
        seen.push_back(e);
        done |= e.at("type") == "asset";
      }
      return !done;
    });
  });
  g.post("/v1/sessions/" + id + "/command", {{"text", "create a lamp"}}, 200);
  g.post("/v1/sessions/" + id + "/select", {{"offer_ref", "requested:0"}}, 200);
  reader.join();
  std::lock_guard lock(m);
  ASSERT_FALSE(seen.empty());
  EXPECT_EQ(seen.front().at("seq"), 1);
  EXPECT_EQ(seen.back().at("type"), "asset");
  auto path = statuses(seen);
  EXPECT_TRUE(pipeline::is_legal_path(path));
  EXPECT_EQ(path.back(), pipeline::StatusState::Presenting);
}

TEST(Gateway, EventReplayAfterSeq) {
  Live g;
  auto id = g.session();
  g.post("/v1/sessions/" + id + "/command", {{"text", "create a lamp"}}, 200);
  auto all = g.events(id);
  ASSERT_GT(all.size(), 2u);
  auto r = g.client->Get("/v1/sessions/" + id + "/events?follow=0&after=2");
  ASSERT_TRUE(r);
  std::istringstream in(r->body);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(json::parse(line).at("seq"), 3);
  EXPECT_EQ(g.get("/v1/sessions/" + id + "/events?after=x", 400).at("code"), "bad_request");
}

TEST(Gateway, StopEndsOpenStreams) {
  auto g = std::make_unique<Live>();
  auto id = g->session();
  std::atomic<bool> finished{false};
  std::thread reader([&, base = g->server->base_url()] {
    httplib::Client c(base);
    c.set_read_timeout(std::chrono::seconds(30));
    c.Get("/v1/sessions/" + id + "/events", [](const char*, std::size_t) { return true; });
    finished = true;
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  const auto t0 = std::chrono::steady_clock::now();
  g->server->stop();
  reader.join();
  EXPECT_TRUE(finished);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(5));
}

TEST(Gateway, HealthzReportsModes) {
  Live mock;
  auto body = mock.get("/v1/healthz");
  EXPECT_EQ(body.at("status"), "ok");
  EXPECT_TRUE(body.at("all_mock").get<bool>());
  EXPECT_EQ(body.at("backends").size(), 6u);

  adapters::BackendStubServer stub;
  stub.start("127.0.0.1", 0);
  auto cfg = GatewayConfig::from_settings({{"backend_embed_url", stub.base_url()},
                                           {"backend_generate_url", "http://127.0.0.1:1"},
                                           {"backend_generate_timeout_ms", "200"}});
  Live mixed(cfg);
  body = mixed.get("/v1/healthz");
  EXPECT_EQ(body.at("status"), "degraded");
  EXPECT_FALSE(body.at("all_mock").get<bool>());
  for (const auto& b : body.at("backends")) {
    if (b.at("name") == "embed") EXPECT_TRUE(b.at("reachable").get<bool>());
    if (b.at("name") == "generate") EXPECT_FALSE(b.at("reachable").get<bool>());
  }
  stub.stop();
}

TEST(Gateway, ConcurrentSessions) {
  Live g;
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  const std::vector<std::string> things = {"pear", "cup", "lamp", "book"};
  for (const auto& thing : things) {
    threads.emplace_back([&, thing] {
      httplib::Client c(g.server->base_url());
      c.set_read_timeout(std::chrono::seconds(30));
      auto s = c.Post("/v1/sessions", R"({"language":"en"})", "application/json");
      if (!s || s->status != 201) return;
      const std::string id = json::parse(s->body).at("session_id");
      auto cmd = c.Post("/v1/sessions/" + id + "/command", json{{"text", "create a " + thing}}.dump(), "application/json");
      if (!cmd || cmd->status != 200) return;
      auto sel = c.Post("/v1/sessions/" + id + "/select", R"({"offer_ref":"requested:0"})", "application/json");
      if (sel && sel->status == 200) ++ok;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok, 4);
}
