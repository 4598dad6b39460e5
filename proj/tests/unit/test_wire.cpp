#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include "eval_fixtures.hpp"
#include "forge/eval/metrics.hpp"
#include "forge/eval/mocks.hpp"
#include "forge/eval/wire.hpp"
#include "forge/pipeline/synth.hpp"
#include "run.hpp"

using namespace forge;
using namespace forge::eval;
namespace fs = std::filesystem;

namespace {

FunctionClient irrational_backend(std::size_t batch = 4) {
  return FunctionClient(13, codec::Vocabulary(codec::PuzzleKind::Sudoku).hash(),
                        [](std::span<const Token> p) {
                          Logits row(13);
                          for (std::size_t i = 0; i < row.size(); ++i) row[i] = std::sin(1.0 + p.size() * 13.0 + i) / 3.0;
                          return row;
                        },
                        batch);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

}  // namespace

TEST(Wire, HandshakeRoundTrip) {
  const Handshake h{1, "abc", 13, 8};
  const auto back = Handshake::from_line(h.to_line());
  EXPECT_EQ(back.vocab_hash, "abc");
  EXPECT_EQ(back.vocab_size, 13);
  EXPECT_EQ(back.max_batch, 8u);
  EXPECT_THROW(Handshake::from_line(R"({"protocol":2,"vocab_hash":"a","vocab_size":3,"max_batch":1})"), ProtocolError);
  try {
    Handshake::from_line("hello");
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.raw(), "hello");
  }
}

TEST(Wire, AddressParsing) {
  EXPECT_EQ(parse_address("localhost:9000")->port, "9000");
  EXPECT_EQ(parse_address("tcp://10.0.0.1:80")->host, "10.0.0.1");
  EXPECT_EQ(parse_address("[::1]:5")->host, "::1");
  EXPECT_FALSE(parse_address("python serve.py --port 9000"));
  EXPECT_FALSE(parse_address("./model"));
}

TEST(Wire, ServerAnswersAndReportsBadRequests) {
  auto backend = irrational_backend(2);
  std::istringstream in(
      "{\"id\":5,\"tokens\":[1,4]}\n"
      "{\"batch\":[{\"id\":6,\"tokens\":[1]},{\"id\":7,\"tokens\":[1,99]},{\"id\":8,\"tokens\":[1]},{\"id\":9,\"tokens\":[1]}]}\n"
      "not json\n"
      "{\"tokens\":[1]}\n");
  std::ostringstream out;
  StreamLineIo io(in, out);
  serve_protocol(io, backend);
  const auto lines = lines_of(out.str());
  ASSERT_EQ(lines.size(), 8u);
  EXPECT_EQ(Handshake::from_line(lines[0]).max_batch, 2u);
  const auto first = nlohmann::json::parse(lines[1]);
  EXPECT_EQ(first["id"], 5);
  EXPECT_EQ(first["logits"].get<Logits>(), request_logits(backend, {{1, 4}})[0]);
  EXPECT_EQ(nlohmann::json::parse(lines[2])["id"], 6);
  EXPECT_TRUE(nlohmann::json::parse(lines[3]).contains("error"));
  EXPECT_EQ(nlohmann::json::parse(lines[4])["logits"], nlohmann::json::parse(lines[2])["logits"]);
  EXPECT_EQ(nlohmann::json::parse(lines[5])["id"], 9);
  EXPECT_TRUE(nlohmann::json::parse(lines[6])["id"].is_null());
  EXPECT_TRUE(nlohmann::json::parse(lines[7]).contains("error"));
}

TEST(Wire, TcpRoundTripIsBitExact) {
  auto backend = irrational_backend(3);
  TcpListener server("127.0.0.1", 0);
  std::thread t([&] { server.serve_one(backend); });
  {
    TcpClient client({"127.0.0.1", std::to_string(server.port())});
    EXPECT_EQ(client.vocab_hash(), backend.vocab_hash());
    EXPECT_EQ(client.batch_limit(), 3u);
    const std::vector<Prefix> batch{{1, 4, 5}, {1, 4, 5}, {1}, {1, 7}, {1, 8, 9, 10}};
    const auto got = request_logits(client, batch);
    EXPECT_EQ(got, request_logits(backend, batch));
    EXPECT_EQ(got[0], got[1]);
    EXPECT_TRUE(request_logits(client, {}).empty());
  }
  t.join();
}

TEST(Wire, SubprocessFailures) {
  EXPECT_THROW(SubprocessClient("true"), TransportError);
  SubprocessClient garbage("printf '%s\\n%s\\n' " +
                           quote(R"({"protocol":1,"vocab_hash":"h","vocab_size":3,"max_batch":2})") + " 'not json'");
  try {
    garbage.logits({{1}});
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.raw(), "not json");
  }
  SubprocessClient silent("printf '%s\\n' " + quote(R"({"protocol":1,"vocab_hash":"h","vocab_size":3,"max_batch":2})"));
  EXPECT_THROW(silent.logits({{1}}), TransportError);
}

TEST(Wire, MockModelProcessMatchesInProcessMock) {
  const fs::path root = fs::temp_directory_path() / "forge_test_wire";
  fs::remove_all(root);
  fs::create_directories(root);
  pipeline::SynthConfig sc;
  sc.count = 40;
  sc.seed = 12;
  pipeline::write_synthetic_csv((root / "p.csv").string(), sc);
  pipeline::SudokuBuildConfig cfg;
  cfg.csv = (root / "p.csv").string();
  cfg.common.ordering = codec::Ordering::SolverDecomposed;
  cfg.common.split.test_fraction = 0.3;
  pipeline::build_sudoku_dataset(root / "ds", cfg);

  const auto data = load_eval_data(root / "ds");
  ASSERT_FALSE(data.items.empty());
  EvalConfig ecfg;
  ecfg.beam = 3;
  ecfg.hinted = true;
  ecfg.probe = true;
  SolverMockClient local(data.items);
  const auto expected = evaluate_model(local, data, ecfg).to_json();
  auto remote = connect_model(testing_support::bin("forge_mock_model") + " --data " + (root / "ds").string());
  EXPECT_EQ(evaluate_model(*remote, data, ecfg).to_json(), expected);
  EXPECT_EQ(expected["puzzle_accuracy"], 1.0);

  // The server reports a prefix it cannot answer, and the client surfaces it.
  EXPECT_THROW(remote->logits({{1, 2}}), ProtocolError);
}
