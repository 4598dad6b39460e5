// Test model for the eval harness. Loads a dataset split and answers the wire
// protocol from the solver (or worse), over stdin/stdout or TCP.

#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "forge/eval/mocks.hpp"
#include "forge/eval/wire.hpp"

using namespace forge;

int main(int argc, char** argv) {
  CLI::App app{"forge_mock_model: answers the model wire protocol from a dataset"};
  std::string data;
  std::string split = "test";
  std::string kind = "solver";
  std::size_t puzzle = 0;
  std::size_t triplet = 0;
  std::string listen;
  std::size_t connections = 1;
  app.add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  app.add_option("--split", split, "Split the puzzles come from");
  app.add_option("--kind", kind, "solver, one-error, uniform or random")
      ->check(CLI::IsMember({"solver", "one-error", "uniform", "random"}));
  app.add_option("--puzzle", puzzle, "one-error: puzzle index");
  app.add_option("--triplet", triplet, "one-error: solution triplet index");
  app.add_option("--listen", listen, "Serve TCP on host:port instead of stdio");
  app.add_option("--connections", connections, "TCP connections to serve before exiting (0: forever)");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto loaded = eval::load_eval_data(data, split);
    std::unique_ptr<eval::ModelClient> model;
    if (kind == "solver") {
      model = std::make_unique<eval::SolverMockClient>(loaded.items);
    } else if (kind == "one-error") {
      model = std::make_unique<eval::OneErrorMockClient>(loaded.items, puzzle, triplet);
    } else if (kind == "uniform") {
      model = std::make_unique<eval::UniformClient>(loaded.kind);
    } else {
      model = std::make_unique<eval::RandomCandidateClient>();
    }
    if (listen.empty()) {
      eval::StreamLineIo io(std::cin, std::cout);
      eval::serve_protocol(io, *model);
      return 0;
    }
    const auto addr = eval::parse_address(listen);
    if (!addr) throw std::invalid_argument("--listen needs host:port");
    eval::TcpListener server(addr->host, std::stoi(addr->port));
    std::cerr << "listening on " << addr->host << ":" << server.port() << std::endl;
    for (std::size_t k = 0; connections == 0 || k < connections; ++k) server.serve_one(*model);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "forge_mock_model: error: " << e.what() << '\n';
    return 1;
  }
}
