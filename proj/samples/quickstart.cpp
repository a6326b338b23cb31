// Generates a small labeled hypergraph, expands it adaptively, and trains the
// GCN classifier on it.

#include <iostream>

#include "hyperx/hyperx.hpp"

int main() {
  hyperx::SynthConfig sc;
  sc.num_nodes = 120;
  sc.num_hyperedges = 80;
  sc.sigma = 0.4;
  sc.seed = 42;
  const hyperx::Hypergraph h = hyperx::synth_hypergraph(sc);

  const std::size_t b = h.feature_dim();
  const auto expansion = hyperx::ade::expand(
      h, hyperx::ade::GsiNetParams::glorot(b, hyperx::ade::default_gate_hidden(b), sc.seed),
      hyperx::ade::KernelParams::unit(b), sc.seed);
  std::cout << "nodes " << h.num_nodes() << ", hyperedges " << h.num_hyperedges() << ", incidences "
            << h.num_incidences() << " -> " << expansion.graph.num_edges() << " weighted edges\n";

  hyperx::TrainConfig cfg;
  cfg.seed = 7;
  cfg.epochs = 100;
  const hyperx::RunReport report = hyperx::train(h, cfg);
  std::cout << "best epoch " << report.best_epoch << ", validation " << report.best_val_acc << ", test "
            << report.test_acc << '\n';
}
