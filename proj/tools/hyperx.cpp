// hyperx command-line tool: expand, train, wl, gen, bench.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error. Every output file
// is written to a temp sibling and renamed into place.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyperx/hyperx.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hyperx;

namespace {

// Fails before any work starts if an output directory is missing.
void require_output_dir(const std::string& path) {
  if (path.empty()) return;
  const fs::path p(path);
  if (p.has_parent_path() && !fs::is_directory(p.parent_path()))
    throw Error(ErrorKind::io, "output directory does not exist: " + p.parent_path().string());
}

void require_input_prefix(const std::string& prefix) {
  for (const char* ext : {".hg", ".feat", ".labels"})
    if (!fs::is_regular_file(prefix + ext)) throw Error(ErrorKind::io, "missing input file " + prefix + ext);
}

std::array<double, 3> parse_splits(const std::string& text) {
  std::array<double, 3> out{};
  std::stringstream ss(text);
  std::string item;
  std::size_t k = 0;
  while (std::getline(ss, item, ',')) {
    if (k == 3) throw Error(ErrorKind::invalid_argument, "--splits takes three comma-separated proportions");
    out[k++] = io::detail::parse_number<double>(item, ErrorKind::invalid_argument, "--splits");
  }
  if (k != 3) throw Error(ErrorKind::invalid_argument, "--splits takes three comma-separated proportions");
  return out;
}

json config_json(const TrainConfig& c) {
  return json{{"seed", c.seed},
              {"method", to_string(c.method)},
              {"mode", to_string(c.mode)},
              {"epochs", c.epochs},
              {"lr", c.lr},
              {"weight_decay", c.weight_decay},
              {"dropout", c.dropout},
              {"gate_hidden", c.gate_hidden},
              {"gcn_hidden", c.gcn_hidden},
              {"splits", c.splits}};
}

json run_json(const RunReport& r, std::size_t cell, bool timing) {
  json loss = json::array(), train = json::array(), val = json::array();
  for (const auto& e : r.curve) {
    loss.push_back(e.loss);
    train.push_back(e.train_acc);
    val.push_back(e.val_acc);
  }
  json j{{"cell", cell},
         {"seed", r.config.seed},
         {"config", config_json(r.config)},
         {"loss", loss},
         {"train_acc", train},
         {"val_acc", val},
         {"best_epoch", r.best_epoch},
         {"best_val_acc", r.best_val_acc},
         {"test_acc", r.test_acc},
         {"final_train_acc", r.final_train_acc}};
  if (timing) j["wall_clock_ms"] = r.wall_clock_ms;
  return j;
}

// Grid file: JSON object mapping hyper-parameter names to value lists; the
// grid is their cartesian product over the base configuration.
std::vector<TrainConfig> load_grid(const std::string& path, const TrainConfig& base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open grid file " + path);
  json spec;
  try {
    in >> spec;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::malformed_line, "grid file " + path + ": " + e.what());
  }
  if (!spec.is_object()) throw Error(ErrorKind::malformed_line, "grid file must hold a JSON object");
  std::vector<TrainConfig> cells{base};
  for (const auto& [key, values] : spec.items()) {
    if (!values.is_array() || values.empty())
      throw Error(ErrorKind::malformed_line, "grid entry '" + key + "' must be a non-empty list");
    std::vector<TrainConfig> next;
    for (const auto& cell : cells) {
      for (const auto& v : values) {
        TrainConfig c = cell;
        if (key == "lr") c.lr = v.get<double>();
        else if (key == "weight_decay") c.weight_decay = v.get<double>();
        else if (key == "dropout") c.dropout = v.get<double>();
        else if (key == "gcn_hidden") c.gcn_hidden = v.get<std::size_t>();
        else if (key == "gate_hidden") c.gate_hidden = v.get<std::size_t>();
        else if (key == "epochs") c.epochs = v.get<std::size_t>();
        else throw Error(ErrorKind::malformed_line, "unknown grid key '" + key + "'");
        next.push_back(c);
      }
    }
    cells = std::move(next);
  }
  return cells;
}

void write_selections(std::ostream& out, const std::vector<ade::HyperedgeSelection>& selections) {
  for (const auto& s : selections) {
    out << 'e' << s.hyperedge;
    if (!s.empty()) {
      out << ' ' << s.minus << ' ' << s.plus;
      for (NodeId m : s.mediators) out << ' ' << m;
    }
    out << '\n';
  }
}

void write_embeddings(std::ostream& out, const Matrix& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) out << (j ? "\t" : "") << io::format_real(z(i, j));
    out << '\n';
  }
}

struct ExpandArgs {
  std::string method = "ade";
  std::string input;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  std::string out;
  std::string dump;
};

int run_expand(const ExpandArgs& a, bool seed_given) {
  const bool stochastic = a.method == "ade" || a.method == "hypergcn-fixed";
  if (stochastic && !seed_given) throw CLI::RequiredError("--seed is required for method " + a.method);
  if (!a.dump.empty() && !stochastic)
    throw CLI::ValidationError("--dump-selections", "only valid for ade and hypergcn-fixed");
  require_input_prefix(a.input);
  require_output_dir(a.out);
  require_output_dir(a.dump);
  const Hypergraph h = io::load_hypergraph(a.input);

  if (a.method == "ce") {
    const auto g = clique_expand(h, CliqueWeight::unit);
    io::write_atomic(a.out, [&](std::ostream& o) { io::write_edge_list(o, g); });
  } else if (a.method == "se") {
    const auto g = star_expand(h);
    io::write_atomic(a.out, [&](std::ostream& o) { write_star_edge_list(o, g); });
  } else if (a.method == "le") {
    const auto g = line_expand(h);
    io::write_atomic(a.out, [&](std::ostream& o) { write_line_edge_list(o, g); });
  } else {
    ade::ExpansionResult r;
    if (a.method == "ade") {
      const std::size_t b = h.feature_dim();
      r = ade::expand(h, ade::GsiNetParams::glorot(b, ade::default_gate_hidden(b), a.seed), ade::KernelParams::unit(b),
                      a.seed, a.epoch);
    } else {
      r = ade::expand_hypergcn_fixed(h, a.seed);
    }
    io::write_atomic(a.out, [&](std::ostream& o) { io::write_edge_list(o, r.graph); });
    if (!a.dump.empty()) io::write_atomic(a.dump, [&](std::ostream& o) { write_selections(o, r.selections); });
  }
  return 0;
}

struct TrainArgs {
  std::string input;
  std::string method = "ade";
  std::string mode = "normalized";
  std::size_t epochs = 500;
  std::string splits = "0.2,0.2,0.6";
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
  std::string grid;
  std::string out;
  std::string embeddings;
  double lr = 0.01;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  std::size_t gcn_hidden = 64;
  std::size_t gate_hidden = 0;
  bool timing = false;
};

int run_train(const TrainArgs& a) {
  if (a.repeats == 0) throw CLI::ValidationError("--repeats", "must be >= 1");
  require_input_prefix(a.input);
  require_output_dir(a.out);
  require_output_dir(a.embeddings);
  TrainConfig base;
  base.method = parse_method(a.method);
  if (a.mode == "normalized") base.mode = GcnMode::normalized;
  else if (a.mode == "paper-literal") base.mode = GcnMode::paper_literal;
  else throw CLI::ValidationError("--mode", "expected normalized or paper-literal");
  base.seed = a.seed;  // per-run seeds are derived from it below
  base.epochs = a.epochs;
  base.splits = parse_splits(a.splits);
  base.lr = a.lr;
  base.weight_decay = a.weight_decay;
  base.dropout = a.dropout;
  base.gcn_hidden = a.gcn_hidden;
  base.gate_hidden = a.gate_hidden;
  base.keep_embeddings = !a.embeddings.empty();
  const std::vector<TrainConfig> grid = a.grid.empty() ? std::vector<TrainConfig>{base} : load_grid(a.grid, base);

  const Hypergraph h = io::load_hypergraph(a.input);
  std::vector<std::uint64_t> seeds;
  for (std::size_t r = 0; r < a.repeats; ++r) seeds.push_back(a.repeats == 1 ? a.seed : repeat_seed(a.seed, r));
  const GridResult result = grid_search(h, grid, seeds);

  const GridCell& best = result.cells[result.best];
  io::write_atomic(a.out, [&](std::ostream& o) {
    for (std::size_t c = 0; c < result.cells.size(); ++c)
      for (const auto& run : result.cells[c].runs) o << run_json(run, c, a.timing).dump() << '\n';
    json summary{{"summary",
                  {{"best_cell", result.best},
                   {"config", config_json(best.config)},
                   {"runs", best.runs.size()},
                   {"val_mean", best.validation.mean},
                   {"test_mean", best.test.mean},
                   {"test_std", best.test.std}}}};
    o << summary.dump() << '\n';
  });
  if (!a.embeddings.empty())
    io::write_atomic(a.embeddings, [&](std::ostream& o) { write_embeddings(o, best.runs.front().embeddings); });
  std::cout << "best cell " << result.best << ": test " << best.test.mean * 100.0 << " +- " << best.test.std * 100.0
            << " over " << best.runs.size() << " run(s)\n";
  return 0;
}

struct WlArgs {
  wl::HarnessConfig cfg;
  std::string out;
};

int run_wl(const WlArgs& a) {
  require_output_dir(a.out);
  const auto records = wl::run_harness(a.cfg);
  const auto s = wl::summarize(records);
  if (!a.out.empty()) {
    io::write_atomic(a.out, [&](std::ostream& o) {
      for (const auto& r : records) {
        json j{{"trial", r.index},
               {"seed", r.seed},
               {"nodes", r.num_nodes},
               {"hyperedges", r.num_hyperedges},
               {"coupled", {{"gwl_distinguished", r.coupled.gwl_distinguished},
                            {"wl_distinguished", r.coupled.wl_distinguished},
                            {"violation", r.coupled.violation()}}}};
        if (r.perturbed_available)
          j["perturbed"] = {{"gwl_distinguished", r.perturbed.gwl_distinguished},
                            {"wl_distinguished", r.perturbed.wl_distinguished}};
        o << j.dump() << '\n';
      }
    });
  }
  std::cout << "trials " << s.trials << ", violations " << s.violations << "; perturbed pairs " << s.perturbed
            << ": gwl distinguished " << s.perturbed_gwl_distinguished << ", wl distinguished "
            << s.perturbed_wl_distinguished << '\n';
  if (s.violations) {
    std::cerr << "hyperx: error: " << s.violations << " coupled trial(s) separated by WL but not by GWL\n";
    return 1;
  }
  return 0;
}

struct GenArgs {
  SynthConfig cfg;
  std::string scheme = "label-gaussian";
  std::string out;
};

int run_gen(GenArgs a) {
  if (a.scheme == "label-gaussian") a.cfg.scheme = FeatureScheme::label_gaussian;
  else if (a.scheme == "constant") a.cfg.scheme = FeatureScheme::constant;
  else if (a.scheme == "noise") a.cfg.scheme = FeatureScheme::noise;
  else throw CLI::ValidationError("--scheme", "expected label-gaussian, constant, or noise");
  require_output_dir(a.out + ".hg");
  io::save_hypergraph(a.out, synth_hypergraph(a.cfg));
  return 0;
}

struct BenchArgs {
  BenchConfig cfg;
  std::string out;
};

int run_bench(const BenchArgs& a) {
  require_output_dir(a.out);
  const auto rows = bench_scaling(a.cfg);
  const auto body = [&](std::ostream& o) {
    o << "rung,E,ms\n";
    for (const auto& r : rows) o << r.rung << ',' << r.num_incidences << ',' << r.median_ms << '\n';
  };
  if (a.out.empty())
    body(std::cout);
  else
    io::write_atomic(a.out, body);
  std::cerr << "top-rung ratio " << top_rung_ratio(rows) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypergraph expansion and node classification"};
  app.set_version_flag("--version", std::string("hyperx ") + HYPERX_VERSION);
  app.require_subcommand(1);

  ExpandArgs ex;
  auto* expand = app.add_subcommand("expand", "Convert a hypergraph into a weighted graph");
  expand->add_option("--method", ex.method)->check(CLI::IsMember({"ade", "ce", "se", "le", "hypergcn-fixed"}));
  expand->add_option("--input", ex.input, "Input prefix (<prefix>.hg/.feat/.labels)")->required();
  auto* expand_seed = expand->add_option("--seed", ex.seed);
  expand->add_option("--epoch", ex.epoch, "Tie-break substream index");
  expand->add_option("--out", ex.out, "Edge-list TSV")->required();
  expand->add_option("--dump-selections", ex.dump, "Per-hyperedge pair and mediators");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train expansion + GCN node classifier");
  train_cmd->add_option("--input", tr.input)->required();
  train_cmd->add_option("--method", tr.method)
      ->check(CLI::IsMember({"ade", "ade-no-gate", "ade-no-kernel", "ce", "hypergcn-fixed"}));
  train_cmd->add_option("--mode", tr.mode)->check(CLI::IsMember({"normalized", "paper-literal"}));
  train_cmd->add_option("--epochs", tr.epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--splits", tr.splits, "train,validation,test proportions");
  train_cmd->add_option("--repeats", tr.repeats);
  train_cmd->add_option("--seed", tr.seed)->required();
  train_cmd->add_option("--grid", tr.grid, "JSON hyper-parameter grid");
  train_cmd->add_option("--out", tr.out, "JSON-lines report")->required();
  train_cmd->add_option("--dump-embeddings", tr.embeddings, "Logits of the best snapshot (TSV)");
  train_cmd->add_option("--lr", tr.lr);
  train_cmd->add_option("--weight-decay", tr.weight_decay);
  train_cmd->add_option("--dropout", tr.dropout);
  train_cmd->add_option("--hidden", tr.gcn_hidden)->check(CLI::PositiveNumber);
  train_cmd->add_option("--gate-hidden", tr.gate_hidden, "0 picks max(16, ceil(b/4))");
  train_cmd->add_flag("--timing", tr.timing, "Include wall-clock fields in the report");

  WlArgs wa;
  auto* wl_cmd = app.add_subcommand("wl", "Randomized WL / GWL expressiveness harness");
  wl_cmd->add_option("--trials", wa.cfg.trials);
  wl_cmd->add_option("--max-nodes", wa.cfg.max_nodes);
  wl_cmd->add_option("--max-hyperedges", wa.cfg.max_hyperedges);
  wl_cmd->add_option("--iters", wa.cfg.iterations);
  wl_cmd->add_option("--seed", wa.cfg.seed)->required();
  wl_cmd->add_option("--out", wa.out, "JSON-lines trial records");

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic labeled hypergraph");
  gen->add_option("--nodes", ga.cfg.num_nodes);
  gen->add_option("--hyperedges", ga.cfg.num_hyperedges);
  gen->add_option("--min-size", ga.cfg.min_size);
  gen->add_option("--max-size", ga.cfg.max_size);
  gen->add_option("--classes", ga.cfg.num_classes);
  gen->add_option("--dim", ga.cfg.feature_dim);
  gen->add_option("--scheme", ga.scheme);
  gen->add_option("--sigma", ga.cfg.sigma);
  gen->add_option("--homophily", ga.cfg.homophily);
  gen->add_option("--seed", ga.cfg.seed)->required();
  gen->add_option("--out", ga.out, "Output prefix")->required();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Expansion wall-clock over a doubling ladder");
  bench->add_option("--ladder", ba.cfg.ladder_depth);
  bench->add_option("--base-nodes", ba.cfg.base_nodes);
  bench->add_option("--base-hyperedges", ba.cfg.base_hyperedges);
  bench->add_option("--reps", ba.cfg.reps);
  bench->add_option("--seed", ba.cfg.seed)->required();
  bench->add_option("--out", ba.out, "CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
    if (*expand) return run_expand(ex, expand_seed->count() > 0);
    if (*train_cmd) return run_train(tr);
    if (*wl_cmd) return run_wl(wa);
    if (*gen) return run_gen(ga);
    if (*bench) return run_bench(ba);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "hyperx: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
