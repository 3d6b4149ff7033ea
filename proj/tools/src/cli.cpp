// Copyright 2026 The ccal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ccal_tools/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "ccal/data.hpp"
#include "ccal/errors.hpp"
#include "ccal/gradcheck.hpp"
#include "ccal/model_io.hpp"
#include "ccal/net.hpp"
#include "ccal/random.hpp"
#include "ccal/retrieval.hpp"
#include "ccal/train.hpp"
#include "ccal_tools/compare.hpp"

namespace ccal::tools {

namespace {

// Raised for flag combinations that are individually valid but jointly not.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthFlags {
  SynthSpec spec;
  std::string mixing = "linear";

  SynthSpec resolve() const {
    SynthSpec s = spec;
    s.mixing = mixing == "tanh" ? Mixing::kTanh : Mixing::kLinear;
    try {
      s.validate();
    } catch (const ContractError& e) {
      throw UsageError(e.what());
    }
    return s;
  }
};

struct TrainFlags {
  TrainConfig cfg;
  std::vector<std::size_t> hidden{64};
};

// `config_sink` only absorbs the flag; the file is expanded before parsing.
CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help,
                      std::string& config_sink) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", config_sink,
                  "flat `key = value` file; command-line flags override it");
  return sub;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  for (const std::string& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Appends `--key value` for every config entry not given on the command line.
void expand_config(const CLI::App& sub, std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");

  std::vector<std::string> extra;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected `key = value`");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub.get_option_no_throw(flag);
    if (key == "config" || opt == nullptr)
      throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (on_command_line(args, flag)) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1") extra.push_back(flag);
      else if (value != "false" && value != "0")
        throw UsageError(path + ":" + std::to_string(lineno) + ": '" + key + "' takes true or false");
    } else {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
}

void add_synth_flags(CLI::App* sub, SynthFlags& f) {
  sub->add_option("--dx", f.spec.dx, "x-view width")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--dy", f.spec.dy, "y-view width")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--latent", f.spec.latent, "shared latent dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--samples", f.spec.samples, "number of pairs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--mixing", f.mixing, "linear or tanh")
      ->check(CLI::IsMember({"linear", "tanh"}))
      ->capture_default_str();
  sub->add_option("--noise-x", f.spec.noise_x, "noise std-dev on x")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--noise-y", f.spec.noise_y, "noise std-dev on y")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--latent-scales", f.spec.latent_scales,
                  "std-dev per latent component (default all 1)")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
}

void add_train_flags(CLI::App* sub, TrainFlags& f) {
  TrainConfig& c = f.cfg;
  sub->add_option("--k", c.k, "embedding width")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--hidden", f.hidden, "hidden layer widths, comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--margin", c.margin, "ranking margin")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_flag("--symmetric", c.symmetric, "also sum hinges over y-queries");
  sub->add_option("--reg", c.reg, "covariance ridge r")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--lr", c.lr, "Adam learning rate")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--weight-decay", c.weight_decay, "L2 weight decay")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--batch-size", c.batch_size, "minibatch size")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24))
      ->capture_default_str();
  sub->add_option("--epochs", c.max_epochs, "maximum epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--patience", c.patience, "epochs without improvement before an LR drop")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--reduced-patience", c.reduced_patience, "patience after the first drop")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--lr-divisor", c.lr_divisor, "LR divisor per drop")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--reductions", c.reductions, "number of LR drops")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

Head head_from_flag(const std::string& name) {
  const auto h = parse_head(name);
  if (!h) throw UsageError("unknown model '" + name + "'");
  return *h;
}

void check_batch(const TrainConfig& cfg, Head head) {
  if (head != Head::kLearnedRank && cfg.batch_size < cfg.k + 1)
    throw UsageError("--batch-size must be at least --k + 1 for the " +
                     std::string(head_name(head)) + " head (got batch " +
                     std::to_string(cfg.batch_size) + ", k " + std::to_string(cfg.k) + ")");
  try {
    cfg.validate();
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
}

TowerSpec tower(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t k) {
  TowerSpec s{{in}};
  s.widths.insert(s.widths.end(), hidden.begin(), hidden.end());
  s.widths.push_back(k);
  return s;
}

std::string join(const Vec& v, int precision) {
  std::string s;
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.*f", i ? "," : "", precision, v[i]);
    s += buf;
  }
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  if (!f.flush()) throw Error("write to '" + path + "' failed");
}

// --- commands -------------------------------------------------------------

struct GenData {
  SynthFlags synth;
  std::string out_path;

  void attach(CLI::App* sub) {
    add_synth_flags(sub, synth);
    sub->add_option("--seed", synth.spec.seed, "generator seed")->capture_default_str();
    sub->add_option("--out", out_path, "output CCAPAIRS file")->required();
  }

  int run(std::ostream& out) const {
    const SynthSpec spec = synth.resolve();
    const SynthResult r = generate(spec);
    save_dataset(r.data, out_path);
    out << "wrote " << out_path << " dx=" << spec.dx << " dy=" << spec.dy
        << " m=" << spec.samples << " mixing=" << synth.mixing;
    if (r.population_corr) out << " population_corr=" << join(*r.population_corr, 4);
    out << "\n";
    return kExitOk;
  }
};

struct TrainCmd {
  TrainFlags flags;
  std::string model = "ccal";
  std::string data_path, val_path, out_path;
  double val_fraction = 0.1;

  void attach(CLI::App* sub) {
    sub->add_option("--model", model, "dcca, learned or ccal")
        ->check(CLI::IsMember({"dcca", "learned", "ccal", "tno", "learned-rank", "ccal-rank"}))
        ->capture_default_str();
    sub->add_option("--data", data_path, "training CCAPAIRS file")->required();
    sub->add_option("--val-data", val_path, "validation CCAPAIRS file (default: hold out)");
    sub->add_option("--val-fraction", val_fraction, "held-out share when --val-data is absent")
        ->check(CLI::Range(0.01, 0.5))
        ->capture_default_str();
    sub->add_option("--out", out_path, "output model file")->required();
    sub->add_option("--seed", flags.cfg.seed, "initialization and shuffling seed")
        ->capture_default_str();
    add_train_flags(sub, flags);
  }

  int run(std::ostream& out, std::ostream& err) const {
    const Head head = head_from_flag(model);
    check_batch(flags.cfg, head);

    PairedDataset train_set = load_dataset(data_path), val_set;
    if (!val_path.empty()) {
      val_set = load_dataset(val_path);
    } else {
      Rng rng(flags.cfg.seed);
      const auto perm = rng.permutation(train_set.size());
      const auto n_val = static_cast<std::size_t>(
          std::max<double>(1.0, std::round(val_fraction * static_cast<double>(train_set.size()))));
      if (n_val + 2 > train_set.size()) throw Error("dataset too small to hold out a validation set");
      val_set = train_set.select({perm.begin(), perm.begin() + static_cast<long>(n_val)});
      train_set = train_set.select({perm.begin() + static_cast<long>(n_val), perm.end()});
    }
    if (val_set.x.cols() != train_set.x.cols() || val_set.y.cols() != train_set.y.cols())
      throw Error("validation data widths differ from the training data");

    DualNet net = make_dual_net(tower(train_set.x.cols(), flags.hidden, flags.cfg.k),
                                tower(train_set.y.cols(), flags.hidden, flags.cfg.k), head,
                                flags.cfg.reg, flags.cfg.seed);
    const TrainResult r = train(std::move(net), train_set, val_set, flags.cfg,
                                [&](const EpochRecord& e) { out << e.format() << "\n" << std::flush; });
    save_model(r.model, flags.cfg, out_path);
    err << "saved " << out_path << " (" << head_name(head) << ", best epoch "
        << r.log.best_epoch << ", val MRR " << r.log.best_val_mrr << ")\n";
    return kExitOk;
  }
};

struct EvalCmd {
  std::string model_path, data_path, refit_path, direction = "both";

  void attach(CLI::App* sub) {
    sub->add_option("--model", model_path, "model file")->required();
    sub->add_option("--data", data_path, "test CCAPAIRS file")->required();
    sub->add_option("--direction", direction, "x2y, y2x or both")
        ->check(CLI::IsMember({"x2y", "y2x", "both"}))
        ->capture_default_str();
    sub->add_option("--refit-data", refit_path,
                    "training CCAPAIRS file for refitting CCA statistics before evaluation");
  }

  int run(std::ostream& out, std::ostream& err) const {
    ModelFile mf = load_model(model_path);
    DualNet& net = mf.net;
    const PairedDataset test = load_dataset(data_path);
    if (test.x.cols() != net.f.spec().input_width() || test.y.cols() != net.g.spec().input_width())
      throw Error("data widths do not match the model's towers");
    if (net.uses_cca()) {
      if (!refit_path.empty()) {
        const PairedDataset refit = load_dataset(refit_path);
        refit_cca(net, refit.x, refit.y);
      } else if (!net.cca->state().fitted()) {
        err << "error: the " << head_name(net.head)
            << " model carries no CCA statistics; pass --refit-data with the training set\n";
        return kExitFailure;
      }
    }
    out << report_header() << "\n";
    for (Direction d : {Direction::kXToY, Direction::kYToX}) {
      if (direction != "both" && direction != direction_name(d)) continue;
      out << format_report(head_name(net.head), evaluate(net, test, d)) << "\n";
    }
    return kExitOk;
  }
};

struct GradCheckCmd {
  std::vector<std::string> targets{"cca-layer", "tno", "ranking", "mlp", "end-to-end"};
  GradCheckDims dims;
  double h = 1e-5, tol = 1e-4;
  std::uint64_t seed = 0;

  void attach(CLI::App* sub) {
    sub->set_help_flag("--help", "print this help message and exit");  // frees -h for --h
    sub->add_option("--target", targets, "cca-layer, tno, ranking, mlp, end-to-end")
        ->delimiter(',')
        ->check(CLI::IsMember({"cca-layer", "tno", "ranking", "mlp", "end-to-end"}))
        ->capture_default_str();
    sub->add_option("--m", dims.m, "batch size")->check(CLI::Range(std::size_t{2}, std::size_t{4096}))->capture_default_str();
    sub->add_option("--dx", dims.dx, "x width")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--dy", dims.dy, "y width")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--k", dims.k, "projection width")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--reg", dims.reg, "covariance ridge")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--margin", dims.margin, "ranking margin")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_flag("--zero-weights", dims.zero_weights, "mlp target: start from zero parameters");
    sub->add_option("--h", h, "finite-difference step")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--tol", tol, "relative error tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--seed", seed, "data seed")->capture_default_str();
  }

  int run(std::ostream& out) const {
    if (dims.k > std::min(dims.dx, dims.dy)) throw UsageError("--k must not exceed --dx or --dy");
    if (dims.m < dims.k + 1) throw UsageError("--m must be at least --k + 1");
    bool all = true;
    out << "target,max_rel_error,probes,kinks_skipped,attempts,status\n";
    for (const std::string& name : targets) {
      const GradCheckReport r = grad_check(*parse_target(name), dims, seed, h, tol);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s,%.3e,%zu,%zu,%zu,%s", name.c_str(), r.max_rel_error,
                    r.probes, r.kinks_skipped, r.attempts, r.pass ? "PASS" : "FAIL");
      out << buf;
      if (!r.pass) out << " (" << r.message << ")";
      out << "\n";
      all = all && r.pass;
    }
    return all ? kExitOk : kExitFailure;
  }
};

struct CompareCmd {
  SynthFlags synth;
  TrainFlags flags;
  CompareOptions opts;
  std::string data_path, out_path;
  std::uint64_t data_seed = 0;
  std::vector<std::string> models{"dcca", "learned", "ccal"};

  void attach(CLI::App* sub) {
    sub->add_option("--data", data_path, "CCAPAIRS file (default: generate from the synthetic flags)");
    add_synth_flags(sub, synth);
    sub->add_option("--data-seed", data_seed, "generator seed when --data is absent")
        ->capture_default_str();
    sub->add_option("--models", models, "heads to train")
        ->delimiter(',')
        ->check(CLI::IsMember({"dcca", "learned", "ccal"}))
        ->capture_default_str();
    sub->add_option("--seeds", opts.seeds, "replicas per model")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--first-seed", opts.first_seed, "seed of the first replica")->capture_default_str();
    sub->add_option("--train-fraction", opts.train_fraction, "share of the training split used")
        ->check(CLI::Range(1e-6, 1.0))
        ->capture_default_str();
    sub->add_option("--val-size", opts.val_size, "validation pairs (default 10%)");
    sub->add_option("--test-size", opts.test_size, "test pairs (default 10%)");
    sub->add_option("--split-seed", opts.split_seed, "seed for the split and subsample")
        ->capture_default_str();
    sub->add_option("--jobs", opts.jobs, "replicas trained concurrently")
        ->check(CLI::Range(std::size_t{1}, std::size_t{256}))
        ->capture_default_str();
    sub->add_option("--out", out_path, "also write the report to this file");
    add_train_flags(sub, flags);
  }

  int run(std::ostream& out) {
    opts.heads.clear();
    for (const std::string& m : models) {
      const Head h = head_from_flag(m);
      check_batch(flags.cfg, h);
      opts.heads.push_back(h);
    }
    opts.train = flags.cfg;
    opts.hidden = flags.hidden;
    const SynthSpec spec = data_path.empty() ? [&] {
      SynthFlags s = synth;
      s.spec.seed = data_seed;
      return s.resolve();
    }() : SynthSpec{};

    const PairedDataset data = data_path.empty() ? generate(spec).data : load_dataset(data_path);
    CompareResult result;
    try {
      result = run_compare(data, opts);
    } catch (const ContractError& e) {
      throw UsageError(e.what());
    }
    const std::string report = format_compare(result, opts);
    out << report;
    if (!out_path.empty()) write_text(out_path, report);
    return kExitOk;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ccal: CCA projection layers for cross-modal retrieval"};
  app.name("ccal");
  app.require_subcommand(1);

  GenData gen;
  TrainCmd train_cmd;
  EvalCmd eval_cmd;
  GradCheckCmd grad_cmd;
  CompareCmd compare_cmd;
  std::string config;
  gen.attach(add_command(app, "gen-data", "generate a synthetic paired dataset", config));
  train_cmd.attach(add_command(app, "train", "train a two-tower model", config));
  eval_cmd.attach(add_command(app, "eval", "cross-modal retrieval metrics for a model", config));
  grad_cmd.attach(
      add_command(app, "gradcheck", "compare analytic adjoints with finite differences", config));
  compare_cmd.attach(add_command(app, "compare", "train all heads over seeds and tabulate", config));

  std::vector<std::string> expanded = args;
  try {
    if (!expanded.empty())
      if (const CLI::App* sub = app.get_subcommand_no_throw(expanded.front()))
        expand_config(*sub, expanded);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "gen-data") return gen.run(out);
    if (cmd == "train") return train_cmd.run(out, err);
    if (cmd == "eval") return eval_cmd.run(out, err);
    if (cmd == "gradcheck") return grad_cmd.run(out);
    return compare_cmd.run(out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ccal::tools
