// SPDX-License-Identifier: Apache-2.0
//
// tsgan: train, sample and evaluate the conditional price GAN from the shell.
//
// Exit codes: 0 success, 2 data error, 3 numeric error, 4 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tsgan/cgan.hpp"
#include "tsgan/checkpoint.hpp"
#include "tsgan/data_ingest.hpp"
#include "tsgan/error.hpp"
#include "tsgan/evaluation.hpp"
#include "tsgan/gradcheck.hpp"
#include "tsgan/scaling.hpp"
#include "tsgan/svg_plot.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tsgan;

constexpr int kExitOk = 0;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUsage = 4;

constexpr double kDefaultHoldoutSplit = 0.8;

// ---------------------------------------------------------------------------
// Small I/O helpers

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << contents;
  if (!out) throw DataError("cannot write '" + path.string() + "'");
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

std::optional<std::uint64_t> env_seed() {
  const char* text = std::getenv("TSGAN_SEED");
  if (!text || !*text) return std::nullopt;
  std::uint64_t seed = 0;
  const char* end = text + std::char_traits<char>::length(text);
  auto [ptr, ec] = std::from_chars(text, end, seed);
  if (ec != std::errc{} || ptr != end) throw UsageError(std::string("TSGAN_SEED is not an unsigned integer: ") + text);
  return seed;
}

double parse_split(const std::string& text) {
  if (text.empty()) return kDefaultHoldoutSplit;
  double f = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), f);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !(f > 0.0 && f <= 1.0)) {
    throw UsageError("--split expects a training fraction in (0, 1], got '" + text + "'");
  }
  return f;
}

/// A comma-separated file with a header, read fully into named columns.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const fs::path& source) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw DataError("'" + source.string() + "' has no '" + name + "' column");
  }
  bool has(const std::string& name) const { return std::find(header.begin(), header.end(), name) != header.end(); }

  std::vector<double> numbers(const std::string& name, const fs::path& source) const {
    const auto c = column(name, source);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& s = rows[r][c];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw DataError(source.string() + " line " + std::to_string(r + 2) + ": bad " + name + " '" + s + "'");
      }
      out.push_back(v);
    }
    return out;
  }
};

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split_commas(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_commas(line);
    if (fields.size() != t.header.size()) {
      throw DataError(path.string() + " line " + std::to_string(line_no) + ": expected " +
                      std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (t.rows.empty()) throw DataError("'" + path.string() + "' has no data rows");
  return t;
}

// ---------------------------------------------------------------------------
// Loading and cleaning a price file, with every dropped row accounted for.

struct Prepared {
  TimeSeries series;
  std::size_t rows_read = 0;
  std::vector<Reject> rejects;  // file line + reason, load and clean stages combined
};

Prepared prepare_series(const fs::path& input, const std::string& asset, const std::string& period) {
  auto loaded = load_csv(input);
  Prepared p;
  p.rows_read = loaded.rows_read;
  p.rejects = loaded.rejects;
  if (loaded.series.bars.empty()) throw DataError("no usable data in '" + input.string() + "'");
  auto cleaned = clean(loaded.series);
  for (const auto& d : cleaned.dropped) p.rejects.push_back({loaded.source_rows[d.row], d.reason});
  std::stable_sort(p.rejects.begin(), p.rejects.end(), [](const Reject& a, const Reject& b) { return a.row < b.row; });
  p.series = std::move(cleaned.series);
  p.series.asset_id = asset;
  p.series.period_label = period;
  return p;
}

std::string rejects_csv(std::span<const Reject> rejects) {
  std::ostringstream out;
  write_rejects_csv(out, rejects);
  return out.str();
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config;
  std::string input;
  std::string out;
  std::string asset;
  std::string period;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, batch_size, noise_dim, cond_dim, hidden;
  std::optional<double> lr, beta1, beta2, clip_norm;
  std::optional<std::string> init;
  std::optional<std::vector<std::size_t>> disc_layers;
  std::optional<std::string> split;
};

std::string losses_csv(const LossHistory& h) {
  std::string s = "epoch,loss_d,loss_g\n";
  for (std::size_t e = 0; e < h.epoch_d.size(); ++e) {
    s += std::to_string(e + 1) + ',' + num(h.epoch_d[e]) + ',' + num(h.epoch_g[e]) + '\n';
  }
  return s;
}

std::string batch_losses_csv(const LossHistory& h, std::size_t batches_per_epoch) {
  std::string s = "step,epoch,loss_d,loss_g\n";
  for (std::size_t i = 0; i < h.batch_d.size(); ++i) {
    s += std::to_string(i + 1) + ',' + std::to_string(i / batches_per_epoch + 1) + ',' + num(h.batch_d[i]) + ',' +
         num(h.batch_g[i]) + '\n';
  }
  return s;
}

int cmd_train(const TrainArgs& a) {
  // Precedence: command-line flag, then config file, then built-in defaults.
  json file = a.config.empty() ? json::object() : read_json_file(a.config);
  const json& file_cfg = file.contains("train_config") ? file.at("train_config") : file;
  TrainConfig cfg = config_from_json(file_cfg);
  if (!file_cfg.contains("seed")) {
    if (auto s = env_seed()) cfg.seed = *s;
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.batch_size) cfg.batch_size = *a.batch_size;
  if (a.noise_dim) cfg.noise_dim = *a.noise_dim;
  if (a.cond_dim) cfg.condition_dim = *a.cond_dim;
  if (a.hidden) cfg.hidden_size = *a.hidden;
  if (a.lr) cfg.lr = *a.lr;
  if (a.beta1) cfg.beta1 = *a.beta1;
  if (a.beta2) cfg.beta2 = *a.beta2;
  if (a.clip_norm) cfg.clip_norm = *a.clip_norm;
  if (a.init) cfg.init = init_scheme_from_string(*a.init);
  if (a.disc_layers) cfg.disc_layers = *a.disc_layers;
  if (a.split) cfg.train_fraction = parse_split(*a.split);
  cfg.validate();

  const std::string input = !a.input.empty() ? a.input : file.value("input", std::string{});
  if (input.empty()) throw UsageError("train needs --input (or \"input\" in the config file)");
  if (a.out.empty()) throw UsageError("train needs --out");
  const std::string asset = !a.asset.empty() ? a.asset : file.value("asset", fs::path(input).stem().string());
  const std::string period = !a.period.empty() ? a.period : file.value("period", std::string{});
  const fs::path out = a.out;
  fs::create_directories(out);

  const auto prep = prepare_series(input, asset, period);
  write_file(out / "rejects.csv", rejects_csv(prep.rejects));
  const auto closes = prep.series.closes();
  const auto train_len = std::min(
      closes.size(), static_cast<std::size_t>(std::floor(static_cast<double>(closes.size()) * cfg.train_fraction)));
  const std::span<const double> train_closes(closes.data(), train_len);
  if (train_closes.size() <= cfg.condition_dim) {
    throw DataError("training segment has " + std::to_string(train_closes.size()) +
                    " closes; need more than the condition window " + std::to_string(cfg.condition_dim));
  }
  const auto scaler = fit(train_closes);
  const auto pairs = make_pairs(transform(train_closes, scaler), cfg.condition_dim);
  const std::size_t batches = pairs.size() / cfg.batch_size;

  json manifest = {
      {"command", "train"},
      {"input", fs::absolute(input).lexically_normal().string()},
      {"asset", asset},
      {"period", period},
      {"train_config", config_to_json(cfg)},
      {"filled_defaults",
       {{"init", std::string(to_string(cfg.init)) + " matrices, zero biases"},
        {"noise", "standard normal, one draw per sample fed at every LSTM step"},
        {"epsilon", cfg.epsilon},
        {"clip_norm", cfg.clip_norm},
        {"shuffle", "pairs reshuffled each epoch from a seeded mt19937_64; trailing partial batch dropped"},
        {"seed", cfg.seed},
        {"discriminator_hidden_activation", "relu"},
        {"scaler", "population standard deviation, fitted on the training closes"}}},
      {"data",
       {{"rows_read", prep.rows_read},
        {"rejected_rows", prep.rejects.size()},
        {"bars", closes.size()},
        {"training_bars", train_len},
        {"pairs", pairs.size()},
        {"batches_per_epoch", batches}}},
      {"scaler", {{"mean", num(scaler.mean)}, {"stddev", num(scaler.stddev)}, {"n_fitted", scaler.n_fitted}}},
      {"outputs", {"model.ckpt", "losses.csv", "losses_batch.csv", "rejects.csv", "manifest.json"}},
  };

  auto persist = [&](const Checkpoint& ckpt, const std::string& status) {
    save_checkpoint(out / "model.ckpt", ckpt);
    write_file(out / "losses.csv", losses_csv(ckpt.history));
    write_file(out / "losses_batch.csv", batch_losses_csv(ckpt.history, std::max<std::size_t>(batches, 1)));
    manifest["status"] = status;
    manifest["epochs_completed"] = ckpt.epoch;
    write_file(out / "manifest.json", manifest.dump(2) + "\n");
  };

  TrainCallbacks callbacks;
  callbacks.on_epoch = [&](const Checkpoint& c) {
    std::fprintf(stderr, "epoch %zu/%zu  L_D %.6f  L_G %.6f\n", c.epoch, c.config.epochs, c.history.epoch_d.back(),
                 c.history.epoch_g.back());
  };
  try {
    const auto ckpt = train(cfg, pairs, scaler, callbacks);
    persist(ckpt, "completed");
  } catch (const TrainAborted& e) {
    persist(e.last_good(), std::string("aborted: ") + e.what());
    throw;
  }
  std::printf("trained %zu epochs on %zu pairs -> %s\n", cfg.epochs, pairs.size(), out.string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string checkpoint;
  std::string input;
  std::string out;
  std::string mode = "conditioned";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> split;
};

int cmd_generate(const GenerateArgs& a) {
  const auto ckpt = load_checkpoint(fs::path(a.checkpoint));
  const auto mode = synthesis_mode_from_string(a.mode);
  std::uint64_t seed = ckpt.config.seed;
  if (auto s = env_seed()) seed = *s;
  if (a.seed) seed = *a.seed;
  const double fraction = a.split ? parse_split(*a.split) : ckpt.config.train_fraction;

  const auto prep = prepare_series(a.input, "", "");
  const auto closes = prep.series.closes();
  const auto generated = synthesize_series(ckpt, closes, mode, seed);
  const std::size_t d = ckpt.config.condition_dim;
  // With a holdout split only the rows after the training segment are emitted.
  const std::size_t first =
      fraction < 1.0 ? std::max(d, static_cast<std::size_t>(std::floor(static_cast<double>(closes.size()) * fraction)))
                     : d;
  if (first >= closes.size()) throw DataError("holdout segment is empty");

  std::string csv = "timestamp,real_close,generated_close\n";
  for (std::size_t t = first; t < closes.size(); ++t) {
    csv += format_timestamp(prep.series.bars[t].timestamp, prep.series.timestamp_format) + ',' + num(closes[t]) + ',' +
           num(generated[t - d]) + '\n';
  }
  const fs::path out = fs::path(a.out) / "generated.csv";
  write_file(out, csv);
  std::printf("%zu %s rows -> %s\n", closes.size() - first, std::string(to_string(mode)).c_str(),
              out.string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string input;
  std::string checkpoint;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const fs::path input = a.input;
  const auto table = read_table(input);
  const auto real = table.numbers("real_close", input);
  const auto gen = table.numbers("generated_close", input);

  // Normalized scale uses the model's own scaler when available; otherwise the
  // real column is standardized and the same transform is applied to both.
  ScalerParams scaler;
  std::string scaler_source;
  if (!a.checkpoint.empty()) {
    scaler = load_checkpoint(fs::path(a.checkpoint)).scaler;
    scaler_source = "checkpoint";
  } else {
    scaler = fit(real);
    scaler_source = "fitted on real_close";
  }
  const auto original = evaluate(real, gen, MetricScale::original);
  const auto normalized = evaluate(transform(real, scaler), transform(gen, scaler), MetricScale::normalized);

  json report = {
      {"n", original.n},
      {"original", to_json(original)},
      {"normalized", to_json(normalized)},
      {"scaler", {{"mean", num(scaler.mean)}, {"stddev", num(scaler.stddev)}, {"source", scaler_source}}},
  };
  const fs::path out = (a.out.empty() ? input.parent_path() : fs::path(a.out)) / "metrics.json";
  write_file(out, report.dump(2) + "\n");
  for (const auto* r : {&original, &normalized}) {
    std::printf("%-10s  pearson %.6f  spearman %.6f  mae %.6g  rmse %.6g  n %zu\n",
                std::string(to_string(r->scale)).c_str(), r->pearson, r->spearman, r->mae, r->rmse, r->n);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// plot

struct PlotArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::size_t window = 1000;
};

int cmd_plot(const PlotArgs& a) {
  if (a.window == 0) throw UsageError("--window must be positive");
  for (const auto& name : a.inputs) {
    const fs::path input = name;
    const auto table = read_table(input);
    const fs::path dir = a.out.empty() ? input.parent_path() : fs::path(a.out);
    if (table.has("loss_d") && table.has("loss_g")) {
      const std::vector<PlotPanel> panels{
          {"Training loss", {{"G", "#d62728", table.numbers("loss_g", input)},
                             {"D", "#1f77b4", table.numbers("loss_d", input)}}}};
      write_file(dir / "losses.svg", render_svg(panels));
      std::printf("%s -> %s\n", input.string().c_str(), (dir / "losses.svg").string().c_str());
    } else if (table.has("real_close") && table.has("generated_close")) {
      const auto real = table.numbers("real_close", input);
      const auto gen = table.numbers("generated_close", input);
      const std::size_t w = std::min(a.window, real.size());
      const std::vector<PlotPanel> panels{
          {"Real vs generated (all " + std::to_string(real.size()) + " samples)",
           {{"real", "#1f77b4", real}, {"generated", "#ff7f0e", gen}}},
          {"First " + std::to_string(w) + " samples",
           {{"real", "#1f77b4", {real.begin(), real.begin() + static_cast<std::ptrdiff_t>(w)}},
            {"generated", "#ff7f0e", {gen.begin(), gen.begin() + static_cast<std::ptrdiff_t>(w)}}}}};
      write_file(dir / "overlay.svg", render_svg(panels));
      std::printf("%s -> %s\n", input.string().c_str(), (dir / "overlay.svg").string().c_str());
    } else {
      throw DataError("'" + input.string() + "' is neither a losses file nor a generated series");
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gradcheck

int cmd_gradcheck(const GradcheckOptions& options) {
  const auto report = run_gradcheck(options);
  print_report(std::cout, report);
  return report.passed() ? kExitOk : kExitNumeric;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string input;
  std::string out;
  std::string asset;
  std::string period;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const fs::path input = a.input;
  const std::string asset = a.asset.empty() ? input.stem().string() : a.asset;
  const auto prep = prepare_series(input, asset, a.period);
  const auto profile = volatility_profile(prep.series);
  std::ostringstream csv;
  write_volatility_csv(csv, profile);
  const fs::path out = (a.out.empty() ? input.parent_path() : fs::path(a.out)) / "volatility.csv";
  write_file(out, csv.str());

  std::printf("asset %s  period %s\n", asset.c_str(), a.period.empty() ? "-" : a.period.c_str());
  std::printf("days %zu  daily changes %zu  rejected rows %zu\n", profile.changes.size() + 1, profile.changes.size(),
              prep.rejects.size());
  std::printf("min %+.4f%%  max %+.4f%%  variance %.6g\n", profile.min_change, profile.max_change, profile.variance);
  std::printf("-> %s\n", out.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional GAN for minute-level closing prices"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Fit generator and discriminator on a price CSV");
  train_cmd->add_option("--config", ta.config, "JSON config (a previous manifest.json works)");
  train_cmd->add_option("--input", ta.input, "Price CSV with timestamp and close columns");
  train_cmd->add_option("--out", ta.out, "Run directory");
  train_cmd->add_option("--asset", ta.asset, "Asset label (default: input file stem)");
  train_cmd->add_option("--period", ta.period, "Period label");
  train_cmd->add_option("--seed", ta.seed, "RNG seed (fallback: TSGAN_SEED)");
  train_cmd->add_option("--epochs", ta.epochs, "Epochs E (default 50)");
  train_cmd->add_option("--batch-size", ta.batch_size, "Batch size k (default 64)");
  train_cmd->add_option("--noise-dim", ta.noise_dim, "Noise dimension l (default 8)");
  train_cmd->add_option("--cond-dim", ta.cond_dim, "Condition window d (default 60)");
  train_cmd->add_option("--hidden", ta.hidden, "Generator LSTM width (default 64)");
  train_cmd->add_option("--lr", ta.lr, "Adam learning rate (default 2e-4)");
  train_cmd->add_option("--beta1", ta.beta1, "Adam beta1 (default 0.5)");
  train_cmd->add_option("--beta2", ta.beta2, "Adam beta2 (default 0.999)");
  train_cmd->add_option("--clip-norm", ta.clip_norm, "Global gradient-norm clip, <= 0 disables (default 5)");
  train_cmd->add_option("--init", ta.init, "Initialization: uniform-xavier or zeros");
  train_cmd->add_option("--disc-layers", ta.disc_layers, "Discriminator hidden widths (default 128 64 32)");
  train_cmd->add_option("--split", ta.split, "Train on this chronological fraction (bare flag: 0.8)")
      ->expected(0, 1);

  GenerateArgs ga;
  auto* gen_cmd = app.add_subcommand("generate", "Synthesize a price series from a checkpoint");
  gen_cmd->add_option("--checkpoint", ga.checkpoint, "model.ckpt from a training run")->required();
  gen_cmd->add_option("--input", ga.input, "Price CSV supplying conditions and real closes")->required();
  gen_cmd->add_option("--out", ga.out, "Output directory for generated.csv")->required();
  gen_cmd->add_option("--mode", ga.mode, "conditioned or recursive")
      ->check(CLI::IsMember({"conditioned", "recursive"}));
  gen_cmd->add_option("--seed", ga.seed, "Noise seed (default: the training seed)");
  gen_cmd->add_option("--split", ga.split, "Emit only rows after this fraction (default: the training split)")
      ->expected(0, 1);

  EvaluateArgs ea;
  auto* eval_cmd = app.add_subcommand("evaluate", "Pearson, Spearman, MAE and RMSE of generated.csv");
  eval_cmd->add_option("--input", ea.input, "generated.csv")->required();
  eval_cmd->add_option("--checkpoint", ea.checkpoint, "Use this model's scaler for the normalized scale");
  eval_cmd->add_option("--out", ea.out, "Output directory for metrics.json (default: next to input)");

  PlotArgs pa;
  auto* plot_cmd = app.add_subcommand("plot", "Render losses.csv and/or generated.csv as SVG");
  plot_cmd->add_option("--input", pa.inputs, "losses.csv or generated.csv (repeatable)")->required();
  plot_cmd->add_option("--out", pa.out, "Output directory (default: next to each input)");
  plot_cmd->add_option("--window", pa.window, "Length of the close-up panel (default 1000)");

  GradcheckOptions go;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  gc_cmd->add_option("--seed", go.seed, "RNG seed (default 1)");
  gc_cmd->add_option("--trials", go.trials, "Random trials per block (default 100)");
  gc_cmd->add_option("--corrupt", go.corrupt_block, "Perturb this block's analytic gradient")->group("");

  AnalyzeArgs aa;
  auto* analyze_cmd = app.add_subcommand("analyze", "Daily percent-change volatility profile");
  analyze_cmd->add_option("--input", aa.input, "Price CSV")->required();
  analyze_cmd->add_option("--out", aa.out, "Output directory for volatility.csv (default: next to input)");
  analyze_cmd->add_option("--asset", aa.asset, "Asset label (default: input file stem)");
  analyze_cmd->add_option("--period", aa.period, "Period label");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(ta);
    if (*gen_cmd) return cmd_generate(ga);
    if (*eval_cmd) return cmd_evaluate(ea);
    if (*plot_cmd) return cmd_plot(pa);
    if (*gc_cmd) {
      if (!gc_cmd->count("--seed")) {
        if (auto s = env_seed()) go.seed = *s;
      }
      return cmd_gradcheck(go);
    }
    if (*analyze_cmd) return cmd_analyze(aa);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
