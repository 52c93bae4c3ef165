#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lem/analytics.hpp"
#include "lem/codec.hpp"
#include "lem/eval.hpp"
#include "lem/ingest.hpp"
#include "lem/model.hpp"
#include "lem/simulator.hpp"
#include "lem/svg.hpp"
#include "lem/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Every artifact-producing run leaves a config echo next to its outputs.
void write_config_echo(const std::string& out_path, const std::string& command,
                       const json& resolved) {
  json j;
  j["command"] = command;
  j["config"] = resolved;
  j["version"] = lem::kVersion;
  fs::path base(out_path);
  const fs::path echo = fs::is_directory(base) ? base / "config_echo.json"
                                               : base.parent_path() /
                                                     (base.filename().string() + ".config.json");
  std::ofstream out(echo);
  if (!out) throw lem::IoError("cannot write config echo: " + echo.string());
  out << j.dump(2) << "\n";
}

std::vector<lem::Event> find_match(const std::vector<lem::MatchEvents>& matches,
                                   std::int64_t match_id) {
  for (const auto& m : matches) {
    if (m.match_id == match_id) return m.events;
  }
  throw lem::DataError("match " + std::to_string(match_id) + " not found in match file");
}

json hidden_json(const std::vector<int>& hidden) {
  return json(hidden);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large Event Model for soccer: training, simulation and analytics"};
  app.require_subcommand(1);

  int threads = lem::default_threads();
  std::uint64_t seed = 0;
  app.add_option("--threads", threads, "Worker threads (results do not depend on this)");
  app.add_option("--seed", seed, "Global RNG seed");

  // ---- ingest ----
  auto* cmd_ingest = app.add_subcommand("ingest", "Parse Wyscout JSON into canonical CSVs");
  std::string in_events, in_matches, out_dir;
  std::string vocab_path;
  cmd_ingest->add_option("--events", in_events, "Directory with events_<League>.json")
      ->required();
  cmd_ingest->add_option("--matches", in_matches, "Directory with matches_<League>.json")
      ->required();
  cmd_ingest->add_option("--out", out_dir, "Output directory")->required();
  cmd_ingest->add_option("--vocab", vocab_path, "Vocabulary JSON (default: built-in)");

  // ---- train ----
  auto* cmd_train = app.add_subcommand("train", "Train a model on a canonical CSV");
  std::string train_data, train_out;
  int k = 1;
  std::vector<int> hidden = {512, 512, 512};
  lem::TrainConfig tc;
  bool save_epochs = false;
  cmd_train->add_option("--data", train_data, "Canonical events CSV")->required();
  cmd_train->add_option("--k", k, "Context length in events")->check(CLI::PositiveNumber);
  cmd_train->add_option("--hidden", hidden, "Hidden layer widths")->delimiter(',');
  cmd_train->add_option("--epochs", tc.epochs, "Training epochs");
  cmd_train->add_option("--lr", tc.lr0, "Initial learning rate (cosine-annealed)");
  cmd_train->add_option("--batch", tc.batch_size, "Minibatch size");
  cmd_train->add_option("--out", train_out, "Checkpoint path")->required();
  cmd_train->add_option("--vocab", vocab_path, "Vocabulary JSON (default: built-in)");
  cmd_train->add_flag("--save-epochs", save_epochs, "Also write a checkpoint per epoch");

  // ---- eval ----
  auto* cmd_eval = app.add_subcommand("eval", "Teacher-forced metrics on a test CSV");
  std::string eval_model, eval_data, eval_report, baseline_train;
  bool use_median = false;
  cmd_eval->add_option("--model", eval_model, "Checkpoint")->required();
  cmd_eval->add_option("--data", eval_data, "Canonical events CSV")->required();
  cmd_eval->add_option("--report", eval_report, "Report JSON path")->required();
  cmd_eval->add_option("--baseline-train", baseline_train,
                       "Also compute the majority/mean baseline fitted on this CSV");
  cmd_eval->add_flag("--median", use_median,
                     "Use the masked-distribution median instead of the mean");

  // ---- simulate ----
  auto* cmd_sim = app.add_subcommand("simulate", "Batched match rollouts");
  std::string sim_model, sim_from = "kickoff", sim_out;
  std::int64_t sim_n = 1;
  std::int64_t max_events = 4000;
  cmd_sim->add_option("--model", sim_model, "Checkpoint")->required();
  cmd_sim->add_option("--from", sim_from, "kickoff or a STATE.json path");
  cmd_sim->add_option("--n", sim_n, "Number of rollouts")->check(CLI::PositiveNumber);
  cmd_sim->add_option("--max-events", max_events, "Per-rollout event cap")
      ->check(CLI::PositiveNumber);
  cmd_sim->add_option("--out", sim_out, "Output JSONL path")->required();

  // ---- xg-map ----
  auto* cmd_xg = app.add_subcommand("xg-map", "Situational expected-goals map");
  std::string xg_model, xg_context, xg_out;
  std::int64_t xg_shots = 1000000;
  bool xg_svg = false;
  cmd_xg->add_option("--model", xg_model, "Checkpoint")->required();
  cmd_xg->add_option("--context", xg_context, "JSON array of context events")->required();
  cmd_xg->add_option("--shots", xg_shots, "Simulated shots")->check(CLI::PositiveNumber);
  cmd_xg->add_option("--out", xg_out, "Output CSV path")->required();
  cmd_xg->add_flag("--svg", xg_svg, "Also write a heatmap SVG next to the CSV");

  // ---- momentum ----
  auto* cmd_mom = app.add_subcommand("momentum", "Short-term momentum series for a match");
  std::string mom_model, mom_file, mom_out;
  std::int64_t mom_match = 0, mom_sims = 100;
  int horizon = 10;
  double smoothing = 0.9;
  bool mom_svg = false;
  cmd_mom->add_option("--model", mom_model, "Checkpoint")->required();
  cmd_mom->add_option("--match-file", mom_file, "Canonical events CSV")->required();
  cmd_mom->add_option("--match-id", mom_match, "Match id inside the CSV")->required();
  cmd_mom->add_option("--horizon", horizon, "Events per lookahead")->check(CLI::PositiveNumber);
  cmd_mom->add_option("--sims", mom_sims, "Simulations per event")->check(CLI::PositiveNumber);
  cmd_mom->add_option("--smoothing", smoothing, "EWMA factor in [0,1)");
  cmd_mom->add_option("--out", mom_out, "Output CSV path")->required();
  cmd_mom->add_flag("--svg", mom_svg, "Also write a series SVG next to the CSV");

  // ---- winprob ----
  auto* cmd_win = app.add_subcommand("winprob", "In-game outcome probabilities for a match");
  std::string win_model, win_file, win_out, markets = "1x2,ou2.5";
  std::int64_t win_match = 0, win_sims = 200;
  bool win_svg = false;
  cmd_win->add_option("--model", win_model, "Checkpoint")->required();
  cmd_win->add_option("--match-file", win_file, "Canonical events CSV")->required();
  cmd_win->add_option("--match-id", win_match, "Match id inside the CSV")->required();
  cmd_win->add_option("--sims", win_sims, "Simulations per event")->check(CLI::PositiveNumber);
  cmd_win->add_option("--markets", markets, "Comma list from {1x2, ou2.5}");
  cmd_win->add_option("--out", win_out, "Output CSV path")->required();
  cmd_win->add_flag("--svg", win_svg, "Also write a series SVG next to the CSV");

  // ---- vaep ----
  auto* cmd_vaep = app.add_subcommand("vaep", "Action values for a match");
  std::string vaep_model, vaep_file, vaep_out, variant = "st10";
  std::int64_t vaep_match = 0, vaep_sims = 200;
  cmd_vaep->add_option("--model", vaep_model, "Checkpoint")->required();
  cmd_vaep->add_option("--match-file", vaep_file, "Canonical events CSV")->required();
  cmd_vaep->add_option("--match-id", vaep_match, "Match id inside the CSV")->required();
  cmd_vaep->add_option("--variant", variant, "st10 | ltinf | ltinf0")
      ->check(CLI::IsMember({"st10", "ltinf", "ltinf0"}));
  cmd_vaep->add_option("--sims", vaep_sims, "Simulations per state")->check(CLI::PositiveNumber);
  cmd_vaep->add_option("--out", vaep_out, "Output CSV path")->required();

  // ---- bench ----
  auto* cmd_bench = app.add_subcommand("bench", "Generation throughput of checkpoints");
  std::vector<std::string> bench_models;
  std::int64_t bench_n = 64;
  std::string bench_out;
  cmd_bench->add_option("--models", bench_models, "Checkpoints; first is the reference")
      ->required()
      ->delimiter(',');
  cmd_bench->add_option("--n", bench_n, "Rollouts per model")->check(CLI::PositiveNumber);
  cmd_bench->add_option("--out", bench_out, "Report JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const lem::Vocab vocab =
        vocab_path.empty() ? lem::Vocab::builtin() : lem::Vocab::load(vocab_path);

    if (*cmd_ingest) {
      fs::create_directories(out_dir);
      lem::IngestReport report;
      const lem::Corpus corpus =
          lem::ingest_directories(in_events, in_matches, vocab, &report);
      const lem::Split split = lem::split_dataset(corpus.matches, &report);
      lem::write_events_csv((fs::path(out_dir) / "train.csv").string(), split.train, vocab);
      lem::write_events_csv((fs::path(out_dir) / "test.csv").string(), split.test, vocab);
      vocab.save((fs::path(out_dir) / "vocab.json").string());

      {
        std::ofstream freq(fs::path(out_dir) / "type_frequencies.csv");
        freq << "eventType,count\n";
        for (const auto& [name, count] : lem::type_frequencies(split.train, vocab)) {
          freq << name << ',' << count << '\n';
        }
      }
      const lem::CorpusStats train_stats = lem::corpus_stats(split.train);
      const lem::CorpusStats test_stats = lem::corpus_stats(split.test);
      json stats;
      stats["train"] = {{"matches", train_stats.n_matches},
                        {"mean_events_per_match", train_stats.mean_events_per_match},
                        {"mean_goals_per_match", train_stats.mean_goals_per_match}};
      stats["test"] = {{"matches", test_stats.n_matches},
                       {"mean_events_per_match", test_stats.mean_events_per_match},
                       {"mean_goals_per_match", test_stats.mean_goals_per_match}};
      std::ofstream(fs::path(out_dir) / "corpus_stats.json") << stats.dump(2) << "\n";
      if (!report.warnings.empty()) {
        std::ofstream warn(fs::path(out_dir) / "warnings.log");
        for (const auto& w : report.warnings) warn << w << '\n';
        std::cerr << report.warnings.size() << " ingest warnings (see warnings.log)\n";
      }
      write_config_echo(out_dir, "ingest",
                        json{{"events", in_events},
                             {"matches", in_matches},
                             {"out", out_dir},
                             {"seed", seed},
                             {"threads", threads}});
      std::cout << "ingested " << corpus.matches.size() << " matches (train "
                << split.train.size() << ", test " << split.test.size() << ")\n";
      return 0;
    }

    if (*cmd_train) {
      const auto matches = lem::read_events_csv(train_data, vocab);
      lem::ModelConfig mc;
      mc.k = k;
      mc.hidden_sizes = hidden;
      mc.seed = seed;
      tc.seed = seed;
      tc.threads = threads;
      const lem::PairSet pairs = lem::make_pairs_corpus(matches, k, vocab);
      std::cout << "training on " << pairs.size() << " pairs from " << matches.size()
                << " matches\n";
      lem::EpochCallback cb;
      if (save_epochs) {
        cb = [&](int epoch, const lem::Model& m, const lem::EpochStats& st) {
          m.save(train_out + ".epoch" + std::to_string(epoch));
          std::printf("epoch %3d  lr %.6g  loss %.6f  (%.1fs)\n", epoch, st.lr, st.mean_loss,
                      st.duration_s);
        };
      } else {
        cb = [](int epoch, const lem::Model&, const lem::EpochStats& st) {
          std::printf("epoch %3d  lr %.6g  loss %.6f  (%.1fs)\n", epoch, st.lr, st.mean_loss,
                      st.duration_s);
        };
      }
      const lem::TrainResult result = lem::train(pairs, mc, tc, vocab, cb);
      result.model.save(train_out);
      lem::write_train_log(train_out + ".log.csv", result.history);
      write_config_echo(train_out, "train",
                        json{{"data", train_data},
                             {"k", k},
                             {"hidden", hidden_json(hidden)},
                             {"epochs", tc.epochs},
                             {"lr", tc.lr0},
                             {"batch", tc.batch_size},
                             {"seed", seed},
                             {"threads", threads}});
      std::cout << "saved " << train_out << " (" << lem::param_count(mc) << " parameters)\n";
      return 0;
    }

    if (*cmd_eval) {
      const lem::Model model = lem::Model::load(eval_model);
      const auto test = lem::read_events_csv(eval_data, model.vocab());
      const lem::MetricsReport report =
          lem::evaluate(model, test, model.config().k, model.vocab(),
                        use_median ? lem::PointEstimate::Median : lem::PointEstimate::Mean,
                        threads);
      json echo{{"model", eval_model},
                {"data", eval_data},
                {"median", use_median},
                {"seed", seed},
                {"threads", threads}};
      json out;
      out["variables"] = json::parse(report.to_json());
      if (!baseline_train.empty()) {
        const auto train_matches = lem::read_events_csv(baseline_train, model.vocab());
        const lem::MetricsReport bl = lem::baseline(train_matches, test, model.vocab());
        out["baseline"] = json::parse(bl.to_json());
        echo["baseline_train"] = baseline_train;
      }
      out["config"] = echo;
      out["version"] = lem::kVersion;
      std::ofstream f(eval_report);
      if (!f) throw lem::IoError("cannot write report: " + eval_report);
      f << out.dump(2) << "\n";
      write_config_echo(eval_report, "eval", echo);
      std::cout << "wrote " << eval_report << "\n";
      return 0;
    }

    if (*cmd_sim) {
      const lem::Model model = lem::Model::load(sim_model);
      const int mk = model.config().k;
      const lem::GameState start =
          sim_from == "kickoff" ? lem::GameState::kickoff(mk)
                                : lem::load_state_json(sim_from, mk, model.vocab());
      lem::BatchOptions opts;
      opts.max_events = max_events;
      opts.threads = threads;
      const auto rollouts = lem::batch_rollout(start, model, sim_n, seed, opts);
      lem::write_rollouts_jsonl(sim_out, rollouts, model.vocab());

      std::int64_t truncated = 0, events = 0, premature = 0;
      for (const auto& r : rollouts) {
        truncated += r.truncated ? 1 : 0;
        events += r.n_events;
        premature += static_cast<std::int64_t>(r.diag.premature_game_over);
      }
      write_config_echo(sim_out, "simulate",
                        json{{"model", sim_model},
                             {"from", sim_from},
                             {"n", sim_n},
                             {"max_events", max_events},
                             {"seed", seed},
                             {"threads", threads}});
      std::printf("%lld rollouts, %.1f events/rollout, %lld truncated, %lld premature game-overs\n",
                  static_cast<long long>(sim_n),
                  static_cast<double>(events) / static_cast<double>(sim_n),
                  static_cast<long long>(truncated), static_cast<long long>(premature));
      return 0;
    }

    if (*cmd_xg) {
      const lem::Model model = lem::Model::load(xg_model);
      const auto context = lem::load_context_json(xg_context, model.vocab());
      const lem::XgMap map = lem::xg_map(context, model, model.vocab(), xg_shots, seed, threads);
      lem::write_matrix_csv(xg_out, map.goal_fraction);
      if (xg_svg) {
        lem::write_heatmap_svg(xg_out + ".svg", map.goal_fraction, "simulated xG");
      }
      write_config_echo(xg_out, "xg-map",
                        json{{"model", xg_model},
                             {"context", xg_context},
                             {"shots", xg_shots},
                             {"seed", seed},
                             {"threads", threads}});
      std::cout << "wrote " << xg_out << "\n";
      return 0;
    }

    if (*cmd_mom) {
      const lem::Model model = lem::Model::load(mom_model);
      const auto events = find_match(lem::read_events_csv(mom_file, model.vocab()), mom_match);
      const auto series = lem::momentum_series(events, model, model.config().k, horizon,
                                               mom_sims, smoothing, seed, threads);
      lem::write_momentum_csv(mom_out, series);
      if (mom_svg) {
        lem::SvgSeries raw{"momentum", "#999999", {}};
        lem::SvgSeries smooth{"smoothed", "#d62728", {}};
        for (const auto& p : series) {
          raw.values.push_back(p.raw);
          smooth.values.push_back(p.smoothed);
        }
        lem::write_series_svg(mom_out + ".svg", {raw, smooth}, -1.0, 1.0, "match momentum");
      }
      write_config_echo(mom_out, "momentum",
                        json{{"model", mom_model},
                             {"match_file", mom_file},
                             {"match_id", mom_match},
                             {"horizon", horizon},
                             {"sims", mom_sims},
                             {"smoothing", smoothing},
                             {"seed", seed},
                             {"threads", threads}});
      std::cout << "wrote " << mom_out << "\n";
      return 0;
    }

    if (*cmd_win) {
      bool want_1x2 = false, want_ou = false;
      std::stringstream ms(markets);
      std::string item;
      while (std::getline(ms, item, ',')) {
        if (item == "1x2") {
          want_1x2 = true;
        } else if (item == "ou2.5") {
          want_ou = true;
        } else {
          throw lem::ConfigError("unknown market: " + item);
        }
      }
      const lem::Model model = lem::Model::load(win_model);
      const auto events = find_match(lem::read_events_csv(win_file, model.vocab()), win_match);
      const auto series =
          lem::winprob_series(events, model, model.config().k, win_sims, seed, 4000, threads);
      lem::write_winprob_csv(win_out, series);
      if (win_svg) {
        std::vector<lem::SvgSeries> svg_series;
        if (want_1x2) {
          lem::SvgSeries h{"home win", "#1f77b4", {}}, d{"draw", "#7f7f7f", {}},
              a{"away win", "#d62728", {}};
          for (const auto& o : series) {
            h.values.push_back(o.p_home_win);
            d.values.push_back(o.p_draw);
            a.values.push_back(o.p_away_win);
          }
          svg_series.insert(svg_series.end(), {h, d, a});
        }
        if (want_ou) {
          lem::SvgSeries over{"over 2.5", "#2ca02c", {}}, under{"under 2.5", "#9467bd", {}};
          for (const auto& o : series) {
            over.values.push_back(o.p_over25);
            under.values.push_back(o.p_under25);
          }
          svg_series.insert(svg_series.end(), {over, under});
        }
        lem::write_series_svg(win_out + ".svg", svg_series, 0.0, 1.0, "in-game probabilities");
      }
      write_config_echo(win_out, "winprob",
                        json{{"model", win_model},
                             {"match_file", win_file},
                             {"match_id", win_match},
                             {"sims", win_sims},
                             {"markets", markets},
                             {"seed", seed},
                             {"threads", threads}});
      std::cout << "wrote " << win_out << "\n";
      return 0;
    }

    if (*cmd_vaep) {
      const lem::Model model = lem::Model::load(vaep_model);
      const auto events = find_match(lem::read_events_csv(vaep_file, model.vocab()), vaep_match);
      const lem::ActionValueVariant av_variant =
          variant == "st10" ? lem::ActionValueVariant::ST10
                            : (variant == "ltinf" ? lem::ActionValueVariant::LTInf
                                                  : lem::ActionValueVariant::LTInfZeroed);
      const auto values = lem::action_values(events, model, model.config().k, av_variant, 10,
                                             vaep_sims, seed, threads);
      lem::write_action_values_csv(vaep_out, values);
      write_config_echo(vaep_out, "vaep",
                        json{{"model", vaep_model},
                             {"match_file", vaep_file},
                             {"match_id", vaep_match},
                             {"variant", variant},
                             {"sims", vaep_sims},
                             {"seed", seed},
                             {"threads", threads}});
      std::cout << "wrote " << vaep_out << "\n";
      return 0;
    }

    if (*cmd_bench) {
      std::vector<lem::Model> models;
      models.reserve(bench_models.size());
      for (const auto& path : bench_models) models.push_back(lem::Model::load(path));
      std::vector<std::pair<std::string, const lem::TokenModel*>> refs;
      for (std::size_t i = 0; i < models.size(); ++i) {
        refs.emplace_back(bench_models[i], &models[i]);
      }
      const auto table = lem::bench_inference(refs, bench_n, seed, threads);
      json out = json::array();
      for (const auto& e : table) {
        out.push_back({{"model", e.name},
                       {"events_per_s", e.events_per_second},
                       {"ratio_vs_k1", e.ratio_vs_first}});
      }
      std::ofstream f(bench_out);
      if (!f) throw lem::IoError("cannot write bench report: " + bench_out);
      f << out.dump(2) << "\n";
      write_config_echo(bench_out, "bench",
                        json{{"models", bench_models}, {"n", bench_n}, {"seed", seed},
                             {"threads", threads}});
      std::cout << "wrote " << bench_out << "\n";
      return 0;
    }
  } catch (const lem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const lem::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
