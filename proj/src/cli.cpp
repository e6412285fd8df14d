#include "ssmprune/cli.hpp"

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ssmprune/io.hpp"
#include "ssmprune/synth.hpp"

namespace ssmprune {

namespace {

struct Common {
  std::string model;
  std::string out;
  bool no_discretize = false;
};

struct ScoringFlags {
  std::string method = "aire";
  std::string policy;  // empty: method default
  double epsilon = kDefaultEpsilon;
  std::uint64_t seed = 0;
};

void add_model_flags(CLI::App* cmd, Common& c, bool need_model = true) {
  auto* opt = cmd->add_option("--model", c.model, "Model directory or manifest path");
  if (need_model) opt->required();
  cmd->add_option("--out", c.out, "Output path (stdout when omitted)");
  cmd->add_flag("--no-discretize", c.no_discretize, "Keep continuous-time layers as stored");
}

void add_scoring_flags(CLI::App* cmd, ScoringFlags& s) {
  cmd->add_option("--method", s.method, "Scoring method")
      ->check(CLI::IsMember({"aire", "last", "lamp", "hinf", "magnitude", "random"}));
  cmd->add_option("--policy", s.policy, "Selection policy (default depends on method)")
      ->check(CLI::IsMember({"uniform", "global", "prefix"}));
  cmd->add_option("--epsilon", s.epsilon, "Prefix-normalization epsilon")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", s.seed, "Seed for random scores");
}

Scope resolve_scope(const ScoringFlags& s) {
  const Method m = method_from_string(s.method);
  const Scope scope = s.policy.empty() ? default_scope(m) : scope_from_string(s.policy);
  check_compatible(m, scope);
  return scope;
}

ModelStack load(const Common& c, std::ostream& err) {
  std::vector<std::string> warnings;
  LoadOptions lo;
  lo.discretize = !c.no_discretize;
  ModelStack stack = load_model(c.model, lo, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  return stack;
}

void emit(const json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << "\n";
  } else {
    write_json(path, j);
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-based state pruning for diagonal state-space models", "ssmprune"};
  app.require_subcommand(1);

  Common common;
  ScoringFlags scoring;

  // score
  auto* score_cmd = app.add_subcommand("score", "Compute per-mode importance scores");
  add_model_flags(score_cmd, common);
  add_scoring_flags(score_cmd, scoring);

  // select
  std::string scores_path;
  std::optional<double> ratio, threshold;
  int layer_floor = 0;
  auto* select_cmd = app.add_subcommand("select", "Choose kept/pruned modes under a budget or threshold");
  add_model_flags(select_cmd, common, false);
  add_scoring_flags(select_cmd, scoring);
  select_cmd->add_option("--scores", scores_path, "Score file from `score` (instead of --model)");
  auto* ratio_opt = select_cmd->add_option("--ratio", ratio, "Fraction of modes to prune")->check(CLI::Range(0.0, 1.0));
  auto* thr_opt = select_cmd->add_option("--threshold", threshold, "Explicit global threshold tau");
  ratio_opt->excludes(thr_opt);
  select_cmd->add_option("--layer-floor", layer_floor, "Minimum kept modes per layer")->check(CLI::IsMember({0, 1}));

  // apply
  std::string decision_path;
  auto* apply_cmd = app.add_subcommand("apply", "Materialize a decision into a reduced model");
  add_model_flags(apply_cmd, common);
  apply_cmd->add_option("--decision", decision_path, "Decision file")->required();
  bool inline_arrays = false;
  apply_cmd->add_flag("--inline", inline_arrays, "Store arrays inline in the manifest");

  // evaluate
  std::string reduced_path;
  DistortionOptions dopts;
  auto* eval_cmd = app.add_subcommand("evaluate", "Distortion of a pruned model against the full one");
  add_model_flags(eval_cmd, common);
  auto* dec_opt = eval_cmd->add_option("--decision", decision_path, "Decision file");
  auto* red_opt = eval_cmd->add_option("--reduced", reduced_path, "Reduced model directory");
  dec_opt->excludes(red_opt);
  eval_cmd->add_option("--horizon", dopts.horizon, "Impulse-response horizon")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--grid-points", dopts.grid_points, "Frequency grid size (0: automatic)")->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--mc-steps", dopts.mc_steps, "Monte-Carlo steps per trial (0: off)")->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--mc-trials", dopts.mc_trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", dopts.seed, "Monte-Carlo seed");

  // certify
  CertifyOptions copts;
  std::vector<double> lipschitz;
  auto* cert_cmd = app.add_subcommand("certify", "Worst-case error certificates for a decision");
  add_model_flags(cert_cmd, common);
  cert_cmd->add_option("--decision", decision_path, "Decision file")->required();
  cert_cmd->add_option("--grid-points", copts.grid_points, "Frequency grid size (0: automatic)")->check(CLI::NonNegativeNumber);
  cert_cmd->add_option("--lipschitz", lipschitz, "Per-layer Lipschitz constants for the stack bound")->delimiter(',');

  // sweep
  std::vector<double> ratios{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  SweepOptions sopts;
  auto* sweep_cmd = app.add_subcommand("sweep", "Distortion and certificates over a list of ratios");
  add_model_flags(sweep_cmd, common);
  add_scoring_flags(sweep_cmd, scoring);
  sweep_cmd->add_option("--ratios", ratios, "Comma-separated prune ratios")->delimiter(',')->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--layer-floor", sopts.layer_floor, "Minimum kept modes per layer")->check(CLI::IsMember({0, 1}));
  sweep_cmd->add_option("--horizon", sopts.horizon, "Impulse-response horizon")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--grid-points", sopts.grid_points, "Frequency grid size (0: automatic)")->check(CLI::NonNegativeNumber);

  // report
  std::string report_input;
  auto* report_cmd = app.add_subcommand("report", "Render a sweep file as a table and CSV");
  report_cmd->add_option("--input", report_input, "Sweep file")->required();
  report_cmd->add_option("--out", common.out, "CSV output path");

  // synth
  SynthOptions synth_opts;
  std::string structure = "mimo";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a random stable model");
  synth_cmd->set_help_flag("--help", "Print this help message and exit");
  synth_cmd->add_option("--out", common.out, "Output model directory")->required();
  synth_cmd->add_option("--seed", synth_opts.seed, "Random seed");
  synth_cmd->add_option("--layers", synth_opts.num_layers, "Layer count")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--n", synth_opts.modes, "Modes per layer (one value or one per layer)")->delimiter(',');
  synth_cmd->add_option("--h,--channels", synth_opts.channels, "Channels")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--radius-min", synth_opts.radius_min, "Smallest pole radius");
  synth_cmd->add_option("--radius-max", synth_opts.radius_max, "Largest pole radius");
  synth_cmd->add_option("--structure", structure, "mimo or multi_siso")->check(CLI::IsMember({"mimo", "multi_siso"}));
  synth_cmd->add_flag("--conjugate-pairs", synth_opts.conjugate_pairs, "Store one member per conjugate pair");
  synth_cmd->add_flag("--bidirectional", synth_opts.bidirectional, "Add backward output couplings");
  synth_cmd->add_option("--coupling-spread", synth_opts.coupling_spread, "Log-normal spread of output gains");
  synth_cmd->add_flag("--continuous", synth_opts.continuous, "Emit continuous-time parameters");
  synth_cmd->add_flag("--inline", inline_arrays, "Store arrays inline in the manifest");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  try {
    if (score_cmd->parsed()) {
      const Scope scope = resolve_scope(scoring);
      const ModelStack stack = load(common, err);
      const ScoreTable table = score_table(stack, method_from_string(scoring.method), scope,
                                           scoring.epsilon, scoring.seed);
      emit(scores_to_json(table), common.out, out);
    } else if (select_cmd->parsed()) {
      if (common.model.empty() == scores_path.empty()) {
        throw std::invalid_argument("select needs exactly one of --model or --scores");
      }
      if (!ratio && !threshold) throw std::invalid_argument("select needs --ratio or --threshold");
      ScoreTable table;
      if (!scores_path.empty()) {
        table = scores_from_json(read_json(scores_path));
      } else {
        const Scope scope = resolve_scope(scoring);
        table = score_table(load(common, err), method_from_string(scoring.method), scope,
                            scoring.epsilon, scoring.seed);
      }
      SelectionOptions sel;
      sel.ratio = ratio;
      sel.threshold = threshold;
      sel.layer_floor = layer_floor;
      emit(decision_to_json(select(table, sel)), common.out, out);
    } else if (apply_cmd->parsed()) {
      if (common.out.empty()) throw std::invalid_argument("apply needs --out");
      const ModelStack stack = load(common, err);
      const ModelStack reduced = materialize(decision_from_json(read_json(decision_path)), stack);
      save_model(reduced, common.out, inline_arrays);
    } else if (eval_cmd->parsed()) {
      if (decision_path.empty() == reduced_path.empty()) {
        throw std::invalid_argument("evaluate needs exactly one of --decision or --reduced");
      }
      const ModelStack stack = load(common, err);
      std::vector<LayerDistortion> rows;
      if (!decision_path.empty()) {
        rows = distortion(stack, decision_from_json(read_json(decision_path)), dopts);
      } else {
        Common rc = common;
        rc.model = reduced_path;
        rows = distortion(stack, load(rc, err), dopts);
      }
      emit(distortion_to_json(rows), common.out, out);
    } else if (cert_cmd->parsed()) {
      const ModelStack stack = load(common, err);
      const PruneDecision decision = decision_from_json(read_json(decision_path));
      const auto certs = certify(stack, decision, copts);
      const StackBound sb = compose_stack_bound(stack, decision, certs, lipschitz);
      emit(certificates_to_json(certs, &sb), common.out, out);
    } else if (sweep_cmd->parsed()) {
      const Scope scope = resolve_scope(scoring);
      const Method method = method_from_string(scoring.method);
      sopts.epsilon = scoring.epsilon;
      sopts.seed = scoring.seed;
      const ModelStack stack = load(common, err);
      emit(sweep_to_json(sweep(stack, method, scope, ratios, sopts), method, scope), common.out, out);
    } else if (report_cmd->parsed()) {
      const auto rows = sweep_from_json(read_json(report_input));
      out << render_sweep_table(rows);
      if (!common.out.empty()) write_text_atomic(common.out, sweep_to_csv(rows));
    } else if (synth_cmd->parsed()) {
      synth_opts.structure = structure_from_string(structure);
      save_model(synth(synth_opts), common.out, inline_arrays);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::logic_error& e) {
    // invalid_argument, domain_error, out_of_range
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    err << "error: malformed file: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace ssmprune
