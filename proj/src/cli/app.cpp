#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "unilab/cli.hpp"
#include "unilab/error.hpp"
#include "unilab/exponents.hpp"
#include "unilab/mgfnumeric.hpp"
#include "unilab/oracle.hpp"
#include "unilab/statistics.hpp"
#include "unilab/varianceopt.hpp"

namespace unilab::cli {

namespace {

struct Options {
  std::string config_path;
  std::string csv_path;
  std::string svg_path;

  std::string kind = "collisions";
  std::int64_t n = 0;
  std::int64_t m = 0;
  double eps = 0.1;
  double delta = 0.01;
  std::optional<double> delta_minus;
  std::optional<double> delta_plus;
  std::optional<double> tau;
  std::optional<double> beta;
  std::optional<double> threshold;
  double gamma = 0.5;
  double alpha = 1.0;
  double multiplier = 2.0;
  double theta = 0.5;
  int nodes = 0;
  std::string target = "qbar";
  std::string dist = "uniform";

  std::int64_t trials = 20'000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::vector<std::int64_t> n_values{100, 200, 300, 400, 600, 800, 1000, 1500, 2000};
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void emit_rows(std::ostream& out, const std::vector<mc::ExperimentRow>& rows) {
  std::vector<RunRow> converted;
  converted.reserve(rows.size());
  for (const auto& row : rows) converted.push_back(to_run_row(row));
  write_csv(out, converted);
}

StatisticKind parse_kind(const Options& o, std::int64_t n, std::int64_t m, double eps) {
  if (o.kind == "huber") {
    return StatisticKind::huber(o.beta ? *o.beta : default_beta(n, m, eps, o.multiplier).beta);
  }
  return kind_from_name(o.kind);
}

void cmd_run(const Options& o, std::ostream& out) {
  const auto config = parse_config_text(read_file(o.config_path));
  emit_rows(out, mc::run_experiment(plan_from_config(config)));
}

void cmd_plot(const Options& o) {
  const auto text = read_file(o.csv_path);
  std::istringstream in(text);
  const auto rows = text.empty() ? std::vector<RunRow>{} : read_csv(in);
  if (rows.empty()) fail(ErrorCode::kInvalidParameter, "CSV '" + o.csv_path + "' has no rows");
  std::ofstream svg(o.svg_path, std::ios::binary);
  if (!svg) fail(ErrorCode::kInvalidParameter, "cannot write '" + o.svg_path + "'");
  svg << render_svg(rows);
}

void cmd_samplesize(const Options& o, std::ostream& out) {
  const double dm = o.delta_minus.value_or(o.delta);
  const double dp = o.delta_plus.value_or(o.delta);
  out << exponents::sample_size(o.m, o.eps, dm, dp, exponents::sizing_rule_from_name(o.kind)) << '\n';
}

void cmd_nvar(const Options& o, std::ostream& out) {
  const auto kind = parse_kind(o, o.n, o.m, o.eps);
  const auto target = o.target == "qprime" ? varianceopt::Target::kQprime : varianceopt::Target::kQbar;
  const auto table = statistic_table(kind, o.n, o.m);
  const double exact = varianceopt::nvar(table, o.n, o.m, o.eps, target);
  const auto best = varianceopt::min_nvar(o.n, o.m, o.eps, target);
  out << "nvar " << format_real(exact) << '\n';
  out << "min_nvar " << format_real(best.value) << '\n';
  const auto tag = kind.effective_tag();
  if (tag != StatisticKind::Tag::kSingletons) {
    out << "closed_form " << format_real(exponents::nvar_closed_form(kind, o.n, o.m, o.eps)) << '\n';
  }
  out << "gaussian_delta " << format_real(exponents::gaussian_delta(exact)) << '\n';
}

void cmd_exponent(const Options& o, std::ostream& out) {
  const auto kind = kind_from_name(o.kind, o.beta.value_or(1.0));
  exponents::ExponentReport report;
  if (o.tau) {
    report = exponents::exponent_report(kind, {*o.tau, o.gamma, o.alpha});
  } else {
    report.c = exponents::error_exponent(kind, o.alpha);
    report.c_plus = report.c;
    report.c_minus = report.c;
    report.constant = 1.0 / std::sqrt(report.c);
  }
  out << "c_plus " << format_real(report.c_plus) << '\n';
  out << "c_minus " << format_real(report.c_minus) << '\n';
  out << "c " << format_real(report.c) << '\n';
  out << "constant " << format_real(report.constant) << '\n';
}

void cmd_beta(const Options& o, std::ostream& out) {
  const auto choice = default_beta(o.n, o.m, o.eps, o.multiplier);
  out << "beta " << format_real(choice.beta) << '\n';
  out << "delta " << format_real(choice.delta) << '\n';
  out << "delta_clamped " << (choice.delta_clamped ? "true" : "false") << '\n';
  out << "third_moment_ok " << (choice.third_moment_ok ? "true" : "false") << '\n';
}

void cmd_regime(const Options& o, std::ostream& out) {
  const auto r = exponents::regime(o.n, o.m, o.eps, o.delta);
  out << "label " << r.label << '\n';
  out << "x_axis " << format_real(r.x_axis) << '\n';
  out << "huber_theorem_applicable " << (r.huber_theorem_applicable ? "true" : "false") << '\n';
  out << "collisions_window " << (r.collisions_window ? "true" : "false") << '\n';
  out << "paninski_fails " << (r.paninski_fails ? "true" : "false") << '\n';
  out << "peebles_regime " << (r.peebles_regime ? "true" : "false") << '\n';
}

void cmd_error_rates(const Options& o, std::ostream& out) {
  mc::TesterChoice choice{o.kind, o.threshold, o.beta, o.multiplier};
  const auto resolved = mc::resolve_tester(choice, {o.n, o.m, o.eps});
  const auto p = uniform(o.m);
  const auto q = flat_alternative(o.m, o.eps, o.gamma).realize();
  const auto rates = oracle::exact_error_rates(resolved.rule, p, q);
  out << "threshold " << format_real(resolved.threshold) << '\n';
  out << "delta_minus " << format_real(rates.delta_minus) << '\n';
  out << "delta_plus " << format_real(rates.delta_plus) << '\n';
}

void cmd_depoissonize(const Options& o, std::ostream& out) {
  const auto kind = parse_kind(o, o.n, o.m, o.eps);
  const auto p = o.dist == "flat" ? flat_alternative(o.m, o.eps, o.gamma).realize() : uniform(o.m);
  auto spec = mgf::ContourSpec::defaults(o.n);
  if (o.nodes > 0) spec.nodes = o.nodes + (o.nodes % 2);
  const double contour = mgf::depoissonized_mgf(kind, o.theta, p, o.n, o.m, o.eps, spec);
  out << "contour " << format_real(contour) << '\n';
  if (oracle::composition_count(o.n, o.m) <= oracle::kMaxCompositions) {
    const double exact = oracle::exact_mgf(kind, p, o.n, o.m, o.eps, o.theta);
    out << "exact " << format_real(exact) << '\n';
    out << "relative_error " << format_real(std::abs(contour - exact) / std::abs(exact)) << '\n';
  }
}

}  // namespace

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Uniformity testing laboratory", "uniformity-lab"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a JSON experiment config and print CSV");
  run->add_option("config", o.config_path, "Config file")->required();

  auto* plot = app.add_subcommand("plot", "Render a run CSV as SVG");
  plot->add_option("csv", o.csv_path, "Input CSV")->required();
  plot->add_option("svg", o.svg_path, "Output SVG")->required();

  auto* calc = app.add_subcommand("calc", "Closed-form calculators");
  calc->require_subcommand(1);
  auto* samplesize = calc->add_subcommand("samplesize", "Samples needed for target error rates");
  samplesize->add_option("--m", o.m)->required();
  samplesize->add_option("--eps", o.eps)->required();
  samplesize->add_option("--delta", o.delta);
  samplesize->add_option("--delta-minus", o.delta_minus);
  samplesize->add_option("--delta-plus", o.delta_plus);
  samplesize->add_option("--kind", o.kind)->check(CLI::IsMember({"huber", "squared", "collisions", "tv", "superlinear"}));

  auto* nvar = calc->add_subcommand("nvar", "Normalized variance of a statistic");
  nvar->add_option("--kind", o.kind);
  nvar->add_option("--n", o.n)->required();
  nvar->add_option("--m", o.m)->required();
  nvar->add_option("--eps", o.eps)->required();
  nvar->add_option("--beta", o.beta);
  nvar->add_option("--target", o.target)->check(CLI::IsMember({"qbar", "qprime"}));

  auto* exponent = calc->add_subcommand("exponent", "Error exponents");
  exponent->add_option("--kind", o.kind);
  exponent->add_option("--alpha", o.alpha, "n / m");
  exponent->add_option("--tau", o.tau);
  exponent->add_option("--gamma", o.gamma);
  exponent->add_option("--beta", o.beta);

  auto* beta = calc->add_subcommand("beta", "Default Huber beta");
  beta->add_option("--n", o.n)->required();
  beta->add_option("--m", o.m)->required();
  beta->add_option("--eps", o.eps)->required();
  beta->add_option("--multiplier", o.multiplier);

  auto* regime = calc->add_subcommand("regime", "Classify (n, m, eps)");
  regime->add_option("--n", o.n)->required();
  regime->add_option("--m", o.m)->required();
  regime->add_option("--eps", o.eps)->required();
  regime->add_option("--delta", o.delta);

  auto* oracle_cmd = app.add_subcommand("oracle", "Exact enumeration");
  oracle_cmd->require_subcommand(1);
  auto* error_rates = oracle_cmd->add_subcommand("error-rates", "Exact failure probabilities");
  error_rates->add_option("--kind", o.kind);
  error_rates->add_option("--n", o.n)->required();
  error_rates->add_option("--m", o.m)->required();
  error_rates->add_option("--eps", o.eps)->required();
  error_rates->add_option("--gamma", o.gamma);
  error_rates->add_option("--threshold", o.threshold);
  error_rates->add_option("--beta", o.beta);

  auto* depo = app.add_subcommand("depoissonize", "Contour-integral checks");
  depo->require_subcommand(1);
  auto* check = depo->add_subcommand("check", "Compare the contour MGF with enumeration");
  check->add_option("--kind", o.kind);
  check->add_option("--n", o.n)->required();
  check->add_option("--m", o.m)->required();
  check->add_option("--eps", o.eps)->required();
  check->add_option("--theta", o.theta);
  check->add_option("--nodes", o.nodes);
  check->add_option("--beta", o.beta);
  check->add_option("--dist", o.dist)->check(CLI::IsMember({"uniform", "flat"}));
  check->add_option("--gamma", o.gamma);

  auto* reproduce = app.add_subcommand("reproduce", "Built-in experiments");
  reproduce->require_subcommand(1);
  auto* intro = reproduce->add_subcommand("intro", "TV vs collisions at m = n = 10^4");
  auto* figure = reproduce->add_subcommand("figure", "Collisions, TV and Huber for n = m in [100, 2000]");
  for (auto* sub : {intro, figure}) {
    sub->add_option("--trials", o.trials);
    sub->add_option("--seed", o.seed);
    sub->add_option("--workers", o.workers);
  }
  figure->add_option("--n", o.n_values)->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      cmd_run(o, out);
    } else if (*plot) {
      cmd_plot(o);
    } else if (*samplesize) {
      cmd_samplesize(o, out);
    } else if (*nvar) {
      cmd_nvar(o, out);
    } else if (*exponent) {
      cmd_exponent(o, out);
    } else if (*beta) {
      cmd_beta(o, out);
    } else if (*regime) {
      cmd_regime(o, out);
    } else if (*error_rates) {
      cmd_error_rates(o, out);
    } else if (*check) {
      cmd_depoissonize(o, out);
    } else if (*intro) {
      emit_rows(out, mc::reproduce_intro(o.trials, o.seed, effective_workers(o.workers)));
    } else if (*figure) {
      emit_rows(out, mc::reproduce_figure(o.n_values, o.trials, o.seed, effective_workers(o.workers)));
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const LabError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace unilab::cli
