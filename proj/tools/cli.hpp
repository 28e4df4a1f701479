// Copyright 2026 The robustood Authors
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

// Command-line front end. run_cli() takes the argument list and output
// streams so tests can drive it in-process.
//
// Exit codes: 0 success, 1 invalid input (including usage errors), 2
// numerical failure.

#ifndef ROBUSTOOD_TOOLS_CLI_HPP_
#define ROBUSTOOD_TOOLS_CLI_HPP_

#include <chrono>
#include <ctime>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "robustood/certify.hpp"
#include "robustood/error.hpp"
#include "robustood/harness.hpp"
#include "robustood/io.hpp"
#include "robustood/transport.hpp"

namespace robustood::cli {

// Shortest round-trip form, with ".0" appended to integral values.
inline std::string format_scalar(double v) {
  std::string s = format_double(v);
  if (std::isfinite(v) && s.find_first_of(".eE") == std::string::npos) {
    s += ".0";
  }
  return s;
}

inline std::string format_fixed4(double v) {
  if (!std::isfinite(v)) return "vacuous";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(4) << v;
  return ss.str();
}

inline Vector parse_vector(const std::string& text) {
  Vector v;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    v.push_back(parse_double(item));
  }
  if (v.empty()) throw InvalidInputError("empty vector '" + text + "'");
  return v;
}

// Smallest box containing every atom.
inline Box bounding_box(const DiscreteDistribution& P) {
  Box b(P.dim(), Interval{kInfinity, -kInfinity});
  for (const auto& a : P.atoms) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      b[j].lo = std::min(b[j].lo, a[j]);
      b[j].hi = std::max(b[j].hi, a[j]);
    }
  }
  return b;
}

struct GlobalOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

inline ExperimentConfig load_config(const GlobalOptions& g,
                                    const std::string& experiment) {
  ExperimentConfig cfg;
  if (!g.config.empty()) {
    cfg = config_from_json(read_json_file(g.config));
  } else if (experiment != "train") {
    cfg = reference_config(experiment);
  }
  if (experiment != "train" && cfg.experiment != experiment) {
    if (!g.config.empty()) {
      throw InvalidInputError("config experiment '" + cfg.experiment +
                              "' does not match subcommand '" + experiment +
                              "'");
    }
  }
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  validate(cfg);
  return cfg;
}

inline void emit(const GlobalOptions& g, const std::string& text,
                 std::ostream& out) {
  if (g.out.empty()) {
    out << text;
  } else {
    write_text_file(g.out, text);
  }
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Adversarial training, transport distances and OOD bounds",
               "robustood"};
  app.fallthrough();
  app.require_subcommand(1);
  GlobalOptions g;
  std::uint64_t seed_value = 0;
  std::size_t threads_value = 1;
  app.add_option("--config", g.config, "experiment configuration (JSON)");
  app.add_option("--out", g.out, "output path (default: stdout)");
  auto* seed_opt = app.add_option("--seed", seed_value, "override the seed");
  auto* threads_opt =
      app.add_option("--threads", threads_value, "worker threads")
          ->check(CLI::PositiveNumber);

  // train
  auto* train_cmd = app.add_subcommand("train", "run multi-step SGD, write the trace CSV");
  std::string train_data, train_final;
  train_cmd->add_option("--data", train_data, "dataset JSON (default: generated)");
  train_cmd->add_option("--final", train_final, "write the final iterate as JSON");

  // distance
  auto* dist_cmd = app.add_subcommand("distance", "W2, W_inf or TV between two distributions");
  std::string dist_p = "2", dist_a, dist_b;
  dist_cmd->add_option("--p", dist_p, "2, inf or tv");
  dist_cmd->add_option("--a", dist_a, "first distribution JSON")->required();
  dist_cmd->add_option("--b", dist_b, "second distribution JSON")->required();

  // worst-case and certify share the model inputs.
  std::string model_dist, model_w, model_p = "inf", method = "analytic";
  double model_r = 0.0, eta_x = 0.0;
  std::size_t inner_k = 0;
  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--dist", model_dist, "distribution JSON")->required();
    cmd->add_option("--w", model_w, "model parameters, comma separated")->required();
    cmd->add_option("--p", model_p, "2 or inf");
    cmd->add_option("--r", model_r, "radius")->required();
  };
  auto* wc_cmd = app.add_subcommand("worst-case", "worst-case risk over a Wasserstein ball");
  add_model(wc_cmd);
  auto* cert_cmd = app.add_subcommand("certify", "measure input-robustness");
  add_model(cert_cmd);
  cert_cmd->add_option("--method", method, "analytic or pgd");
  cert_cmd->add_option("--K", inner_k, "pgd inner steps");
  cert_cmd->add_option("--eta-x", eta_x, "pgd inner step");

  // bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "evaluate a generalization bound");
  bounds_cmd->require_subcommand(1);
  BoundInputs bi;
  double eps_pre = 0.0, tv = 0.0, prof_g = 0.0, prof_l = 0.0, prof_mu_w = 1.0;
  std::size_t bound_T = 4;
  std::string bound_p = "inf";
  bool bound_json = false;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--m", bi.M, "loss bound M")->required();
    cmd->add_option("--d0", bi.d0, "input dimension");
    cmd->add_option("--diam", bi.D, "l1 diameter of the support");
    cmd->add_option("--r", bi.r, "radius");
    cmd->add_option("--n", bi.n, "sample count");
    cmd->add_option("--theta", bi.theta, "failure probability");
    cmd->add_flag("--json", bound_json, "print the full report as JSON");
  };
  auto* b_winf = bounds_cmd->add_subcommand("winf", "W_inf bound");
  add_common(b_winf);
  b_winf->add_option("--eps", bi.epsilon, "robustness level")->required();
  auto* b_w2 = bounds_cmd->add_subcommand("w2", "W2 bound");
  add_common(b_w2);
  b_w2->add_option("--eps", bi.epsilon, "robustness level")->required();
  auto* b_excess = bounds_cmd->add_subcommand("excess", "excess-risk bound");
  add_common(b_excess);
  b_excess->add_option("--eps", bi.epsilon, "robust objective at the optimum")->required();
  b_excess->add_option("--p", bound_p, "2 or inf");
  b_excess->add_option("--T", bound_T, "SGD steps");
  b_excess->add_option("--g", prof_g, "gradient bound G")->required();
  b_excess->add_option("--l", prof_l, "smoothness L")->required();
  b_excess->add_option("--mu-w", prof_mu_w, "PL constant");
  auto* b_pre = bounds_cmd->add_subcommand("pretrain", "pretraining transfer bound");
  add_common(b_pre);
  b_pre->add_option("--eps-pre", eps_pre, "pretraining worst-case risk")->required();
  b_pre->add_option("--tv", tv, "total variation distance")->required();
  b_pre->add_option("--p", bound_p, "2 or inf");

  // experiments
  bool timings = false;
  auto add_experiment = [&](CLI::App* cmd) {
    cmd->add_flag("--timings", timings, "fill the runtime_s column");
  };
  auto* ablate_cmd = app.add_subcommand("ablate", "ablation experiments");
  ablate_cmd->require_subcommand(1);
  auto* ablate_r = ablate_cmd->add_subcommand("r", "perturbation-size ablation");
  auto* ablate_n = ablate_cmd->add_subcommand("n", "sample-size ablation");
  add_experiment(ablate_r);
  add_experiment(ablate_n);
  auto* conv_cmd = app.add_subcommand("converge", "convergence-rate experiment");
  add_experiment(conv_cmd);
  auto* transfer_cmd = app.add_subcommand("transfer", "pretraining transfer experiment");
  add_experiment(transfer_cmd);
  auto* validity_cmd = app.add_subcommand("validity", "bound validity experiment");
  add_experiment(validity_cmd);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }
  if (*seed_opt) g.seed = seed_value;
  if (*threads_opt) g.threads = threads_value;

  try {
    if (train_cmd->parsed()) {
      const ExperimentConfig cfg = load_config(g, "train");
      std::optional<Dataset> data;
      if (!train_data.empty()) {
        data = dataset_from_json(read_json_file(train_data));
      }
      const TrainTrace tr = run_train(cfg, data ? &*data : nullptr);
      emit(g, trace_csv(tr), out);
      if (!train_final.empty()) {
        write_text_file(train_final,
                        Json{{"w", json_detail::vector_json(tr.w_final)},
                             {"K", tr.K},
                             {"eta_x", tr.eta_x},
                             {"projections", tr.projections}}
                                .dump(2) + "\n");
      }
      return 0;
    }
    if (dist_cmd->parsed()) {
      const auto A = distribution_from_json(read_json_file(dist_a));
      const auto B = distribution_from_json(read_json_file(dist_b));
      double v = 0.0;
      if (dist_p == "tv") {
        v = tv_distance(A, B);
      } else if (parse_norm_order(dist_p) == NormOrder::kTwo) {
        v = wasserstein2(A, B);
      } else if (parse_norm_order(dist_p) == NormOrder::kInf) {
        v = wasserstein_inf(A, B);
      } else {
        throw InvalidInputError("distance: --p must be 2, inf or tv");
      }
      emit(g, format_scalar(v) + "\n", out);
      return 0;
    }
    if (wc_cmd->parsed() || cert_cmd->parsed()) {
      const auto P = distribution_from_json(read_json_file(model_dist));
      const Vector w = parse_vector(model_w);
      const NormOrder p = parse_norm_order(model_p);
      ExperimentConfig cfg;
      if (!g.config.empty()) cfg = config_from_json(read_json_file(g.config));
      const LossPtr loss = build_loss(cfg.loss, P.dim(), bounding_box(P),
                                      2.0 * model_r);
      if (w.size() != loss->dim_w()) {
        throw InvalidInputError("--w has " + std::to_string(w.size()) +
                                " entries, the loss needs " +
                                std::to_string(loss->dim_w()));
      }
      Json j;
      if (wc_cmd->parsed()) {
        if (p == NormOrder::kInf) {
          j = {{"metric", "W_inf"},
               {"value", worst_case_risk_winf(*loss, w, P, model_r,
                                              InnerQuality::analytic())}};
        } else {
          const W2WorstCase res = worst_case_risk_w2(*loss, w, P, model_r);
          j = {{"metric", "W_2"},
               {"value", res.value},
               {"lambda", res.lambda},
               {"budget_used", res.budget_used},
               {"status", res.status == SolveStatus::kCertified ? "certified"
                                                                : "heuristic"}};
        }
      } else {
        InnerQuality q = InnerQuality::analytic();
        if (method == "pgd") {
          q = InnerQuality::pgd(inner_k == 0 ? 50 : inner_k,
                                eta_x > 0 ? eta_x : 1.0 / loss->profile().L22);
        } else if (method != "analytic") {
          throw InvalidInputError("certify: --method must be analytic or pgd");
        }
        const RobustnessReport rep =
            measure_robustness(*loss, w, P, make_budget(p, model_r), q);
        j = {{"r", rep.r},
             {"p", to_string(rep.p)},
             {"epsilon_hat", rep.epsilon_hat},
             {"per_sample_gaps", json_detail::vector_json(rep.per_sample_gaps)},
             {"method", method}};
      }
      emit(g, j.dump(2) + "\n", out);
      return 0;
    }
    if (bounds_cmd->parsed()) {
      BoundReport rep;
      std::optional<double> r0;
      if (b_winf->parsed()) {
        rep = ood_bound_winf(bi);
      } else if (b_w2->parsed()) {
        rep = ood_bound_w2(bi);
      } else if (b_excess->parsed()) {
        ConstantsProfile prof;
        prof.G = prof_g;
        prof.L11 = prof_l;
        prof.mu_w = prof_mu_w;
        prof.mu_x = 1.0;
        rep = excess_risk_bound(bi, prof, bound_T, parse_norm_order(bound_p));
      } else {
        bi.epsilon_pre = eps_pre;
        bi.tv = tv;
        const TransferBounds tb =
            pretrain_transfer_bound(bi, parse_norm_order(bound_p));
        rep = tb.population;
        r0 = tb.r0;
      }
      if (bound_json) {
        Json j = bound_report_to_json(rep);
        if (r0) j["r0"] = *r0;
        emit(g, j.dump(2) + "\n", out);
      } else {
        std::string text = format_fixed4(rep.bound) + "\n";
        if (r0) text += "r0 " + format_fixed4(*r0) + "\n";
        emit(g, text, out);
      }
      return 0;
    }
    std::string experiment;
    if (ablate_r->parsed()) experiment = "ablate_r";
    if (ablate_n->parsed()) experiment = "ablate_n";
    if (conv_cmd->parsed()) experiment = "converge";
    if (transfer_cmd->parsed()) experiment = "transfer";
    if (validity_cmd->parsed()) experiment = "validity";
    const ExperimentConfig cfg = load_config(g, experiment);
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport rep = run_experiment(cfg);
    const double wall = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    emit(g, results_csv(rep.rows, timings), out);
    const Json summary = report_summary_json(rep);
    if (g.out.empty()) {
      err << summary.dump(2) << "\n";
    } else {
      out << summary.dump(2) << "\n";
      write_text_file(g.out + ".meta.json",
                      Json{{"finished_utc", utc_timestamp()},
                           {"wall_seconds", wall},
                           {"threads", cfg.threads},
                           {"config", config_to_json(cfg)},
                           {"summary", summary}}
                              .dump(2) + "\n");
    }
    return 0;
  } catch (const InvalidInputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace robustood::cli

#endif  // ROBUSTOOD_TOOLS_CLI_HPP_
