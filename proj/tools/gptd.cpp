// gptd: state discrimination bounds and quantumness certification for
// cone-based probabilistic models.
//
// Subcommands: validate, bounds, find-advantage, detect, norm.
// Exit codes: 0 ok, 2 validation failure, 3 parse/shape error,
// 4 precondition failure, 5 interiority failure, 6 oracle failure.

#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gptd/discrimination.hpp"
#include "gptd/embedding.hpp"
#include "gptd/errors.hpp"
#include "gptd/io.hpp"
#include "gptd/model.hpp"

namespace {

using gptd::io::Json;
using gptd::io::Report;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitParse = 3;
constexpr int kExitPrecondition = 4;
constexpr int kExitInteriority = 5;
constexpr int kExitOracle = 6;

struct CommonOpts {
  double tol = gptd::kDefaultTol;
  std::uint64_t seed = 0;
  std::string out_path;
  bool example_sep = false;
};

void finish(Report& report, const CommonOpts& opts,
            std::chrono::steady_clock::time_point started) {
  if (!opts.out_path.empty()) {
    report.write(opts.out_path);
  } else {
    std::cout << report.serialize();
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  std::cout << "wall_ms " << elapsed.count() << "\n";
}

int exit_code_for(const std::exception& err) {
  if (dynamic_cast<const gptd::ParseError*>(&err) ||
      dynamic_cast<const gptd::ShapeError*>(&err)) {
    return kExitParse;
  }
  if (dynamic_cast<const gptd::ValidationError*>(&err)) {
    return kExitValidation;
  }
  if (dynamic_cast<const gptd::PreconditionError*>(&err)) {
    return kExitPrecondition;
  }
  if (dynamic_cast<const gptd::InteriorityError*>(&err)) {
    return kExitInteriority;
  }
  return kExitOracle;
}

const char* kind_name(int code) {
  switch (code) {
    case kExitValidation: return "validation";
    case kExitParse: return "parse";
    case kExitPrecondition: return "precondition";
    case kExitInteriority: return "interiority";
    default: return "oracle";
  }
}

/// Runs the command body, mapping exceptions onto exit codes and recording
/// them (with any cone certificate) in the report.
int run_guarded(Report& report, const CommonOpts& opts,
                const std::function<int()>& body) {
  const auto started = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    code = body();
  } catch (const std::exception& err) {
    code = exit_code_for(err);
    report.set_error(kind_name(code), err.what());
    if (const auto* v = dynamic_cast<const gptd::ValidationError*>(&err)) {
      if (v->effect_index() >= 0) {
        report.results()["failed_effect_index"] = v->effect_index();
      }
      report.attach_certificate_entries(v->certificate_dim(),
                                        v->certificate_entries());
    }
    std::cout << "error (" << kind_name(code) << "): " << err.what() << "\n";
  }
  finish(report, opts, started);
  return code;
}

/// Loads the model named on the command line, embedding abstract models
/// into Hermitian space first and optionally contracting the cone into the
/// positive semidefinite cone. Records inputs in the report.
gptd::GptModel load_model_input(const std::string& path,
                                const CommonOpts& opts, Report& report,
                                double* contraction_lambda = nullptr,
                                bool contract = false) {
  gptd::GptModel model = [&] {
    if (opts.example_sep) {
      report.add_builtin_input("model", "sep");
      return gptd::GptModel::sep22(opts.tol);
    }
    report.add_input("model", path, gptd::io::read_file(path));
    auto loaded = gptd::io::load_model(path, opts.tol);
    if (loaded.is_abstract()) {
      return gptd::embed_model(loaded.abstract(), opts.tol).model;
    }
    return loaded.quantum_like();
  }();
  if (contract) {
    auto contracted = gptd::contract_into_quantum(model);
    if (contraction_lambda) *contraction_lambda = contracted.lambda;
    return contracted.model;
  }
  return model;
}

Json certificate_json(const gptd::AdvantageCertificate& cert) {
  Json j;
  j["err"] = cert.err;
  j["helstrom_rhs"] = cert.helstrom_rhs;
  j["margin"] = cert.margin;
  j["delta"] = cert.delta;
  j["rho0"] = gptd::io::matrix_to_json(cert.rho0.matrix());
  j["rho1"] = gptd::io::matrix_to_json(cert.rho1.matrix());
  Json effects = Json::array();
  for (const auto& e : cert.meas.effects()) {
    effects.push_back(gptd::io::matrix_to_json(e));
  }
  j["effects"] = std::move(effects);
  return j;
}

int cmd_validate(const std::string& model_path, const std::string& state_path,
                 const std::string& meas_path, const CommonOpts& opts,
                 Report& report) {
  return run_guarded(report, opts, [&] {
    const auto model = load_model_input(model_path, opts, report);
    report.results()["dim"] = model.dim;
    report.results()["model_valid"] = true;
    if (!state_path.empty()) {
      report.add_input("state", state_path, gptd::io::read_file(state_path));
      gptd::validate_state(model, gptd::io::load_state(state_path));
      report.results()["state_valid"] = true;
    }
    if (!meas_path.empty()) {
      report.add_input("measurement", meas_path,
                       gptd::io::read_file(meas_path));
      gptd::validate_measurement(model, gptd::io::load_effects(meas_path));
      report.results()["measurement_valid"] = true;
    }
    if (opts.example_sep && state_path.empty() && meas_path.empty()) {
      gptd::sep_example(opts.tol);  // validations run inside
      report.results()["state_valid"] = true;
      report.results()["measurement_valid"] = true;
    }
    std::cout << "all inputs valid\n";
    return kExitOk;
  });
}

int cmd_bounds(const std::string& model_path, const std::string& inst_path,
               const std::string& meas_path, std::optional<double> p_override,
               const CommonOpts& opts, Report& report) {
  return run_guarded(report, opts, [&] {
    std::optional<gptd::SepExample> example;
    if (opts.example_sep) {
      example = gptd::sep_example(opts.tol);
      report.add_builtin_input("model", "sep");
      report.add_builtin_input("instance", "sep");
      report.add_builtin_input("measurement", "sep");
    }
    const gptd::GptModel model =
        example ? example->model
                : load_model_input(model_path, opts, report);
    double p = 0.5;
    std::optional<gptd::HermMatrix> raw0, raw1;
    if (example) {
      raw0 = example->instance.rho0.matrix();
      raw1 = example->instance.rho1.matrix();
    } else {
      report.add_input("instance", inst_path, gptd::io::read_file(inst_path));
      auto inst_file = gptd::io::load_instance(inst_path);
      raw0 = inst_file.rho0;
      raw1 = inst_file.rho1;
      p = inst_file.p;
    }
    if (p_override) p = *p_override;

    const auto rho0 = gptd::validate_state(model, *raw0);
    const auto rho1 = gptd::validate_state(model, *raw1);
    const gptd::Measurement meas = [&] {
      if (example) return example->meas;
      report.add_input("measurement", meas_path,
                       gptd::io::read_file(meas_path));
      return gptd::validate_measurement(model,
                                        gptd::io::load_effects(meas_path));
    }();

    const gptd::DiscriminationInstance inst(rho0, rho1, p);
    const auto bound = gptd::check_violation(inst, meas);
    auto& r = report.results();
    r["p"] = p;
    r["err"] = bound.err;
    r["helstrom_rhs"] = bound.helstrom_rhs;
    r["general_rhs"] = bound.general_rhs;
    r["r"] = bound.r;
    r["r_prime0"] = bound.r_prime0;
    r["r_prime1"] = bound.r_prime1;
    r["equality_A"] = bound.equality_holds;
    r["violates_quantum"] = bound.violates_quantum;
    r["margin"] = bound.margin;
    r["soundness_check"] = bound.general_rhs <= bound.err + 1e-9;
    std::cout << "err " << bound.err << "  helstrom_rhs "
              << bound.helstrom_rhs << "  general_rhs " << bound.general_rhs
              << "  r " << bound.r << "  violates "
              << (bound.violates_quantum ? "yes" : "no") << "\n";
    return kExitOk;
  });
}

int cmd_find_advantage(const std::string& model_path,
                       const std::string& meas_path, double safety,
                       const std::string& instance_out,
                       const CommonOpts& opts, Report& report) {
  return run_guarded(report, opts, [&] {
    std::optional<gptd::SepExample> example;
    if (opts.example_sep) {
      example = gptd::sep_example(opts.tol);
      report.add_builtin_input("model", "sep");
      report.add_builtin_input("measurement", "sep");
    }
    const gptd::GptModel model =
        example ? example->model
                : load_model_input(model_path, opts, report);
    const gptd::Measurement meas = [&] {
      if (example) return example->meas;
      report.add_input("measurement", meas_path,
                       gptd::io::read_file(meas_path));
      return gptd::validate_measurement(model,
                                        gptd::io::load_effects(meas_path));
    }();

    const auto stats = gptd::measurement_spectral_stats(meas);
    report.results()["r"] = stats.r;
    if (!(stats.r > 1.0 + 1e-9)) {
      report.set_error("precondition",
                       "eigenvalue spread r must exceed 1 to outperform "
                       "positive-operator measurements");
      std::cout << "r " << stats.r << " does not exceed 1\n";
      return kExitPrecondition;
    }

    const auto cert =
        gptd::construct_advantage(model, meas, safety, opts.seed);
    report.results()["certificate"] = certificate_json(cert);
    gptd::io::write_instance(instance_out, cert.rho0.matrix(),
                             cert.rho1.matrix(), 0.5);
    report.results()["instance_path"] = instance_out;
    std::cout << "margin " << cert.margin << "  err " << cert.err
              << "  helstrom_rhs " << cert.helstrom_rhs << "\n"
              << "instance written to " << instance_out << "\n";
    return kExitOk;
  });
}

int cmd_detect(const std::string& model_path, const CommonOpts& opts,
               Report& report) {
  return run_guarded(report, opts, [&] {
    double lambda = 0.0;
    const auto model = load_model_input(model_path, opts, report, &lambda,
                                        /*contract=*/true);
    report.results()["contraction_lambda"] = lambda;
    const auto verdict = gptd::detect_beyond_quantum(model, opts.seed);
    const bool beyond =
        verdict.status == gptd::QuantumnessVerdict::Status::BeyondQuantum;
    report.results()["verdict"] = beyond ? "BeyondQuantum" : "IsQuantum";
    if (verdict.witness) {
      report.results()["witness"] =
          gptd::io::matrix_to_json(*verdict.witness);
    }
    if (verdict.certificate) {
      report.results()["certificate"] =
          certificate_json(*verdict.certificate);
    }
    std::cout << "verdict " << (beyond ? "BeyondQuantum" : "IsQuantum")
              << "\n";
    return kExitOk;
  });
}

int cmd_norm(const std::string& model_path, const std::string& inst_path,
             const CommonOpts& opts, Report& report) {
  return run_guarded(report, opts, [&] {
    std::optional<gptd::SepExample> example;
    if (opts.example_sep) {
      example = gptd::sep_example(opts.tol);
      report.add_builtin_input("model", "sep");
      report.add_builtin_input("instance", "sep");
    }
    const gptd::GptModel model =
        example ? example->model
                : load_model_input(model_path, opts, report);
    std::optional<gptd::HermMatrix> raw0, raw1;
    if (example) {
      raw0 = example->instance.rho0.matrix();
      raw1 = example->instance.rho1.matrix();
    } else {
      report.add_input("instance", inst_path, gptd::io::read_file(inst_path));
      const auto f = gptd::io::load_instance(inst_path);
      raw0 = f.rho0;
      raw1 = f.rho1;
    }
    const auto rho0 = gptd::validate_state(model, *raw0);
    const auto rho1 = gptd::validate_state(model, *raw1);
    const auto norm = gptd::distinguishability_norm(model, rho0, rho1);
    report.results()["value"] = norm.value;
    report.results()["exact"] = norm.exact;
    if (norm.effect) {
      report.results()["effect"] = gptd::io::matrix_to_json(*norm.effect);
    }
    std::cout << "value " << norm.value << "  exact "
              << (norm.exact ? "yes" : "no") << "\n";
    return kExitOk;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "State discrimination bounds and quantumness certification for "
      "cone-based probabilistic models"};
  app.require_subcommand(1);

  CommonOpts opts;
  app.add_option("--tol", opts.tol, "membership tolerance")
      ->envname("GPTD_TOL")
      ->capture_default_str();

  std::vector<std::string> argv_echo(argv, argv + argc);

  std::string model_path, state_path, meas_path, inst_path;
  std::string instance_out = "advantage.instance.json";
  double safety = 0.99;
  std::optional<double> p_override;

  auto add_common = [&](CLI::App* cmd, bool with_seed) {
    cmd->fallthrough();
    cmd->add_option("--out", opts.out_path, "write the JSON report here");
    cmd->add_flag("--example", opts.example_sep,
                  "use the built-in separable fixture");
    if (with_seed) {
      cmd->add_option("--seed", opts.seed, "seed for randomized searches");
    }
  };

  auto* validate = app.add_subcommand("validate", "validate model files");
  validate->add_option("model", model_path, "model file");
  validate->add_option("--state", state_path, "state file to validate");
  validate->add_option("--meas", meas_path, "measurement file to validate");
  add_common(validate, false);

  auto* bounds =
      app.add_subcommand("bounds", "evaluate discrimination bounds");
  bounds->add_option("model", model_path, "model file");
  bounds->add_option("instance", inst_path, "instance file");
  bounds->add_option("meas", meas_path, "measurement file");
  bounds->add_option("--p", p_override, "override the prior");
  add_common(bounds, false);

  auto* find = app.add_subcommand(
      "find-advantage", "construct states beating the quantum bound");
  find->add_option("model", model_path, "model file");
  find->add_option("meas", meas_path, "measurement file");
  find->add_option("--safety", safety, "fraction of the feasible step")
      ->check(CLI::Range(1e-6, 1.0 - 1e-9));
  find->add_option("--instance-out", instance_out,
                   "where to write the constructed instance");
  add_common(find, true);

  auto* detect = app.add_subcommand(
      "detect", "decide whether the model is standard quantum theory");
  detect->add_option("model", model_path, "model file");
  add_common(detect, true);

  auto* norm = app.add_subcommand(
      "norm", "evaluate the discrimination norm of a state pair");
  norm->add_option("model", model_path, "model file");
  norm->add_option("instance", inst_path, "instance file (rho0, rho1)");
  add_common(norm, false);

  CLI11_PARSE(app, argc, argv);

  const auto need_model = [&](CLI::App* cmd) {
    return cmd->parsed() && model_path.empty() && !opts.example_sep;
  };
  if (need_model(validate) || need_model(bounds) || need_model(find) ||
      need_model(detect) || need_model(norm)) {
    std::cerr << "error: model file required (or --example)\n";
    return kExitParse;
  }

  if (validate->parsed()) {
    Report report("validate", argv_echo);
    report.set_tolerance(opts.tol);
    return cmd_validate(model_path, state_path, meas_path, opts, report);
  }
  if (bounds->parsed()) {
    if (!opts.example_sep && (inst_path.empty() || meas_path.empty())) {
      std::cerr << "error: bounds needs model, instance, meas\n";
      return kExitParse;
    }
    Report report("bounds", argv_echo);
    report.set_tolerance(opts.tol);
    return cmd_bounds(model_path, inst_path, meas_path, p_override, opts,
                      report);
  }
  if (find->parsed()) {
    if (!opts.example_sep && meas_path.empty()) {
      std::cerr << "error: find-advantage needs model and meas\n";
      return kExitParse;
    }
    Report report("find-advantage", argv_echo);
    report.set_tolerance(opts.tol);
    report.set_seed(opts.seed);
    return cmd_find_advantage(model_path, meas_path, safety, instance_out,
                              opts, report);
  }
  if (detect->parsed()) {
    Report report("detect", argv_echo);
    report.set_tolerance(opts.tol);
    report.set_seed(opts.seed);
    return cmd_detect(model_path, opts, report);
  }
  Report report("norm", argv_echo);
  report.set_tolerance(opts.tol);
  if (!opts.example_sep && inst_path.empty()) {
    std::cerr << "error: norm needs model and instance\n";
    return kExitParse;
  }
  return cmd_norm(model_path, inst_path, opts, report);
}
