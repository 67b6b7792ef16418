// aist: command-line front end for the AIST analysis pipeline.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "aist/error.hpp"
#include "aist/pipeline.hpp"

namespace fs = std::filesystem;
using aist::io::json;

namespace {

std::string default_output_dir() {
  if (const char* env = std::getenv("AIST_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw aist::IoError("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw aist::IoError("cannot write " + path.string());
}

// Wall-clock stage timings go to stderr only, so report files stay
// reproducible.
class Stopwatch {
 public:
  explicit Stopwatch(std::string stage) : stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    std::cerr << "[timing] " << stage_ << " " << dt.count() << " s\n";
  }

 private:
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

aist::Vector parse_state(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw aist::DomainError("cannot parse state component '" + item + "'");
    }
  }
  return Eigen::Map<aist::Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

struct Common {
  std::string system;
  std::string out_dir = default_output_dir();
};

void add_pipeline_options(CLI::App* cmd, aist::PipelineConfig& cfg, std::string& feature_map) {
  cmd->add_option("--system", cfg.system_path, "system config (JSON)")->required();
  cmd->add_option("--ell", cfg.ell, "sequence length")->capture_default_str();
  cmd->add_option("--N", cfg.N, "training samples")->capture_default_str();
  cmd->add_option("--beta", cfg.beta, "certificate confidence parameter")->capture_default_str();
  cmd->add_option("--rho", cfg.rho, "slack trade-off")->capture_default_str();
  cmd->add_option("--zeta", cfg.zeta, "margin")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  cmd->add_option("--mode", cfg.mode, "flat | conic | auto")->capture_default_str();
  cmd->add_option("--feature-map", feature_map, "raw | veronese2")->capture_default_str();
  cmd->add_option("--holdout", cfg.holdout, "fresh samples for the empirical violation rate")->capture_default_str();
  cmd->add_option("--queries", cfg.queries, "random initial states to bound")->capture_default_str();
  cmd->add_option("--out-dir", cfg.output_dir, "output directory (default: $AIST_OUTPUT_DIR or .)");
}

int run(int argc, char** argv) {
  CLI::App app{"Data-driven bounds on the average inter-sample time of PETC loops"};
  app.require_subcommand(1);

  // gen-data
  Common gen;
  int gen_ell = 1;
  std::size_t gen_n = 10000;
  std::uint64_t gen_seed = 1;
  auto* gen_cmd = app.add_subcommand("gen-data", "sample states and label them with IST sequences");
  gen_cmd->add_option("--system", gen.system)->required();
  gen_cmd->add_option("--ell", gen_ell)->capture_default_str();
  gen_cmd->add_option("--N", gen_n)->capture_default_str();
  gen_cmd->add_option("--seed", gen_seed)->capture_default_str();
  gen_cmd->add_option("--out-dir", gen.out_dir);

  // calibrate
  Common cal;
  std::size_t cal_probes = 10000;
  std::uint64_t cal_seed = 1;
  double cal_coverage = 0.999;
  int cal_max = 64;
  auto* cal_cmd = app.add_subcommand("calibrate", "smallest heartbeat that most states trigger before");
  cal_cmd->add_option("--system", cal.system)->required();
  cal_cmd->add_option("--probes", cal_probes)->capture_default_str();
  cal_cmd->add_option("--seed", cal_seed)->capture_default_str();
  cal_cmd->add_option("--coverage", cal_coverage)->capture_default_str();
  cal_cmd->add_option("--max-kappa-bar", cal_max)->capture_default_str();

  // train
  Common tr;
  std::string tr_data, tr_mode = "auto", tr_map = "veronese2";
  double tr_rho = 1e3, tr_zeta = 1.0;
  bool tr_conic_seq = false;
  auto* tr_cmd = app.add_subcommand("train", "fit the multiclass separator");
  tr_cmd->add_option("--data", tr_data)->required();
  tr_cmd->add_option("--mode", tr_mode)->capture_default_str();
  tr_cmd->add_option("--feature-map", tr_map)->capture_default_str();
  tr_cmd->add_option("--rho", tr_rho)->capture_default_str();
  tr_cmd->add_option("--zeta", tr_zeta)->capture_default_str();
  tr_cmd->add_flag("--allow-conic-sequences", tr_conic_seq);
  tr_cmd->add_option("--out-dir", tr.out_dir);

  // certify
  Common ce;
  std::string ce_model, ce_data, ce_holdout;
  double ce_beta = 1e-6;
  std::size_t ce_unseen = 0;
  auto* ce_cmd = app.add_subcommand("certify", "risk interval from the violated-constraint count");
  ce_cmd->add_option("--model", ce_model)->required();
  ce_cmd->add_option("--data", ce_data)->required();
  ce_cmd->add_option("--holdout", ce_holdout);
  ce_cmd->add_option("--beta", ce_beta)->capture_default_str();
  ce_cmd->add_option("--unseen", ce_unseen, "collected samples left out because their class was dropped");
  ce_cmd->add_option("--out-dir", ce.out_dir);

  // abstract
  Common ab;
  std::string ab_data;
  auto* ab_cmd = app.add_subcommand("abstract", "build the l-complete traffic abstraction of a dataset");
  ab_cmd->add_option("--data", ab_data)->required();
  ab_cmd->add_option("--out-dir", ab.out_dir);

  // analyze
  Common an;
  std::string an_abs, an_model, an_cert;
  std::vector<std::string> an_states;
  std::size_t an_queries = 0;
  std::uint64_t an_seed = 1;
  auto* an_cmd = app.add_subcommand("analyze", "AIST bounds for initial states");
  an_cmd->add_option("--abstraction", an_abs)->required();
  an_cmd->add_option("--model", an_model)->required();
  an_cmd->add_option("--certificate", an_cert);
  an_cmd->add_option("--state", an_states, "comma-separated initial state (repeatable)");
  an_cmd->add_option("--queries", an_queries, "random unit initial states")->capture_default_str();
  an_cmd->add_option("--seed", an_seed)->capture_default_str();
  an_cmd->add_option("--out-dir", an.out_dir);

  // regions
  Common rg;
  int rg_ell = 1, rg_res = 200;
  std::string rg_model;
  auto* rg_cmd = app.add_subcommand("regions", "SVG plot of the IST regions of a planar system");
  rg_cmd->add_option("--system", rg.system)->required();
  rg_cmd->add_option("--ell", rg_ell)->capture_default_str();
  rg_cmd->add_option("--resolution", rg_res)->capture_default_str();
  rg_cmd->add_option("--model", rg_model, "overlay the decision boundaries of this model");
  rg_cmd->add_option("--out-dir", rg.out_dir);

  // compare
  aist::PipelineConfig cmp_cfg;
  cmp_cfg.output_dir = default_output_dir();
  std::string cmp_map = "veronese2";
  std::size_t cmp_sweep = 0;
  int cmp_extra = 10;
  auto* cmp_cmd = app.add_subcommand("compare", "data-driven against sampled-oracle abstraction");
  add_pipeline_options(cmp_cmd, cmp_cfg, cmp_map);
  cmp_cmd->add_option("--sweep", cmp_sweep, "oracle sweep points (0: default for the dimension)");
  cmp_cmd->add_option("--extra-steps", cmp_extra, "oracle trajectory length beyond ell")->capture_default_str();

  // pipeline
  aist::PipelineConfig pl_cfg;
  pl_cfg.output_dir = default_output_dir();
  std::string pl_map = "veronese2";
  auto* pl_cmd = app.add_subcommand("pipeline", "generate, train, certify, abstract and analyze");
  add_pipeline_options(pl_cmd, pl_cfg, pl_map);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  json summary;
  if (*gen_cmd) {
    const auto sys = aist::LtiPetcSystem::load(gen.system);
    Stopwatch sw("gen-data");
    const auto set = aist::generate_dataset(sys, gen_ell, gen_n, gen_seed);
    const auto path = prepare_dir(gen.out_dir) / "dataset.jsonl";
    aist::save_dataset(path.string(), set);
    summary = {{"dataset", path.string()}, {"N", set.size()}, {"classes", set.label_table.size()}};
  } else if (*cal_cmd) {
    const auto sys = aist::LtiPetcSystem::load(cal.system);
    const auto probes = aist::to_soa(aist::sample_states(static_cast<int>(sys.state_dim()), cal_probes, cal_seed));
    const auto c = aist::calibrate_kappa_bar(sys, probes, cal_probes, cal_coverage, cal_max);
    summary = {{"h", sys.h()}, {"kappa_bar", c.kappa_bar}, {"below_fraction", c.below_fraction}};
  } else if (*tr_cmd) {
    const auto data = aist::load_dataset(tr_data);
    aist::TrainOptions opts;
    opts.feature_map = aist::parse_feature_map(tr_map);
    opts.allow_conic_sequences = tr_conic_seq;
    Stopwatch sw("train");
    const auto model = aist::train(data, aist::resolve_mode(tr_mode, data.ell), tr_rho, tr_zeta, opts);
    const auto path = prepare_dir(tr.out_dir) / "model.json";
    model.save(path.string());
    summary = {{"model", path.string()}, {"mode", aist::to_string(model.mode)}, {"epochs", model.training.epochs},
               {"converged", model.training.converged}, {"relative_gap", model.training.relative_gap}};
  } else if (*ce_cmd) {
    const auto model = aist::MulticlassModel::load(ce_model);
    const auto data = aist::load_dataset(ce_data);
    std::optional<aist::ScenarioSet> holdout;
    if (!ce_holdout.empty()) holdout = aist::load_dataset(ce_holdout);
    Stopwatch sw("certify");
    const auto c = aist::certify(model, data, holdout ? &*holdout : nullptr, ce_beta, ce_unseen);
    const auto path = prepare_dir(ce.out_dir) / "certificate.json";
    aist::io::write_json_file(path.string(), c.certificate.to_json());
    summary = {{"certificate", c.certificate.to_json()}, {"training_violations", c.training_violations},
               {"holdout", c.holdout ? c.holdout->to_json() : json(nullptr)}};
  } else if (*ab_cmd) {
    const auto data = aist::load_dataset(ab_data);
    const auto abs = aist::build_slca(data.label_table.labels(), data.h);
    const auto dir = prepare_dir(ab.out_dir);
    aist::io::write_json_file((dir / "abstraction.json").string(), abs.to_json());
    write_text(dir / "abstraction.dot", abs.to_dot());
    summary = aist::summarize(abs).to_json();
  } else if (*an_cmd) {
    const auto abs = aist::TrafficAbstraction::from_json(aist::io::read_json_file(an_abs));
    const auto model = aist::MulticlassModel::load(an_model);
    std::optional<aist::RiskCertificate> cert;
    if (!an_cert.empty()) cert = aist::RiskCertificate::from_json(aist::io::read_json_file(an_cert));
    std::vector<aist::Vector> queries;
    for (const auto& s : an_states) {
      queries.push_back(parse_state(s));
      if (queries.back().size() != model.state_dim) throw aist::ShapeError("state '" + s + "' has the wrong dimension");
    }
    if (an_queries > 0)
      for (auto& x : aist::sample_states(static_cast<int>(model.state_dim), an_queries, an_seed))
        queries.push_back(std::move(x));
    const auto report = aist::analyze(abs, model, queries, cert);
    const auto path = prepare_dir(an.out_dir) / "report.json";
    aist::io::write_json_file(path.string(), report.to_json());
    summary = {{"report", path.string()}, {"records", report.records.size()},
               {"min_sac", aist::to_string(report.min_sac)}, {"max_lac", aist::to_string(report.max_lac)},
               {"eac", aist::to_string(report.eac)}};
  } else if (*rg_cmd) {
    const auto sys = aist::LtiPetcSystem::load(rg.system);
    std::optional<aist::MulticlassModel> model;
    if (!rg_model.empty()) model = aist::MulticlassModel::load(rg_model);
    const auto plot = aist::render_regions(sys, rg_ell, rg_res, model ? &*model : nullptr);
    const auto path = prepare_dir(rg.out_dir) / "regions.svg";
    write_text(path, plot.svg);
    summary = {{"svg", path.string()}, {"regions", plot.region_count}, {"points", plot.points},
               {"symmetric", plot.symmetric}};
  } else if (*cmp_cmd) {
    cmp_cfg.feature_map = aist::parse_feature_map(cmp_map);
    const auto sys = aist::LtiPetcSystem::load(cmp_cfg.system_path);
    Stopwatch sw("compare");
    const auto r = aist::run_compare(sys, cmp_cfg, cmp_sweep, cmp_extra);
    const auto dir = prepare_dir(cmp_cfg.output_dir);
    aist::io::write_json_file((dir / "oracle_abstraction.json").string(), r.oracle.to_json());
    aist::io::write_json_file((dir / "compare.json").string(), r.report.to_json());
    summary = r.report.to_json();
    summary.erase("states_only_oracle");
    summary.erase("states_only_data");
  } else if (*pl_cmd) {
    pl_cfg.feature_map = aist::parse_feature_map(pl_map);
    const auto sys = aist::LtiPetcSystem::load(pl_cfg.system_path);
    aist::PipelineResult r;
    {
      Stopwatch sw("pipeline");
      r = aist::run_pipeline(sys, pl_cfg);
    }
    aist::write_pipeline(r, pl_cfg.output_dir);
    const auto& c = r.certification.certificate;
    summary = {{"out_dir", pl_cfg.output_dir}, {"classes", r.train.label_table.size()},
               {"states", r.abstraction.size()}, {"edges", r.abstraction.edge_count()},
               {"eac", aist::to_string(r.report.eac)}, {"s_star", c.s_star}, {"eps_hi", c.eps_hi}};
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const aist::Error& e) {
    std::cerr << json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 3;
  }
}
