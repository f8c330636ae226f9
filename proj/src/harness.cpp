// SPDX-License-Identifier: Apache-2.0
#include "lit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "lit/io/csv.hpp"
#include "lit/io/model_file.hpp"

namespace fs = std::filesystem;

namespace lit::harness {

namespace {

const std::vector<std::string> kDataKeys = {
    "data.kind",       "data.seed",      "data.image_size", "data.classes",
    "data.train_count", "data.val_count", "data.test_count", "data.noise",
    "data.path",       "data.limit",
};
const std::vector<std::string> kNetKeys = {
    "teacher.kind",       "teacher.blocks", "teacher.channels", "teacher.cardinality",
    "teacher.stem_channels", "teacher.checkpoint",
    "student.kind",       "student.blocks", "student.channels", "student.cardinality",
    "student.stem_channels",
};
const std::vector<std::string> kTrainKeys = {
    "train.variant",     "train.preset",       "train.preset_scale", "train.epochs",
    "train.fine_tune_epochs", "train.batch_size", "train.lr0",       "train.milestones",
    "train.lr_decay",    "train.ft_lr0",       "train.ft_milestones", "train.momentum",
    "train.weight_decay", "train.tau",         "train.alpha",        "train.beta",
    "train.penalty",     "train.kd_tau_squared", "train.seed",
};
const std::vector<std::string> kSweepKeys = {"sweep.parameter", "sweep.values", "sweep.seeds"};
const std::vector<std::string> kSelectKeys = {"select.tau_grid", "select.alpha_grid",
                                              "select.beta_grid", "select.small_blocks"};
const std::vector<std::string> kPruneKeys = {"prune.checkpoint", "prune.sparsity", "prune.scope",
                                             "prune.fine_tune_epochs"};
const std::vector<std::string> kEvalKeys = {"eval.checkpoint", "eval.split"};

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> lists) {
  std::vector<std::string> out;
  for (const auto& l : lists) out.insert(out.end(), l.begin(), l.end());
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Format, "cannot create output directory '" + dir + "'");
}

std::string one_line_spec(const NetworkSpec& spec) {
  std::string s = spec.encode();
  std::replace(s.begin(), s.end(), '\n', ';');
  while (!s.empty() && s.back() == ';') s.pop_back();
  return s;
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

// first-maximum argmax over values sorted ascending = smallest best value
template <typename Fn>
double pick_best(std::vector<double> grid, Fn acc_of) {
  std::sort(grid.begin(), grid.end());
  double best_v = grid.front();
  double best_acc = -1;
  for (double v : grid) {
    const double a = acc_of(v);
    if (a > best_acc) {
      best_acc = a;
      best_v = v;
    }
  }
  return best_v;
}

void run_jobs(int jobs, int n, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

SegmentedNetworkF load_teacher_checkpoint(const io::Config& cfg, const data::Dataset& sample) {
  if (!cfg.has("teacher.checkpoint"))
    fail(ErrorKind::Config, "this variant requires teacher.checkpoint");
  const std::string path = cfg.get("teacher.checkpoint");
  if (!fs::exists(path))
    fail(ErrorKind::Config, "teacher checkpoint '" + path + "' does not exist");
  SegmentedNetworkF teacher = io::load_network(path);
  if (teacher.spec().input_channels != sample.input_shape[0] ||
      teacher.spec().input_size != sample.input_shape[1])
    fail(ErrorKind::Config, "teacher checkpoint '" + path + "' input shape does not match the dataset");
  if (cfg.has("teacher.blocks")) {
    const NetworkSpec expected = net_spec_from(cfg, "teacher", sample);
    if (expected.encode() != teacher.spec().encode())
      fail(ErrorKind::Config, "teacher checkpoint '" + path + "' does not match the teacher block spec");
  }
  return teacher;
}

TrainConfig prune_fine_tune_config(const io::Config& cfg, int epochs) {
  TrainConfig tc;
  tc.variant = Variant::Scratch;
  tc.epochs = epochs;
  tc.batch_size = cfg.get_int_or("train.batch_size", 32);
  tc.lr0 = cfg.get_double_or("train.lr0", 0.01);
  if (cfg.has("train.milestones")) tc.milestones = cfg.get_int_list("train.milestones");
  tc.lr_decay = cfg.get_double_or("train.lr_decay", 10.0);
  tc.momentum = cfg.get_double_or("train.momentum", 0.9);
  tc.weight_decay = cfg.get_double_or("train.weight_decay", 1e-4);
  tc.seed = cfg.get_u64_or("train.seed", 1);
  return tc;
}

}  // namespace

data::Splits make_data(const io::Config& cfg) {
  const std::string kind = cfg.get_or("data.kind", "classification");
  const uint64_t seed = cfg.get_u64_or("data.seed", 7);
  const int size = cfg.get_int_or("data.image_size", 16);

  data::Dataset pool;
  int64_t train_n, val_n, test_n;
  if (kind == "classification") {
    const int classes = cfg.get_int_or("data.classes", 10);
    train_n = cfg.get_int_or("data.train_count", 5000);
    val_n = cfg.get_int_or("data.val_count", 500);
    test_n = cfg.get_int_or("data.test_count", 1000);
    const int64_t total = train_n + val_n + test_n;
    const int per_class = static_cast<int>((total + classes - 1) / classes);
    pool = data::gen_synthetic_classification(seed, classes, size, per_class,
                                              cfg.get_double_or("data.noise", 0.45));
  } else if (kind == "translation") {
    train_n = cfg.get_int_or("data.train_count", 512);
    val_n = cfg.get_int_or("data.val_count", 64);
    test_n = cfg.get_int_or("data.test_count", 128);
    pool = data::gen_synthetic_translation(seed, size, static_cast<int>(train_n + val_n + test_n));
  } else if (kind == "binary") {
    pool = data::load_small_image_binary(cfg.get("data.path"), cfg.get_int_or("data.limit", -1));
    train_n = cfg.get_int_or("data.train_count", pool.size() * 8 / 10);
    val_n = cfg.get_int_or("data.val_count", pool.size() / 10);
    test_n = cfg.get_int_or("data.test_count", pool.size() - train_n - val_n);
  } else {
    fail(ErrorKind::Config, "data.kind must be classification, translation, or binary");
  }
  return data::partition(pool, train_n, val_n, test_n, seed);
}

NetworkSpec net_spec_from(const io::Config& cfg, const std::string& prefix,
                          const data::Dataset& sample) {
  const std::string kind = cfg.get_or(prefix + ".kind", "resnet");
  const auto blocks = cfg.get_int_list(prefix + ".blocks");
  const auto channels = cfg.get_int_list(prefix + ".channels");
  const int cardinality = cfg.get_int_or(prefix + ".cardinality", 1);
  const int in_ch = static_cast<int>(sample.input_shape[0]);
  const int in_size = static_cast<int>(sample.input_shape[1]);
  if (kind == "resnet") {
    if (sample.task != data::Task::Classification)
      fail(ErrorKind::Config, prefix + ": resnet spec needs a classification dataset");
    return NetworkSpec::resnet(blocks, channels, cardinality, sample.class_count, in_ch, in_size);
  }
  if (kind == "generator") {
    if (sample.task != data::Task::Translation)
      fail(ErrorKind::Config, prefix + ": generator spec needs a translation dataset");
    if (blocks.size() != 1 || channels.size() != 1)
      fail(ErrorKind::Config, prefix + ": generator takes a single blocks and channels value");
    const int stem = cfg.get_int_or(prefix + ".stem_channels", std::max(4, channels[0] / 2));
    return NetworkSpec::generator(blocks[0], channels[0], stem, in_ch, in_size);
  }
  fail(ErrorKind::Config, prefix + ".kind must be resnet or generator");
}

TrainConfig train_config_from(const io::Config& cfg) {
  TrainConfig tc;
  tc.variant = variant_from(cfg.get_or("train.variant", "scratch"));

  const std::string preset = cfg.get_or("train.preset", "none");
  Schedule sched{};
  bool have_sched = false;
  if (preset == "paper" || preset == "desk") {
    sched = preset_schedule(tc.variant, preset == "paper" ? 1.0
                                                          : cfg.get_double_or("train.preset_scale", 0.1));
    have_sched = true;
  } else if (preset != "none") {
    fail(ErrorKind::Config, "train.preset must be none, desk, or paper");
  }
  if (!have_sched && !cfg.has("train.epochs"))
    fail(ErrorKind::Config, "set train.epochs or choose a train.preset");

  tc.epochs = cfg.get_int_or("train.epochs", have_sched ? sched.epochs : 10);
  tc.fine_tune_epochs =
      cfg.get_int_or("train.fine_tune_epochs", have_sched ? sched.fine_tune_epochs : 0);
  tc.batch_size = cfg.get_int_or("train.batch_size", 32);
  tc.lr0 = cfg.get_double_or("train.lr0", have_sched ? sched.lr0 : 0.1);
  if (cfg.has("train.milestones"))
    tc.milestones = cfg.get_int_list("train.milestones");
  else if (have_sched)
    tc.milestones = sched.milestones;
  tc.lr_decay = cfg.get_double_or("train.lr_decay", 10.0);
  tc.ft_lr0 = cfg.get_double_or("train.ft_lr0", have_sched ? sched.ft_lr0 : tc.lr0 / 10.0);
  if (cfg.has("train.ft_milestones"))
    tc.ft_milestones = cfg.get_int_list("train.ft_milestones");
  else if (have_sched)
    tc.ft_milestones = sched.ft_milestones;
  tc.momentum = cfg.get_double_or("train.momentum", 0.9);
  tc.weight_decay = cfg.get_double_or("train.weight_decay", 1e-4);
  tc.distill.tau = cfg.get_double_or("train.tau", 6.0);
  tc.distill.alpha = cfg.get_double_or("train.alpha", 0.95);
  tc.distill.beta = cfg.get_double_or("train.beta", 0.75);
  tc.distill.penalty = ir_penalty_from(cfg.get_or("train.penalty", "l2"));
  tc.distill.soft_term_tau_squared = cfg.get_bool_or("train.kd_tau_squared", false);
  tc.seed = cfg.get_u64_or("train.seed", 1);
  // milestones that a preset scaled past the epoch count are clamped away
  std::erase_if(tc.milestones, [&](int m) { return m >= tc.epochs; });
  std::erase_if(tc.ft_milestones,
                [&](int m) { return tc.fine_tune_epochs == 0 || m >= tc.fine_tune_epochs; });
  tc.validate();
  return tc;
}

std::string metrics_csv(const RunReport& report) {
  std::string csv = "epoch,phase,lr,train_loss,val_acc\n";
  for (const auto& r : report.rows)
    csv += io::join_row({std::to_string(r.epoch), r.phase, io::fmt_float(r.lr),
                         io::fmt_float(r.train_loss), io::fmt_float(r.val_metric)}) +
           "\n";
  return csv;
}

TrainArtifacts run_train(const io::Config& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  const data::Splits data = make_data(cfg);
  const TrainConfig tc = train_config_from(cfg);
  const NetworkSpec student_spec = net_spec_from(cfg, "student", data.train);

  std::optional<SegmentedNetworkF> teacher;
  if (tc.variant != Variant::Scratch) teacher = load_teacher_checkpoint(cfg, data.train);

  TrainOutput out = train(tc, teacher ? &*teacher : nullptr, student_spec, data);

  io::write_text_file(out_dir + "/metrics.csv", metrics_csv(out.report));
  io::save_network(out.model, out_dir + "/model.litm");
  io::write_text_file(out_dir + "/config_echo.txt", cfg.echo());

  std::ostringstream summary;
  summary << "variant=" << variant_name(tc.variant) << '\n';
  summary << "spec=" << one_line_spec(student_spec) << '\n';
  summary << "weighted_layers=" << student_spec.weighted_layers() << '\n';
  summary << "param_count=" << out.model.parameter_count() << '\n';
  summary << "metric=" << (student_spec.kind == NetKind::Classifier ? "accuracy" : "per_pixel_error")
          << '\n';
  summary << "final_val=" << io::fmt_float(out.report.final_val) << '\n';
  summary << "final_test=" << io::fmt_float(out.report.final_test) << '\n';
  summary << "notes=" << join(out.report.notes, ';') << '\n';
  io::write_text_file(out_dir + "/summary.txt", summary.str());
  io::write_text_file(out_dir + "/timing.txt",
                      "wall_seconds=" + io::fmt_float(out.report.wall_seconds) + "\n");

  std::cout << "[train] variant=" << variant_name(tc.variant)
            << " final_val=" << io::fmt_float(out.report.final_val)
            << " final_test=" << io::fmt_float(out.report.final_test) << " out=" << out_dir
            << std::endl;
  return {out_dir, out.report.final_val, out.report.final_test};
}

void cmd_train(const std::string& config_path, const std::string& out_dir,
               std::optional<uint64_t> seed_override) {
  io::Config cfg = io::Config::parse_file(config_path);
  cfg.require_known(concat({kDataKeys, kNetKeys, kTrainKeys}));
  if (seed_override) cfg.set("train.seed", std::to_string(*seed_override));
  run_train(cfg, out_dir);
}

void cmd_sweep(const std::string& config_path, const std::string& out_dir, int jobs,
               std::optional<uint64_t> seed_override) {
  io::Config cfg = io::Config::parse_file(config_path);
  cfg.require_known(concat({kDataKeys, kNetKeys, kTrainKeys, kSweepKeys, kPruneKeys}));
  if (seed_override) cfg.set("train.seed", std::to_string(*seed_override));
  ensure_dir(out_dir);

  const std::string param = cfg.get("sweep.parameter");
  // default sensitivity grids; other parameters need explicit values
  if (!cfg.has("sweep.values")) {
    if (param == "alpha") cfg.set("sweep.values", "0,0.25,0.5,0.75,0.9,0.95,1");
    else if (param == "beta") cfg.set("sweep.values", "0,0.25,0.5,0.75,1");
  }
  const auto value_strs = cfg.get_str_list("sweep.values");
  const auto seeds = cfg.get_int_list("sweep.seeds");
  if (value_strs.empty() || seeds.empty())
    fail(ErrorKind::Config, "sweep needs non-empty sweep.values and sweep.seeds");

  // validate every grid point before any run starts
  for (const auto& v : value_strs) {
    if (param == "tau" || param == "alpha" || param == "beta") {
      DistillConfig d;
      double* slot = param == "tau" ? &d.tau : (param == "alpha" ? &d.alpha : &d.beta);
      *slot = std::stod(v);
      d.validate();
    } else if (param == "penalty") {
      ir_penalty_from(v);
    } else if (param == "sparsity") {
      const double s = std::stod(v);
      if (s < 0 || s >= 1) fail(ErrorKind::Config, "sparsity value " + v + " outside [0,1)");
    } else {
      fail(ErrorKind::Config, "sweep.parameter must be tau, alpha, beta, penalty, or sparsity");
    }
  }

  const data::Splits data = make_data(cfg);
  struct Row {
    std::string value;
    int seed;
    double val, test;
  };
  std::vector<Row> rows(value_strs.size() * seeds.size());

  if (param == "sparsity") {
    if (!cfg.has("prune.checkpoint"))
      fail(ErrorKind::Config, "sparsity sweep requires prune.checkpoint");
    const std::string ckpt = cfg.get("prune.checkpoint");
    if (!fs::exists(ckpt)) fail(ErrorKind::Config, "checkpoint '" + ckpt + "' does not exist");
    const bool global_scope = cfg.get_or("prune.scope", "per_tensor") == "global";
    const int ft = cfg.get_int_or("prune.fine_tune_epochs", 0);
    run_jobs(jobs, static_cast<int>(rows.size()), [&](int i) {
      const auto vi = static_cast<std::size_t>(i) / seeds.size();
      const auto si = static_cast<std::size_t>(i) % seeds.size();
      SegmentedNetworkF net = io::load_network(ckpt);
      PruneSpec ps{std::stod(value_strs[vi]), global_scope, ft};
      magnitude_prune(net, ps);
      if (ft > 0) {
        TrainConfig tc = prune_fine_tune_config(cfg, ft);
        tc.seed = static_cast<uint64_t>(seeds[si]);
        fine_tune_inplace(net, tc, data);
      }
      rows[static_cast<std::size_t>(i)] = {value_strs[vi], seeds[si], evaluate(net, data.val),
                                           evaluate(net, data.test)};
    });
  } else {
    // teacher loaded once per job to keep runs isolated
    const NetworkSpec student_spec = net_spec_from(cfg, "student", data.train);
    run_jobs(jobs, static_cast<int>(rows.size()), [&](int i) {
      const auto vi = static_cast<std::size_t>(i) / seeds.size();
      const auto si = static_cast<std::size_t>(i) % seeds.size();
      io::Config run_cfg = cfg;
      run_cfg.set("train." + param, value_strs[vi]);
      run_cfg.set("train.seed", std::to_string(seeds[si]));
      const TrainConfig tc = train_config_from(run_cfg);
      std::optional<SegmentedNetworkF> teacher;
      if (tc.variant != Variant::Scratch) teacher = load_teacher_checkpoint(run_cfg, data.train);
      TrainOutput out = train(tc, teacher ? &*teacher : nullptr, student_spec, data);
      rows[static_cast<std::size_t>(i)] = {value_strs[vi], seeds[si], out.report.final_val,
                                           out.report.final_test};
    });
  }

  std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
    if (param == "penalty") {
      if (a.value != b.value) return a.value < b.value;
    } else {
      const double av = std::stod(a.value), bv = std::stod(b.value);
      if (av != bv) return av < bv;
    }
    return a.seed < b.seed;
  });
  std::string csv = "value,seed,final_val_acc,final_test_acc\n";
  for (const auto& r : rows)
    csv += io::join_row({r.value, std::to_string(r.seed), io::fmt_float(r.val),
                         io::fmt_float(r.test)}) +
           "\n";
  io::write_text_file(out_dir + "/sweep.csv", csv);
  std::cout << "[sweep] parameter=" << param << " rows=" << rows.size() << " out=" << out_dir
            << std::endl;
}

void cmd_select_hparams(const std::string& config_path, const std::string& out_dir, int jobs) {
  io::Config cfg = io::Config::parse_file(config_path);
  cfg.require_known(concat({kDataKeys, kNetKeys, kTrainKeys, kSelectKeys}));
  ensure_dir(out_dir);

  const data::Splits data = make_data(cfg);
  const NetworkSpec student_spec = net_spec_from(cfg, "student", data.train);

  // the tau stage uses a small student model
  std::vector<int> small_blocks;
  if (cfg.has("select.small_blocks"))
    small_blocks = cfg.get_int_list("select.small_blocks");
  else
    small_blocks.assign(student_spec.sections.size(), 1);
  io::Config small_cfg = cfg;
  {
    std::string bl;
    for (std::size_t i = 0; i < small_blocks.size(); ++i)
      bl += (i ? "," : "") + std::to_string(small_blocks[i]);
    small_cfg.set("student.blocks", bl);
  }
  const NetworkSpec small_spec = net_spec_from(small_cfg, "student", data.train);

  SegmentedNetworkF teacher = load_teacher_checkpoint(cfg, data.train);

  std::vector<std::string> trace{"parameter,value,val_acc"};
  auto stage = [&](const std::string& param, const std::vector<double>& grid,
                   const std::map<std::string, double>& fixed, const std::string& variant) {
    std::vector<double> values = grid;
    std::sort(values.begin(), values.end());
    std::vector<double> accs(values.size());
    run_jobs(jobs, static_cast<int>(values.size()), [&](int i) {
      io::Config run_cfg = small_cfg;
      run_cfg.set("train.variant", variant);
      for (const auto& [k, v] : fixed) run_cfg.set("train." + k, io::fmt_float(v));
      run_cfg.set("train." + param, io::fmt_float(values[static_cast<std::size_t>(i)]));
      const TrainConfig tc = train_config_from(run_cfg);
      SegmentedNetworkF t = io::load_network(cfg.get("teacher.checkpoint"));
      TrainOutput out = train(tc, &t, small_spec, data);
      accs[static_cast<std::size_t>(i)] = out.report.final_val;
    });
    double best_v = values.front(), best_acc = -1;
    for (std::size_t i = 0; i < values.size(); ++i) {
      trace.push_back(io::join_row({param, io::fmt_float(values[i]), io::fmt_float(accs[i])}));
      if (accs[i] > best_acc) {
        best_acc = accs[i];
        best_v = values[i];
      }
    }
    return best_v;
  };

  const double tau = stage("tau", cfg.get_double_list("select.tau_grid"), {}, "kd");
  const double alpha = stage("alpha", cfg.get_double_list("select.alpha_grid"), {{"tau", tau}}, "kd");
  const double beta = stage("beta", cfg.get_double_list("select.beta_grid"),
                            {{"tau", tau}, {"alpha", alpha}}, "lit");
  (void)teacher;

  io::write_text_file(out_dir + "/trace.csv", join(trace, '\n') + "\n");
  std::ostringstream sel;
  sel << "tau=" << io::fmt_float(tau) << "\nalpha=" << io::fmt_float(alpha)
      << "\nbeta=" << io::fmt_float(beta) << "\n";
  io::write_text_file(out_dir + "/selected.txt", sel.str());
  std::cout << "[select-hparams] tau=" << io::fmt_float(tau) << " alpha=" << io::fmt_float(alpha)
            << " beta=" << io::fmt_float(beta) << " out=" << out_dir << std::endl;
}

void cmd_prune(const std::string& config_path, const std::string& out_dir,
               std::optional<uint64_t> seed_override) {
  io::Config cfg = io::Config::parse_file(config_path);
  cfg.require_known(concat({kDataKeys, kTrainKeys, kPruneKeys}));
  if (seed_override) cfg.set("train.seed", std::to_string(*seed_override));
  ensure_dir(out_dir);

  const std::string ckpt = cfg.get("prune.checkpoint");
  if (!fs::exists(ckpt)) fail(ErrorKind::Config, "checkpoint '" + ckpt + "' does not exist");
  const double sparsity = cfg.get_double_or("prune.sparsity", 0.5);
  if (sparsity < 0 || sparsity >= 1) fail(ErrorKind::Config, "prune.sparsity must be in [0,1)");
  const std::string scope = cfg.get_or("prune.scope", "per_tensor");
  if (scope != "per_tensor" && scope != "global")
    fail(ErrorKind::Config, "prune.scope must be per_tensor or global");
  const int ft = cfg.get_int_or("prune.fine_tune_epochs", 0);

  const data::Splits data = make_data(cfg);
  SegmentedNetworkF net = io::load_network(ckpt);
  const double achieved = magnitude_prune(net, {sparsity, scope == "global", ft});

  RunReport report;
  if (ft > 0) report = fine_tune_inplace(net, prune_fine_tune_config(cfg, ft), data);
  const double final_val = evaluate(net, data.val);
  const double final_test = evaluate(net, data.test);

  io::save_network(net, out_dir + "/pruned_model.litm");
  io::write_text_file(out_dir + "/metrics.csv", metrics_csv(report));
  io::write_text_file(out_dir + "/config_echo.txt", cfg.echo());
  std::ostringstream summary;
  summary << "requested_sparsity=" << io::fmt_float(sparsity) << '\n';
  summary << "achieved_sparsity=" << io::fmt_float(achieved) << '\n';
  summary << "scope=" << scope << '\n';
  summary << "final_val=" << io::fmt_float(final_val) << '\n';
  summary << "final_test=" << io::fmt_float(final_test) << '\n';
  io::write_text_file(out_dir + "/summary.txt", summary.str());
  std::cout << "[prune] sparsity=" << io::fmt_float(achieved)
            << " final_test=" << io::fmt_float(final_test) << " out=" << out_dir << std::endl;
}

void cmd_eval(const std::string& config_path, const std::string& out_dir) {
  io::Config cfg = io::Config::parse_file(config_path);
  cfg.require_known(concat({kDataKeys, kEvalKeys}));
  ensure_dir(out_dir);
  const std::string ckpt = cfg.get("eval.checkpoint");
  if (!fs::exists(ckpt)) fail(ErrorKind::Config, "checkpoint '" + ckpt + "' does not exist");
  const data::Splits data = make_data(cfg);
  const std::string split = cfg.get_or("eval.split", "test");
  const data::Dataset* d = split == "train" ? &data.train : (split == "val" ? &data.val : &data.test);
  if (split != "train" && split != "val" && split != "test")
    fail(ErrorKind::Config, "eval.split must be train, val, or test");
  SegmentedNetworkF net = io::load_network(ckpt);
  const double metric = evaluate(net, *d);
  io::write_text_file(out_dir + "/eval.txt",
                      "split=" + split + "\nmetric=" + io::fmt_float(metric) + "\n");
  std::cout << "[eval] split=" << split << " metric=" << io::fmt_float(metric) << std::endl;
}

void cmd_compare(const std::vector<std::string>& artifact_dirs, const std::string& out_dir) {
  if (artifact_dirs.empty()) fail(ErrorKind::Config, "compare needs at least one artifact directory");
  ensure_dir(out_dir);
  std::string csv = "variant,depth,params,accuracy\n";
  for (const auto& dir : artifact_dirs) {
    const std::string path = dir + "/summary.txt";
    if (!fs::exists(path)) fail(ErrorKind::Config, "no summary.txt in '" + dir + "'");
    io::Config summary = io::Config::parse_string(io::read_text_file(path), path);
    csv += io::join_row({summary.get("variant"), summary.get("weighted_layers"),
                         summary.get("param_count"), summary.get("final_test")}) +
           "\n";
  }
  io::write_text_file(out_dir + "/table.csv", csv);
  std::cout << csv;
}

}  // namespace lit::harness
