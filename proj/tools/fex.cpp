// tools/fex.cpp

// Copyright 2026 The fex authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver. Subcommands:
//   extract    waveform -> feature tensor file
//   params     parameter counts / strides / dims for the front-ends
//   gradcheck  finite-difference audit of the autodiff ops
//   train-toy  CTC training run on the synthetic tone task
//   analyze    first-layer filter response tables and ordering statistics
//   mask       STFT-domain masking applied to a wav file
//
// Exit codes: 0 success, 1 a check or training run failed, 2 bad input.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fex/analysis.hpp"
#include "fex/dsp.hpp"
#include "fex/frontends.hpp"
#include "fex/io.hpp"
#include "fex/specaugment.hpp"
#include "fex/tensor.hpp"
#include "fex/training.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitBadInput = 2;

std::size_t get_size(const std::map<std::string, std::string>& kv,
                     const std::string& key, std::size_t fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  return static_cast<std::size_t>(std::stoull(it->second));
}

double get_double(const std::map<std::string, std::string>& kv,
                  const std::string& key, double fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  return std::stod(it->second);
}

bool get_bool(const std::map<std::string, std::string>& kv,
              const std::string& key, bool fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::invalid_argument("config key " + key + " must be a boolean, got " +
                              it->second);
}

// Builds a front-end configuration from a name plus flat key=value settings.
// Unknown names are input errors; unknown keys are ignored so one config file
// can drive several subcommands.
fex::FrontendConfig make_frontend_config(
    const std::string& name, const std::map<std::string, std::string>& kv) {
  if (name == "log_mel") {
    fex::LogMelConfig c;
    c.window = get_size(kv, "window", c.window);
    c.hop = get_size(kv, "hop", c.hop);
    c.n_mels = get_size(kv, "n_mels", c.n_mels);
    c.log_epsilon = get_double(kv, "log_epsilon", c.log_epsilon);
    return c;
  }
  if (name == "scf") {
    fex::ScfConfig c;
    c.n_filters = get_size(kv, "n_filters", c.n_filters);
    c.kernel = get_size(kv, "kernel", c.kernel);
    c.stride = get_size(kv, "stride", c.stride);
    c.depth_filters = get_size(kv, "depth_filters", c.depth_filters);
    c.depth_kernel = get_size(kv, "depth_kernel", c.depth_kernel);
    c.depth_stride = get_size(kv, "depth_stride", c.depth_stride);
    c.root_power = get_double(kv, "root_power", c.root_power);
    return c;
  }
  if (name == "wav2vec_fe") {
    fex::Wav2vecConfig c;
    c.channels = get_size(kv, "channels", c.channels);
    return c;
  }
  if (name == "generic2d") {
    fex::Generic2dConfig c;
    auto it = kv.find("first_layer");
    if (it != kv.end()) {
      if (it->second == "stft_magnitude") {
        c.first_layer = fex::FirstLayer::kStftMagnitude;
      } else if (it->second == "stft_re_im") {
        c.first_layer = fex::FirstLayer::kStftReIm;
      } else if (it->second == "filterbank") {
        c.first_layer = fex::FirstLayer::kFilterbank;
      } else {
        throw std::invalid_argument("unknown first_layer: " + it->second);
      }
    }
    c.window = get_size(kv, "window", c.window);
    c.hop = get_size(kv, "hop", c.hop);
    c.fb_filters = get_size(kv, "fb_filters", c.fb_filters);
    c.fb_kernel = get_size(kv, "fb_kernel", c.fb_kernel);
    c.fb_stride = get_size(kv, "fb_stride", c.fb_stride);
    c.fb_trainable = get_bool(kv, "fb_trainable", c.fb_trainable);
    it = kv.find("fb_init");
    if (it != kv.end()) {
      if (it->second == "random") {
        c.fb_init = fex::FilterbankInit::kRandom;
      } else if (it->second == "gammatone") {
        c.fb_init = fex::FilterbankInit::kGammatone;
      } else {
        throw std::invalid_argument("unknown fb_init: " + it->second);
      }
    }
    c.fb_f_min = get_double(kv, "fb_f_min", c.fb_f_min);
    c.fb_f_max = get_double(kv, "fb_f_max", c.fb_f_max);
    c.n_2d_layers = get_size(kv, "n_2d_layers", c.n_2d_layers);
    c.stride2_layer_count =
        get_size(kv, "stride2_layer_count", c.stride2_layer_count);
    c.channels_2d = get_size(kv, "channels_2d", c.channels_2d);
    return c;
  }
  throw std::invalid_argument(
      "unknown frontend: " + name +
      " (expected log_mel, scf, wav2vec_fe, or generic2d)");
}

fex::MaskSpec make_mask_spec(const std::map<std::string, std::string>& kv) {
  fex::MaskSpec spec;
  spec.max_time_masks = get_size(kv, "max_time_masks", spec.max_time_masks);
  spec.max_time_width = get_size(kv, "max_time_width", spec.max_time_width);
  spec.max_feature_masks =
      get_size(kv, "max_feature_masks", spec.max_feature_masks);
  spec.max_feature_width =
      get_size(kv, "max_feature_width", spec.max_feature_width);
  return spec;
}

// Copies checkpoint tensors into the model's parameters by name. Names
// missing from the model are input errors: a typo should not pass silently.
void load_into_frontend(fex::FrontendModel& model,
                        const std::vector<fex::NamedParam>& source) {
  for (const auto& s : source) {
    fex::Tensor& dst = model.param(s.name);
    if (dst.shape() != s.tensor.shape()) {
      throw std::invalid_argument(
          "checkpoint parameter " + s.name + " has shape " +
          fex::shape_to_string(s.tensor.shape()) + ", model expects " +
          fex::shape_to_string(dst.shape()));
    }
    dst.values_mut() = s.tensor.values();
  }
}

// Forward square with a deliberately wrong backward (factor 3 instead of 2).
// Negative control: the gradient audit must catch it.
fex::Tensor square_with_broken_grad(const fex::Tensor& x) {
  auto in = x.node();
  auto node = std::make_shared<fex::detail::TensorNode>();
  node->shape = x.shape();
  node->values.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    node->values[i] = in->values[i] * in->values[i];
  }
  node->requires_grad = in->requires_grad;
  if (in->requires_grad) {
    node->parents = {in};
    node->backprop = [in](const std::vector<double>& g) {
      in->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        in->grad[i] += g[i] * 3.0 * in->values[i];
      }
    };
  }
  return fex::Tensor::wrap(node);
}

struct CommonOptions {
  std::uint64_t seed = 1;
  std::string config_path;

  std::map<std::string, std::string> config() const {
    if (config_path.empty()) return {};
    return fex::read_config_file(config_path);
  }
};

int run_extract(const CommonOptions& common, const std::string& input,
                const std::string& frontend, const std::string& checkpoint,
                const std::string& out) {
  auto kv = common.config();
  const fex::FrontendConfig cfg = make_frontend_config(frontend, kv);
  fex::validate_config(cfg);
  fex::RandomSource rng(common.seed);
  fex::FrontendModel model(cfg, rng);
  if (!checkpoint.empty()) {
    load_into_frontend(model, fex::load_checkpoint(checkpoint));
  }
  const fex::Waveform w = fex::read_wav(input);
  const fex::FeatureTensor feat = model.forward(w);
  fex::write_feature_file(out, feat.values);
  std::cout << frontend << ": " << w.samples.size() << " samples -> "
            << feat.frames << " x " << feat.dim << " features -> " << out
            << "\n";
  return kExitOk;
}

int run_params(const CommonOptions& common, const std::string& frontend,
               const std::string& out) {
  auto kv = common.config();
  std::vector<fex::FrontendConfig> configs;
  if (frontend.empty()) {
    configs.push_back(fex::LogMelConfig{});
    configs.push_back(fex::ScfConfig{});
    configs.push_back(fex::Wav2vecConfig{});
    configs.push_back(fex::Generic2dConfig{});
  } else {
    configs.push_back(make_frontend_config(frontend, kv));
  }
  for (const auto& c : configs) fex::validate_config(c);
  if (out.empty()) {
    fex::write_frontend_summary(std::cout, configs);
  } else {
    std::ofstream os(out);
    if (!os) throw std::invalid_argument("cannot open " + out);
    fex::write_frontend_summary(os, configs);
    std::cout << "wrote " << out << "\n";
  }
  return kExitOk;
}

int run_gradcheck(const CommonOptions& common, bool corrupt) {
  fex::RandomSource rng(common.seed);
  struct Case {
    std::string name;
    std::function<fex::Tensor(const fex::Tensor&)> f;
    fex::Tensor x;
    double fd_epsilon;
  };
  auto randn = [&rng](fex::Shape shape) {
    fex::Tensor t = fex::Tensor::zeros(std::move(shape), true);
    for (double& v : t.values_mut()) v = 0.5 * rng.normal();
    return t;
  };

  std::vector<Case> cases;
  {
    fex::Tensor w = randn({3, 2, 5});
    cases.push_back({"conv1d_input",
                     [w](const fex::Tensor& x) {
                       return fex::sum(fex::conv1d(x, w, nullptr, 2,
                                                   fex::Padding::kValid));
                     },
                     randn({2, 17}), 1e-4});
  }
  {
    fex::Tensor x_fixed = randn({2, 17});
    cases.push_back({"conv1d_weight",
                     [x_fixed](const fex::Tensor& w) {
                       return fex::sum(fex::conv1d(x_fixed, w, nullptr, 2,
                                                   fex::Padding::kValid));
                     },
                     randn({3, 2, 5}), 1e-4});
  }
  {
    fex::Tensor w = randn({2, 1, 3, 3});
    cases.push_back({"conv2d_same_relu",
                     [w](const fex::Tensor& x) {
                       return fex::sum(fex::relu(fex::conv2d(
                           x, w, nullptr, 2, 1, fex::Padding::kSame)));
                     },
                     randn({1, 9, 7}), 1e-4});
  }
  {
    fex::Tensor w = randn({3, 4});
    cases.push_back({"depthwise_conv1d",
                     [w](const fex::Tensor& x) {
                       return fex::sum(fex::depthwise_conv1d(x, w, nullptr, 2));
                     },
                     randn({2, 13}), 1e-4});
  }
  {
    fex::Tensor gain = randn({6});
    fex::Tensor offset = randn({6});
    cases.push_back({"layer_norm",
                     [gain, offset](const fex::Tensor& x) {
                       return fex::sum(fex::layer_norm(x, gain, offset, 1e-5));
                     },
                     randn({4, 6}), 1e-5});
  }
  {
    fex::Tensor gain = randn({4});
    fex::Tensor offset = randn({4});
    cases.push_back({"group_norm",
                     [gain, offset](const fex::Tensor& x) {
                       return fex::sum(
                           fex::group_norm(x, 2, gain, offset, 1e-5));
                     },
                     randn({4, 5}), 1e-5});
  }
  cases.push_back({"gelu",
                   [](const fex::Tensor& x) { return fex::sum(fex::gelu(x)); },
                   randn({10}), 1e-5});
  cases.push_back({"magnitude_root",
                   [](const fex::Tensor& x) {
                     return fex::sum(fex::magnitude_root(x, 2.5));
                   },
                   randn({10}), 1e-5});
  {
    std::vector<std::size_t> target = {1, 2};
    cases.push_back({"ctc_over_log_softmax",
                     [target](const fex::Tensor& x) {
                       return fex::ctc_loss(fex::log_softmax_rows(x), target);
                     },
                     randn({6, 3}), 1e-5});
  }
  if (corrupt) {
    cases.push_back({"square_negative_control",
                     [](const fex::Tensor& x) {
                       return fex::sum(square_with_broken_grad(x));
                     },
                     randn({8}), 1e-5});
  }

  bool all_passed = true;
  for (auto& c : cases) {
    const fex::GradCheckReport report =
        fex::grad_check(c.f, c.x, c.fd_epsilon, 1e-4);
    all_passed = all_passed && report.passed;
    std::cout << (report.passed ? "PASS" : "FAIL") << "  " << c.name
              << "  max_rel_error=" << report.max_rel_error << "  coords="
              << report.coords_checked << "\n";
  }
  std::cout << (all_passed ? "gradcheck: all cases passed"
                           : "gradcheck: FAILURES above")
            << "\n";
  return all_passed ? kExitOk : kExitCheckFailed;
}

int run_train_toy(const CommonOptions& common, const std::string& frontend,
                  std::size_t epochs, std::size_t batch,
                  std::size_t encoder_hidden, bool no_speed_perturb,
                  bool no_masking, const std::string& out,
                  const std::string& checkpoint_out) {
  auto kv = common.config();
  const fex::FrontendConfig cfg = make_frontend_config(frontend, kv);
  fex::validate_config(cfg);

  fex::ToyTaskConfig task;
  task.seed = get_size(kv, "task_seed", static_cast<std::size_t>(task.seed));
  task.train_size = get_size(kv, "train_size", task.train_size);
  task.dev_size = get_size(kv, "dev_size", task.dev_size);
  task.max_target_len = get_size(kv, "max_target_len", task.max_target_len);
  task.segment_ms = get_size(kv, "segment_ms", task.segment_ms);
  task.gap_ms = get_size(kv, "gap_ms", task.gap_ms);
  task.snr_db = get_double(kv, "snr_db", task.snr_db);

  fex::TrainToyOptions opts;
  opts.epochs = epochs;
  opts.batch = batch;
  opts.encoder_hidden = encoder_hidden;
  opts.speed_perturb = !no_speed_perturb;
  opts.stft_masking = !no_masking;

  const fex::MaskSpec masks = make_mask_spec(kv);
  fex::RandomSource rng(common.seed);
  fex::PipelineModel model(cfg, task.num_symbols, opts.encoder_hidden, rng);

  fex::TrainingReport report;
  try {
    report = fex::train_toy(model, task, opts, masks, rng);
  } catch (const std::runtime_error& e) {
    std::cerr << "training failed: " << e.what() << "\n";
    return kExitCheckFailed;
  }

  for (const auto& ep : report.epochs) {
    std::cout << "epoch " << ep.epoch << "  loss " << ep.mean_loss
              << "  dev_acc " << ep.dev_accuracy << "  lr " << ep.lr << "\n";
  }
  std::cout << "final: loss " << report.final_epoch_loss << " (first "
            << report.first_epoch_loss << "), dev accuracy "
            << report.final_dev_accuracy << "\n";

  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw std::invalid_argument("cannot open " + out);
    for (const auto& ep : report.epochs) {
      nlohmann::json j;
      j["epoch"] = ep.epoch;
      j["mean_loss"] = ep.mean_loss;
      j["dev_symbol_error_rate"] = ep.dev_symbol_error_rate;
      j["dev_accuracy"] = ep.dev_accuracy;
      j["lr"] = ep.lr;
      os << j.dump() << "\n";
    }
    nlohmann::json j;
    j["summary"] = true;
    j["frontend"] = frontend;
    j["first_epoch_loss"] = report.first_epoch_loss;
    j["final_epoch_loss"] = report.final_epoch_loss;
    j["final_dev_accuracy"] = report.final_dev_accuracy;
    os << j.dump() << "\n";
    std::cout << "wrote " << out << "\n";
  }
  if (!checkpoint_out.empty()) {
    fex::save_checkpoint(checkpoint_out, model.parameters());
    std::cout << "wrote " << checkpoint_out << "\n";
  }
  return kExitOk;
}

int run_analyze(const CommonOptions& common, const std::string& checkpoint,
                const std::string& param_name, std::size_t gammatone_filters,
                std::size_t gammatone_kernel, const std::string& out_dir,
                std::size_t shuffles) {
  fex::FilterBank bank;
  if (!checkpoint.empty()) {
    const auto params = fex::load_checkpoint(checkpoint);
    std::string wanted = param_name;
    if (wanted.empty()) {
      // Default to whichever learned first layer the checkpoint holds.
      for (const auto& p : params) {
        if (p.name == "g2d.first.weight" || p.name == "scf.l1.weight") {
          wanted = p.name;
          break;
        }
      }
      if (wanted.empty()) {
        throw std::invalid_argument(
            "checkpoint has no first-layer filterbank; pass --param");
      }
    }
    const fex::NamedParam* found = nullptr;
    for (const auto& p : params) {
      if (p.name == wanted) found = &p;
    }
    if (found == nullptr) {
      throw std::invalid_argument("parameter " + wanted +
                                  " not found in checkpoint");
    }
    fex::Tensor t = found->tensor;
    if (t.rank() == 3) {
      // conv1d weights [C_out x 1 x K] analyzed as single-channel FIRs.
      if (t.extent(1) != 1) {
        throw std::invalid_argument("parameter " + wanted +
                                    " has multiple input channels");
      }
      t = fex::reshape(t, {t.extent(0), t.extent(2)});
    }
    if (t.rank() != 2) {
      throw std::invalid_argument("parameter " + wanted +
                                  " is not a filterbank");
    }
    bank.filters = t;
    bank.origin = fex::FilterOrigin::kRandom;
  } else {
    bank = fex::gammatone_filterbank(gammatone_filters, gammatone_kernel,
                                     16000.0, 50.0, 7800.0);
  }

  const auto analyses = fex::analyze_filters(bank);
  const double nyquist = bank.sample_rate / 2.0;
  std::size_t bandpass = 0;
  std::vector<double> peaks;
  for (const auto& a : analyses) {
    if (fex::is_bandpass_like(a, nyquist)) ++bandpass;
    peaks.push_back(a.peak_frequency);
  }
  fex::RandomSource rng(common.seed);
  const fex::OrderingStatistic stat =
      fex::ordering_statistic(peaks, rng, shuffles);

  std::filesystem::create_directories(out_dir);
  const auto sorted = fex::sort_filters(analyses);
  std::vector<std::size_t> learned(analyses.size());
  for (std::size_t i = 0; i < learned.size(); ++i) learned[i] = i;
  {
    std::ofstream os(out_dir + "/filters.csv");
    fex::write_filter_table(os, analyses);
  }
  {
    std::ofstream os(out_dir + "/response_learned.csv");
    fex::write_response_table(os, analyses, learned);
  }
  {
    std::ofstream os(out_dir + "/response_sorted.csv");
    fex::write_response_table(os, analyses, sorted);
  }

  std::cout << "filters: " << analyses.size() << "\n";
  std::cout << "bandpass_like: " << bandpass << " ("
            << (100.0 * static_cast<double>(bandpass) /
                static_cast<double>(analyses.size()))
            << "%)\n";
  std::cout << "peak ordering: max_run " << stat.max_run << ", mean_run "
            << stat.mean_run << ", p_value " << stat.p_value << "\n";
  std::cout << "wrote " << out_dir << "/{filters,response_learned,"
            << "response_sorted}.csv\n";
  return kExitOk;
}

int run_mask(const CommonOptions& common, const std::string& input,
             const std::string& out, std::size_t window, std::size_t hop) {
  auto kv = common.config();
  const fex::MaskSpec spec = make_mask_spec(kv);
  fex::RandomSource rng(common.seed);
  const fex::Waveform w = fex::read_wav(input);
  const fex::Waveform masked =
      fex::apply_stft_masks(w, spec, rng, window, hop);
  fex::write_wav(out, masked);
  std::cout << "masked " << input << " -> " << out << " (" << w.samples.size()
            << " samples)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feature-extraction front-ends: extraction, training, analysis"};
  app.require_subcommand(1);
  // Let --seed / --config appear after the subcommand as well.
  app.fallthrough();

  CommonOptions common;
  app.add_option("--seed", common.seed, "random seed (default 1)");
  app.add_option("--config", common.config_path,
                 "key=value configuration file");

  auto* cmd_extract = app.add_subcommand("extract", "wav -> feature file");
  std::string in_path, frontend = "log_mel", ckpt_path, out_path;
  cmd_extract->add_option("--input", in_path, "input wav (PCM16 mono 16 kHz)")
      ->required();
  cmd_extract->add_option("--frontend", frontend,
                          "log_mel | scf | wav2vec_fe | generic2d");
  cmd_extract->add_option("--checkpoint", ckpt_path,
                          "load front-end weights from a checkpoint");
  cmd_extract->add_option("--out", out_path, "output feature file")->required();

  auto* cmd_params = app.add_subcommand("params", "front-end summary table");
  std::string params_frontend, params_out;
  cmd_params->add_option("--frontend", params_frontend,
                         "single front-end (default: all four)");
  cmd_params->add_option("--out", params_out,
                         "write CSV here instead of stdout");

  auto* cmd_grad = app.add_subcommand("gradcheck", "finite-difference audit");
  bool corrupt = false;
  cmd_grad
      ->add_flag("--corrupt-gradients", corrupt,
                 "inject a wrong backward pass (the audit must fail)")
      ->group("");  // hidden

  auto* cmd_train = app.add_subcommand("train-toy", "toy CTC training run");
  std::string train_frontend = "generic2d";
  std::size_t epochs = 30, batch = 8, encoder_hidden = 128;
  bool no_speed = false, no_mask = false;
  std::string train_out, ckpt_out;
  cmd_train->add_option("--frontend", train_frontend,
                        "log_mel | scf | wav2vec_fe | generic2d");
  cmd_train->add_option("--epochs", epochs, "training epochs");
  cmd_train->add_option("--batch", batch, "utterances per step");
  cmd_train->add_option("--encoder-hidden", encoder_hidden,
                        "stub encoder hidden width");
  cmd_train->add_flag("--no-speed-perturb", no_speed, "disable 0.9/1.0/1.1");
  cmd_train->add_flag("--no-masking", no_mask, "disable STFT-domain masks");
  cmd_train->add_option("--out", train_out, "JSONL training report");
  cmd_train->add_option("--checkpoint-out", ckpt_out, "save weights here");

  auto* cmd_analyze = app.add_subcommand("analyze", "filter response tables");
  std::string an_ckpt, an_param, an_out_dir = "analysis";
  std::size_t gt_filters = 128, gt_kernel = 256, shuffles = 10000;
  cmd_analyze->add_option("--checkpoint", an_ckpt,
                          "checkpoint holding a learned filterbank");
  cmd_analyze->add_option("--param", an_param,
                          "filterbank parameter name in the checkpoint");
  cmd_analyze->add_option("--gammatone-filters", gt_filters,
                          "gammatone bank size when no checkpoint given");
  cmd_analyze->add_option("--gammatone-kernel", gt_kernel,
                          "gammatone kernel length");
  cmd_analyze->add_option("--shuffles", shuffles,
                          "permutations for the ordering null");
  cmd_analyze->add_option("--out-dir", an_out_dir, "output directory");

  auto* cmd_mask = app.add_subcommand("mask", "STFT-domain masking of a wav");
  std::string mask_in, mask_out;
  std::size_t mask_window = 400, mask_hop = 160;
  cmd_mask->add_option("--input", mask_in, "input wav")->required();
  cmd_mask->add_option("--out", mask_out, "output wav")->required();
  cmd_mask->add_option("--window", mask_window, "STFT window");
  cmd_mask->add_option("--hop", mask_hop, "STFT hop");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (cmd_extract->parsed()) {
      return run_extract(common, in_path, frontend, ckpt_path, out_path);
    }
    if (cmd_params->parsed()) {
      return run_params(common, params_frontend, params_out);
    }
    if (cmd_grad->parsed()) {
      return run_gradcheck(common, corrupt);
    }
    if (cmd_train->parsed()) {
      return run_train_toy(common, train_frontend, epochs, batch,
                           encoder_hidden, no_speed, no_mask, train_out,
                           ckpt_out);
    }
    if (cmd_analyze->parsed()) {
      return run_analyze(common, an_ckpt, an_param, gt_filters, gt_kernel,
                         an_out_dir, shuffles);
    }
    if (cmd_mask->parsed()) {
      return run_mask(common, mask_in, mask_out, mask_window, mask_hop);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}
