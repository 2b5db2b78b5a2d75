// fex/test_cli.cpp

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

// Drives the installed binary (path in $FEX_BIN) through every subcommand
// and checks the exit-code contract: 0 success, 1 check failure, 2 bad
// input.

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fex/dsp.hpp"
#include "fex/io.hpp"
#include "fex/tensor.hpp"

namespace {

namespace fs = std::filesystem;

std::string fex_binary() {
  const char* env = std::getenv("FEX_BIN");
  REQUIRE_MESSAGE(env != nullptr,
                  "FEX_BIN must hold the path of the fex executable");
  return env;
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "fex_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args, const fs::path& output_file = {}) {
  std::string cmd = fex_binary() + " " + args;
  if (output_file.empty()) {
    cmd += " > /dev/null 2>&1";
  } else {
    cmd += " > " + output_file.string() + " 2>&1";
  }
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE_MESSAGE(bool(is), ("cannot open " + p.string()));
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

fs::path write_tone_wav(const std::string& name, double hz, double seconds,
                        double amplitude) {
  fex::Waveform w;
  w.sample_rate = 16000.0;
  w.samples.resize(static_cast<std::size_t>(seconds * 16000.0));
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = amplitude * std::sin(2.0 * M_PI * hz *
                                        static_cast<double>(i) / 16000.0);
  }
  const fs::path p = work_dir() / name;
  fex::write_wav(p.string(), w);
  return p;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += (c == '\n') ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("params prints the frozen front-end summary") {
  const fs::path out = work_dir() / "params.txt";
  CHECK(run_cli("params", out) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("log_mel,0,1385440,160,640,80,2560,25") !=
        std::string::npos);
  CHECK(text.find("scf,40255,12402975,160,640,750,24000,25") !=
        std::string::npos);
  CHECK(text.find("wav2vec_fe,4724736,4987392,640,640,512,512,25") !=
        std::string::npos);
  CHECK(text.find("generic2d,79328,2176992,640,640,4096,4096,25") !=
        std::string::npos);

  const fs::path csv = work_dir() / "params.csv";
  CHECK(run_cli("params --frontend wav2vec_fe --out " + csv.string()) == 0);
  CHECK(slurp(csv).find("wav2vec_fe,4724736") != std::string::npos);
}

TEST_CASE("extract writes log mel features for a known waveform") {
  const fs::path wav = write_tone_wav("silence.wav", 0.0, 1.0, 0.0);
  const fs::path ften = work_dir() / "silence.ften";
  const fs::path log = work_dir() / "extract.log";
  CHECK(run_cli("extract --input " + wav.string() + " --frontend log_mel" +
                    " --out " + ften.string(),
                log) == 0);
  CHECK(slurp(log).find("16000 samples -> 98 x 80 features") !=
        std::string::npos);

  const fex::Tensor feat = fex::read_feature_file(ften.string());
  REQUIRE(feat.rank() == 2);
  CHECK(feat.extent(0) == 98);
  CHECK(feat.extent(1) == 80);
  // Silence: every mel power is 0, so every cell is log(epsilon).
  for (double v : feat.values()) {
    CHECK(v == doctest::Approx(std::log(1e-10)).epsilon(1e-6));
  }
}

TEST_CASE("extract with a random filterbank is seed-deterministic") {
  const fs::path wav = write_tone_wav("tone1k.wav", 1000.0, 0.5, 0.25);
  const fs::path cfg = work_dir() / "small_g2d.cfg";
  write_text(cfg, "fb_filters=16\nchannels_2d=4\n");
  const auto extract = [&](const std::string& name, int seed) {
    const fs::path out = work_dir() / name;
    const int rc = run_cli("extract --input " + wav.string() +
                           " --frontend generic2d --config " + cfg.string() +
                           " --seed " + std::to_string(seed) + " --out " +
                           out.string());
    CHECK(rc == 0);
    return out;
  };
  const std::string a = slurp(extract("g2d_a.ften", 3));
  const std::string b = slurp(extract("g2d_b.ften", 3));
  const std::string c = slurp(extract("g2d_c.ften", 4));
  CHECK(a == b);       // identical seed: byte-identical artifact
  CHECK(a != c);       // the seed drives the random filterbank
}

TEST_CASE("extract supports the spectrogram first layer") {
  const fs::path wav = work_dir() / "tone1k.wav";  // written above
  const fs::path cfg = work_dir() / "stft_g2d.cfg";
  write_text(cfg,
             "first_layer=stft_magnitude\nstride2_layer_count=2\n"
             "n_2d_layers=3\nchannels_2d=8\n");
  const fs::path out = work_dir() / "stft.ften";
  const fs::path log = work_dir() / "stft_extract.log";
  CHECK(run_cli("extract --input " + wav.string() +
                    " --frontend generic2d --config " + cfg.string() +
                    " --out " + out.string(),
                log) == 0);
  // 8000 samples -> 48 STFT frames -> two stride-2 layers -> 12 frames of
  // 257 bins x 8 channels.
  const fex::Tensor feat = fex::read_feature_file(out.string());
  CHECK(feat.extent(0) == 12);
  CHECK(feat.extent(1) == 257 * 8);
}

TEST_CASE("gradcheck passes, and the corrupted control fails with exit 1") {
  const fs::path log = work_dir() / "gradcheck.log";
  CHECK(run_cli("gradcheck", log) == 0);
  CHECK(slurp(log).find("all cases passed") != std::string::npos);

  const fs::path bad = work_dir() / "gradcheck_bad.log";
  CHECK(run_cli("gradcheck --corrupt-gradients", bad) == 1);
  CHECK(slurp(bad).find("FAIL") != std::string::npos);
}

TEST_CASE("mask round-trips a wav through STFT-domain masking") {
  const fs::path wav = write_tone_wav("mask_in.wav", 440.0, 1.0, 0.25);
  const fs::path out = work_dir() / "mask_out.wav";
  CHECK(run_cli("mask --input " + wav.string() + " --out " + out.string() +
                " --seed 9") == 0);
  const fex::Waveform masked = fex::read_wav(out.string());
  CHECK(masked.samples.size() == 16000);
  CHECK(masked.sample_rate == 16000.0);
}

TEST_CASE("analyze reports a gammatone bank without a checkpoint") {
  const fs::path dir = work_dir() / "gt_analysis";
  const fs::path log = work_dir() / "analyze.log";
  CHECK(run_cli("analyze --gammatone-filters 12 --gammatone-kernel 256"
                " --out-dir " +
                    dir.string() + " --seed 5",
                log) == 0);
  const std::string text = slurp(log);
  CHECK(text.find("filters: 12") != std::string::npos);
  CHECK(text.find("bandpass_like:") != std::string::npos);
  CHECK(count_lines(slurp(dir / "filters.csv")) == 13);  // header + 12 rows
  CHECK(fs::exists(dir / "response_learned.csv"));
  CHECK(fs::exists(dir / "response_sorted.csv"));
}

TEST_CASE("train-toy writes a report and a checkpoint analyze can read") {
  const fs::path cfg = work_dir() / "tiny_train.cfg";
  write_text(cfg,
             "fb_filters=8\nchannels_2d=4\ntrain_size=2\ndev_size=1\n"
             "max_target_len=1\n");
  const fs::path report = work_dir() / "report.jsonl";
  const fs::path ckpt = work_dir() / "toy.fxcp";
  const fs::path log = work_dir() / "train.log";
  CHECK(run_cli("train-toy --frontend generic2d --epochs 1 --batch 2"
                " --no-masking --no-speed-perturb --config " +
                    cfg.string() + " --out " + report.string() +
                    " --checkpoint-out " + ckpt.string() + " --seed 6",
                log) == 0);
  CHECK(slurp(log).find("final: loss") != std::string::npos);
  const std::string lines = slurp(report);
  CHECK(lines.find("\"summary\":true") != std::string::npos);
  CHECK(lines.find("final_dev_accuracy") != std::string::npos);

  const fs::path dir = work_dir() / "toy_analysis";
  CHECK(run_cli("analyze --checkpoint " + ckpt.string() + " --out-dir " +
                dir.string()) == 0);
  CHECK(count_lines(slurp(dir / "filters.csv")) == 9);  // header + 8 rows
}

TEST_CASE("bad inputs exit with code 2") {
  CHECK(run_cli("extract --input " + (work_dir() / "missing.wav").string() +
                " --out " + (work_dir() / "x.ften").string()) == 2);

  const fs::path wav = work_dir() / "tone1k.wav";
  CHECK(run_cli("extract --input " + wav.string() +
                " --frontend nonsense --out " +
                (work_dir() / "y.ften").string()) == 2);

  const fs::path fake = work_dir() / "fake.wav";
  write_text(fake, "this is not a RIFF file");
  CHECK(run_cli("extract --input " + fake.string() + " --out " +
                (work_dir() / "z.ften").string()) == 2);

  CHECK(run_cli("params --config " +
                (work_dir() / "missing.cfg").string()) == 2);
  CHECK(run_cli("params --definitely-not-a-flag") == 2);
  CHECK(run_cli("") == 2);  // a subcommand is required
}
