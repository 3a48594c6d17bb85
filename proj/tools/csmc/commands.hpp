#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace csmc::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kParse = 3, kDivergence = 4 };

struct MakeOperatorArgs {
  std::size_t block = 16;
  double cr_max = 0.2;
  std::uint64_t seed = 1;
  std::string out;
};

struct MakeDatasetArgs {
  std::string out_dir;
  std::size_t clips = 4;
  std::size_t frames = 8;
  std::size_t height = 64;
  std::size_t width = 64;
  long dy = 1;
  long dx = 2;
  std::size_t jitter = 0;
  std::size_t block = 16;
  std::uint64_t seed = 1;
};

struct SampleArgs {
  std::string op_path;
  double cr = 0.1;
  std::string in;
  std::string out;
};

struct ReconstructArgs {
  std::string model;
  std::string meas;
  std::string out;
  std::string format = "pgm";
  std::optional<std::string> gt;
  std::optional<std::string> op_path;
  bool no_mhme = false;
};

struct TrainArgs {
  std::string config;
  std::string out;
  std::optional<std::string> log;
};

struct EvalArgs {
  std::string model;
  std::vector<std::string> inputs;
  std::vector<double> crs;
  bool no_mhme = false;
  std::size_t first_frame = 0;
};

int make_operator(const MakeOperatorArgs& args);
int make_dataset(const MakeDatasetArgs& args);
int sample(const SampleArgs& args);
int reconstruct(const ReconstructArgs& args);
int train(const TrainArgs& args);
int eval(const EvalArgs& args);

}  // namespace csmc::cli
