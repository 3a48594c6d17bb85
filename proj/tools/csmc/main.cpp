#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "csmc/error.hpp"

namespace cli = csmc::cli;

int main(int argc, char** argv) {
  CLI::App app{"Block compressive sensing video codec: sampling, reconstruction and training"};
  app.require_subcommand(1);

  cli::MakeOperatorArgs op_args;
  auto* op_cmd = app.add_subcommand("make-operator", "Generate a Gaussian measurement operator file");
  op_cmd->add_option("--block", op_args.block, "Block size B")->capture_default_str();
  op_cmd->add_option("--cr-max", op_args.cr_max, "Largest compression ratio the operator serves")->capture_default_str();
  op_cmd->add_option("--seed", op_args.seed, "Generator seed")->capture_default_str();
  op_cmd->add_option("--out", op_args.out, "Output operator file")->required();

  cli::MakeDatasetArgs ds_args;
  auto* ds_cmd = app.add_subcommand("make-dataset", "Write synthetic translating-texture clips as Y4M files");
  ds_cmd->add_option("--out", ds_args.out_dir, "Output directory")->required();
  ds_cmd->add_option("--clips", ds_args.clips, "Number of clips")->capture_default_str();
  ds_cmd->add_option("--frames", ds_args.frames, "Frames per clip")->capture_default_str();
  ds_cmd->add_option("--height", ds_args.height, "Frame height")->capture_default_str();
  ds_cmd->add_option("--width", ds_args.width, "Frame width")->capture_default_str();
  ds_cmd->add_option("--dy", ds_args.dy, "Vertical motion per frame (pixels)")->capture_default_str();
  ds_cmd->add_option("--dx", ds_args.dx, "Horizontal motion per frame (pixels)")->capture_default_str();
  ds_cmd->add_option("--jitter", ds_args.jitter, "Per-clip random motion offset bound")->capture_default_str();
  ds_cmd->add_option("--block", ds_args.block, "Frame sides are multiples of this")->capture_default_str();
  ds_cmd->add_option("--seed", ds_args.seed, "Generator seed")->capture_default_str();

  cli::SampleArgs sample_args;
  auto* sample_cmd = app.add_subcommand("sample", "Measure a Y4M sequence block by block");
  sample_cmd->add_option("--model-op", sample_args.op_path, "Operator file")->required();
  sample_cmd->add_option("--cr", sample_args.cr, "Compression ratio")->capture_default_str();
  sample_cmd->add_option("--in", sample_args.in, "Input Y4M")->required();
  sample_cmd->add_option("--out", sample_args.out, "Output measurement stream")->required();

  cli::ReconstructArgs rec_args;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Decode a measurement stream");
  rec_cmd->add_option("--model", rec_args.model, "Model file")->required();
  rec_cmd->add_option("--meas", rec_args.meas, "Measurement stream")->required();
  rec_cmd->add_option("--out", rec_args.out, "Output directory (pgm) or file (y4m)")->required();
  rec_cmd->add_option("--format", rec_args.format, "pgm or y4m")
      ->check(CLI::IsMember({"pgm", "y4m"}))
      ->capture_default_str();
  rec_cmd->add_option("--gt", rec_args.gt, "Ground-truth Y4M for per-frame PSNR/SSIM");
  rec_cmd->add_option("--model-op", rec_args.op_path, "Operator file (default: regenerate from the model)");
  rec_cmd->add_flag("--no-mhme", rec_args.no_mhme, "Decode every frame without a reference");

  cli::TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a key=value config");
  train_cmd->add_option("--config", train_args.config, "Config file")->required();
  train_cmd->add_option("--out", train_args.out, "Output model file")->required();
  train_cmd->add_option("--log", train_args.log, "Metrics log (default: stdout)");

  cli::EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Mean PSNR/SSIM per compression ratio");
  eval_cmd->add_option("--model", eval_args.model, "Model file")->required();
  eval_cmd->add_option("--in", eval_args.inputs, "Y4M clips or directories of them")->required();
  eval_cmd->add_option("--cr", eval_args.crs, "Rates to evaluate (default: the model's list)")->delimiter(',');
  eval_cmd->add_option("--first-frame", eval_args.first_frame, "Skip frames before this index")->capture_default_str();
  eval_cmd->add_flag("--no-mhme", eval_args.no_mhme, "Decode every frame without a reference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }

  try {
    if (*op_cmd) return cli::make_operator(op_args);
    if (*ds_cmd) return cli::make_dataset(ds_args);
    if (*sample_cmd) return cli::sample(sample_args);
    if (*rec_cmd) return cli::reconstruct(rec_args);
    if (*train_cmd) return cli::train(train_args);
    if (*eval_cmd) return cli::eval(eval_args);
  } catch (const csmc::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kDivergence;
  } catch (const csmc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return cli::kUsage;
}
