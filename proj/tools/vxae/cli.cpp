#include "vxae/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>

#include "vxae/autograd.hpp"
#include "vxae/binvox.hpp"
#include "vxae/checkpoint.hpp"
#include "vxae/dataset.hpp"
#include "vxae/errors.hpp"
#include "vxae/log.hpp"
#include "vxae/metrics.hpp"
#include "vxae/stl.hpp"
#include "vxae/trainer.hpp"
#include "vxae/transfer.hpp"
#include "vxae/voxelize.hpp"

namespace vxae::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e;
}

// --- voxelize ---

struct VoxelizeArgs {
  fs::path in, out;
  int dim = 64;
  int margin = 1;
};

int cmd_voxelize(const VoxelizeArgs& a, std::ostream& out) {
  if (a.dim < 2) throw UsageError("--dim must be >= 2");
  if (a.margin < 0 || 2 * a.margin >= a.dim) throw UsageError("--margin must lie in [0, dim/2)");
  std::vector<fs::path> inputs;
  if (fs::is_directory(a.in)) {
    for (const auto& e : fs::recursive_directory_iterator(a.in))
      if (e.is_regular_file() && lower_ext(e.path()) == ".stl") inputs.push_back(e.path());
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) log::warn("no .stl files under ", a.in.string());
  } else if (fs::is_regular_file(a.in)) {
    inputs.push_back(a.in);
  } else {
    throw DataError("input not found: " + a.in.string());
  }
  fs::create_directories(a.out);
  const VoxelizeOptions opts{.margin = a.margin};
  std::vector<std::string> lines(inputs.size()), errors(inputs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(inputs.size()); ++i) {
    try {
      const auto grid = voxelize(read_stl_file(inputs[i]), a.dim, opts);
      const fs::path dst = a.out / inputs[i].filename().replace_extension(".binvox");
      write_binvox_file(dst, grid);
      lines[i] = dst.string() + " " + format_double(grid.occupied_fraction()) + (grid.surface_only ? " surface" : "");
    } catch (const std::exception& e) {
      errors[i] = inputs[i].string() + ": " + e.what();
    }
  }
  std::size_t failed = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!errors[i].empty()) {
      log::error(errors[i]);
      ++failed;
    } else {
      out << lines[i] << "\n";
    }
  }
  if (failed > 0) throw DataError(std::to_string(failed) + " of " + std::to_string(inputs.size()) + " files failed");
  return kSuccess;
}

// --- train / compare ---

void check_model_name(const std::string& name, int dim) {
  try {
    build_model(name, dim);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

struct TrainArgs {
  TrainConfig config;
  fs::path out;
  bool no_determinism = false;
};

void add_train_flags(CLI::App* cmd, TrainArgs& a, bool with_model) {
  if (with_model) cmd->add_option("--model", a.config.model, "baseline or residual[:default|small|wide]");
  cmd->add_option("--data", a.config.data_root, "dataset root (.stl / .binvox files)")->required();
  cmd->add_option("--epochs", a.config.epochs, "passes over the train split")->capture_default_str();
  cmd->add_option("--batch", a.config.batch_size, "batch size")->capture_default_str();
  cmd->add_option("--lr", a.config.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--seed", a.config.seed, "run seed")->capture_default_str();
  cmd->add_option("--dim", a.config.dim, "voxel resolution")->capture_default_str();
  cmd->add_option("--eval-every", a.config.eval_every, "steps between evaluations (0: each epoch)");
  cmd->add_option("--eval-samples", a.config.eval_samples, "cap on evaluated test samples (0: all)");
  cmd->add_option("--max-steps", a.config.max_steps, "stop after this many steps (0: all epochs)");
  cmd->add_option("--test-fraction", a.config.test_fraction, "share of files held out")->capture_default_str();
  cmd->add_flag("--no-determinism", a.no_determinism, "write real wall-clock times into metrics.csv");
}

int cmd_train(TrainArgs& a, bool json, std::ostream& out) {
  a.config.checkpoint_dir = a.out;
  a.config.determinism = !a.no_determinism;
  a.config.json_stdout = json;
  if (!fs::is_directory(a.config.data_root)) throw DataError("data directory not found: " + a.config.data_root.string());
  try {
    a.config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  check_model_name(a.config.model, a.config.dim);
  const auto result = train(a.config);
  if (!json)
    out << "steps " << result.steps << " final_eval_mse " << format_double(result.final_eval_mse) << " skipped "
        << result.skipped_files << "\n";
  return kSuccess;
}

struct CompareArgs {
  TrainArgs shared;
  std::string model_a = "residual";
  std::string model_b = "baseline";
};

int cmd_compare(CompareArgs& a, std::ostream& out) {
  auto& c = a.shared.config;
  c.determinism = !a.shared.no_determinism;
  if (!fs::is_directory(c.data_root)) throw DataError("data directory not found: " + c.data_root.string());
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  TrainConfig ca = c, cb = c;
  ca.model = a.model_a;
  cb.model = a.model_b;
  check_model_name(ca.model, c.dim);
  check_model_name(cb.model, c.dim);
  if (!a.shared.out.empty()) {
    ca.checkpoint_dir = a.shared.out / "a";
    cb.checkpoint_dir = a.shared.out / "b";
  }
  const Dataset data = load_dataset(c);
  const auto report = compare(ca, cb, data);
  const auto csv = compare_to_csv(report, c.determinism);
  const auto summary = compare_summary_json(report);
  if (!a.shared.out.empty()) {
    write_file_atomic(a.shared.out / "compare.csv", csv);
    write_file_atomic(a.shared.out / "summary.json", summary + "\n");
  }
  out << summary << "\n";
  return kSuccess;
}

// --- eval / encode / reconstruct / inspect ---

struct EvalArgs {
  fs::path ckpt, data;
  std::string split = "test";
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto ckpt = load_checkpoint_file(a.ckpt);
  auto model = model_from_checkpoint(ckpt);
  const Split split = a.split == "train" ? Split::Train : Split::Test;
  const Dataset data(build_index(a.data, a.test_fraction, a.seed_set ? a.seed : ckpt.seed), model.spec().input_dim);
  out << "mse " << format_double(evaluate(model, data, split)) << " samples " << data.ids(split).size() << "\n";
  return kSuccess;
}

Tensor<float> load_inputs(const std::vector<fs::path>& paths, int dim) {
  std::vector<VoxelGrid> grids;
  for (const auto& p : paths) grids.push_back(load_grid(p, dim));
  std::vector<const VoxelGrid*> ptrs;
  for (const auto& g : grids) ptrs.push_back(&g);
  return grids_to_tensor(ptrs);
}

struct EncodeArgs {
  fs::path ckpt, out;
  std::vector<fs::path> in;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out) {
  FrozenEncoder encoder(load_checkpoint_file(a.ckpt));
  const int dim = encoder.spec().input_dim;
  std::string csv;
  for (int i = 0; i < encoder.spec().latent_dim; ++i) csv += (i ? ",z" : "z") + std::to_string(i);
  csv += "\n";
  for (const auto& path : a.in) {
    const auto z = encoder.encode(load_inputs({path}, dim));
    for (std::size_t i = 0; i < z.values().size(); ++i) csv += (i ? "," : "") + format_double(z.values()[i]);
    csv += "\n";
  }
  write_file_atomic(a.out, csv);
  out << "encoded " << a.in.size() << " inputs into " << a.out.string() << "\n";
  return kSuccess;
}

struct ReconstructArgs {
  fs::path ckpt, in, out;
  double threshold = 0.5;
};

int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out) {
  auto model = model_from_checkpoint(load_checkpoint_file(a.ckpt));
  const int dim = model.spec().input_dim;
  const VoxelGrid input = load_grid(a.in, dim);
  const VoxelGrid* ptr = &input;
  Tensor<float> recon;
  {
    NoGradGuard no_grad;
    recon = model.forward(grids_to_tensor({&ptr, 1}), Mode::Eval).recon;
  }
  VoxelGrid grid = input;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < grid.occupancy.size(); ++i) {
    grid.occupancy[i] = recon.values()[i] >= a.threshold ? 1 : 0;
    agree += grid.occupancy[i] == input.occupancy[i];
  }
  grid.surface_only = false;
  write_binvox_file(a.out, grid);
  out << "voxel_accuracy " << format_double(double(agree) / double(grid.occupancy.size())) << " occupied "
      << grid.occupied_count() << "\n";
  return kSuccess;
}

struct InspectArgs {
  fs::path ckpt, in;
  std::string model;
  int dim = 64;
};

void print_model(const ModelSpec& spec, std::ostream& out) {
  out << "model " << spec.name << " input " << spec.input_dim << "^3 latent " << spec.latent_dim << "\n";
  for (const auto& row : shape_trace(spec))
    out << row.stage << " " << row.index << " " << block_kind_name(row.block.kind) << " " << to_string(row.output) << " "
        << count_params(row.block) << "\n";
  out << "params encoder " << count_encoder_params(spec) << " decoder " << count_decoder_params(spec) << " total "
      << count_params(spec) << "\n";
}

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
  const int sources = !a.ckpt.empty() + !a.in.empty() + !a.model.empty();
  if (sources != 1) throw UsageError("inspect needs exactly one of --ckpt, --in or --model");
  if (!a.model.empty()) {
    check_model_name(a.model, a.dim);
    print_model(build_model(a.model, a.dim), out);
  } else if (!a.ckpt.empty()) {
    const auto ckpt = load_checkpoint_file(a.ckpt);
    print_model(parse_model_spec(ckpt.spec_text), out);
    out << "step " << ckpt.step << " seed " << ckpt.seed << " tensors " << ckpt.tensors.size() << "\n";
  } else if (lower_ext(a.in) == ".stl") {
    const auto mesh = read_stl_file(a.in);
    const auto box = bounding_box(mesh);
    out << "triangles " << mesh.size() << " watertight " << (is_watertight(mesh) ? "yes" : "no") << "\n";
    out << "bbox " << box.min[0] << " " << box.min[1] << " " << box.min[2] << " " << box.max[0] << " " << box.max[1]
        << " " << box.max[2] << "\n";
  } else {
    const auto grid = read_binvox_file(a.in);
    out << "dim " << grid.dim << " occupied " << grid.occupied_count() << " fraction "
        << format_double(grid.occupied_fraction()) << "\n";
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"vxae: voxel autoencoder toolkit", "vxae"};
  app.require_subcommand(1);
  bool json = false;

  VoxelizeArgs vox;
  auto* c_vox = app.add_subcommand("voxelize", "voxelize STL meshes into binvox grids");
  c_vox->add_option("--in", vox.in, "mesh file or directory")->required();
  c_vox->add_option("--out", vox.out, "output directory")->required();
  c_vox->add_option("--dim", vox.dim, "grid resolution")->required();
  c_vox->add_option("--margin", vox.margin, "empty voxels around the mesh")->capture_default_str();

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "train an autoencoder");
  add_train_flags(c_train, tr, true);
  c_train->add_option("--out", tr.out, "directory for checkpoints and metrics")->required();
  c_train->add_flag("--json", json, "print metrics as JSON lines");

  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare", "train two models on the same data and compare");
  add_train_flags(c_cmp, cmp.shared, false);
  c_cmp->add_option("--model-a", cmp.model_a, "first model")->capture_default_str();
  c_cmp->add_option("--model-b", cmp.model_b, "second model")->capture_default_str();
  c_cmp->add_option("--out", cmp.shared.out, "directory for compare.csv, summary.json and both runs");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "mean per-sample MSE of a checkpoint on a dataset split");
  c_eval->add_option("--ckpt", ev.ckpt, "checkpoint file")->required();
  c_eval->add_option("--data", ev.data, "dataset root")->required();
  c_eval->add_option("--split", ev.split, "train or test")->check(CLI::IsMember({"train", "test"}))->capture_default_str();
  c_eval->add_option("--test-fraction", ev.test_fraction, "share of files held out")->capture_default_str();
  auto* seed_opt = c_eval->add_option("--seed", ev.seed, "split seed (default: the checkpoint's)");

  EncodeArgs enc;
  auto* c_enc = app.add_subcommand("encode", "write latent vectors of voxel grids as CSV");
  c_enc->add_option("--ckpt", enc.ckpt, "checkpoint or exported encoder")->required();
  c_enc->add_option("--in", enc.in, "binvox or STL inputs")->required()->expected(1, -1);
  c_enc->add_option("--out", enc.out, "CSV file")->required();

  ReconstructArgs rec;
  auto* c_rec = app.add_subcommand("reconstruct", "run a grid through the autoencoder and threshold the output");
  c_rec->add_option("--ckpt", rec.ckpt, "checkpoint file")->required();
  c_rec->add_option("--in", rec.in, "input grid")->required();
  c_rec->add_option("--out", rec.out, "output binvox")->required();
  c_rec->add_option("--threshold", rec.threshold, "occupancy threshold")->capture_default_str();

  InspectArgs ins;
  auto* c_ins = app.add_subcommand("inspect", "describe a checkpoint, model, binvox or STL file");
  c_ins->add_option("--ckpt", ins.ckpt, "checkpoint file");
  c_ins->add_option("--in", ins.in, "binvox or STL file");
  c_ins->add_option("--model", ins.model, "model name");
  c_ins->add_option("--dim", ins.dim, "resolution for --model")->capture_default_str();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  if (!argv.empty()) argv.pop_back();
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (*c_vox) return cmd_voxelize(vox, out);
    if (*c_train) return cmd_train(tr, json, out);
    if (*c_cmp) return cmd_compare(cmp, out);
    if (*c_eval) {
      ev.seed_set = seed_opt->count() > 0;
      return cmd_eval(ev, out);
    }
    if (*c_enc) return cmd_encode(enc, out);
    if (*c_rec) return cmd_reconstruct(rec, out);
    if (*c_ins) return cmd_inspect(ins, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    // Data, format and file system problems.
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

}  // namespace vxae::cli
