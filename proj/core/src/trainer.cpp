#include "vxae/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>

#include "vxae/adam.hpp"
#include "vxae/autograd.hpp"
#include "vxae/errors.hpp"
#include "vxae/log.hpp"
#include "vxae/ops.hpp"
#include "vxae/rng.hpp"

namespace vxae {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string epoch_file(int epoch) {
  char name[32];
  std::snprintf(name, sizeof name, "epoch_%03d.vxae", epoch);
  return name;
}

void write_outputs(const TrainConfig& config, const std::vector<MetricsRecord>& records) {
  if (config.checkpoint_dir.empty()) return;
  write_metrics_csv(config.checkpoint_dir / "metrics.csv", records, config.determinism);
  if (config.determinism) write_metrics_csv(config.checkpoint_dir / "timing.csv", records, false);
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("learning rate must be finite and >= 0");
  if (epochs < 1 && max_steps == 0) throw std::invalid_argument("epochs must be >= 1");
  if (eval_every < 0 || eval_samples < 0) throw std::invalid_argument("eval_every and eval_samples must be >= 0");
  if (dim < 8) throw std::invalid_argument("voxel dim must be >= 8");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw std::invalid_argument("test fraction must lie in [0, 1)");
}

double evaluate(Autoencoder<float>& model, const Dataset& data, Split split, int batch_size, int max_samples) {
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  std::vector<std::size_t> ids = data.ids(split);
  if (max_samples > 0 && ids.size() > static_cast<std::size_t>(max_samples)) ids.resize(max_samples);
  if (ids.empty()) return std::numeric_limits<double>::quiet_NaN();
  NoGradGuard no_grad;
  double total = 0.0;
  for (std::size_t begin = 0; begin < ids.size(); begin += batch_size) {
    const std::size_t end = std::min(ids.size(), begin + batch_size);
    const std::span<const std::size_t> chunk(ids.data() + begin, end - begin);
    const Tensor<float> x = data.batch(chunk);
    const Tensor<float> y = model.forward(x, Mode::Eval).recon;
    const std::size_t per = static_cast<std::size_t>(x.numel()) / chunk.size();
    const auto p = y.values();
    const auto t = x.values();
    for (std::size_t n = 0; n < chunk.size(); ++n) {
      double s = 0.0;
      for (std::size_t i = n * per; i < (n + 1) * per; ++i) {
        const double d = double(p[i]) - double(t[i]);
        s += d * d;
      }
      total += s / static_cast<double>(per);
    }
  }
  return total / static_cast<double>(ids.size());
}

double evaluate(const Checkpoint& ckpt, const Dataset& data, Split split, int batch_size) {
  Autoencoder<float> model = model_from_checkpoint(ckpt);
  return evaluate(model, data, split, batch_size);
}

std::uint64_t steps_per_epoch(std::size_t train_samples, int batch_size) {
  return (train_samples + batch_size - 1) / batch_size;
}

std::vector<std::size_t> epoch_order(const std::vector<std::size_t>& train_ids, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order = train_ids;
  Rng rng(counter_hash(seed, static_cast<std::uint64_t>(epoch), 0xe90c5ull, 0));
  rng.shuffle(order);
  return order;
}

Dataset load_dataset(const TrainConfig& config) {
  return Dataset(build_index(config.data_root, config.test_fraction, config.seed), config.dim);
}

TrainResult train(const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  return train(config, load_dataset(config), hooks);
}

TrainResult train(const TrainConfig& config, const Dataset& data, const TrainHooks& hooks, const Checkpoint* resume) {
  config.validate();
  const auto& train_ids = data.ids(Split::Train);
  if (train_ids.empty()) throw DataError("training split is empty (" + std::to_string(data.skipped()) + " files skipped)");
  if (data.dim() != config.dim)
    throw DataError("dataset resolution " + std::to_string(data.dim()) + " differs from config dim " +
                    std::to_string(config.dim));

  Autoencoder<float> model = resume ? model_from_checkpoint(*resume) : Autoencoder<float>(build_model(config.model, config.dim), config.seed);
  if (model.spec().input_dim != config.dim) throw DataError("checkpoint model expects a different voxel dim");
  AdamState<float> adam = resume ? adam_from_checkpoint(*resume, model.params()) : AdamState<float>{};
  adam.lr = config.lr;
  adam.validate();
  std::uint64_t step = resume ? resume->step : 0;
  const std::uint64_t seed = model.seed();

  const std::uint64_t spe = steps_per_epoch(train_ids.size(), config.batch_size);
  const std::uint64_t total = config.max_steps > 0 ? config.max_steps : spe * static_cast<std::uint64_t>(config.epochs);
  if (!config.checkpoint_dir.empty()) std::filesystem::create_directories(config.checkpoint_dir);
  log::info("training ", model.spec().name, ": ", count_params(model.spec()), " parameters, ", train_ids.size(),
            " train / ", data.ids(Split::Test).size(), " test samples, ", total, " steps");

  TrainResult result;
  result.skipped_files = data.skipped();
  const auto start = Clock::now();
  auto emit = [&](MetricsRecord r) {
    r.wall_seconds = seconds_since(start);
    if (config.json_stdout) std::cout << to_json_line(r) << std::endl;
    if (hooks.on_record) hooks.on_record(r);
    result.metrics.push_back(std::move(r));
  };
  auto run_eval = [&](int epoch) {
    if (data.ids(Split::Test).empty()) return;
    emit({step, epoch, "eval", evaluate(model, data, Split::Test, std::min(config.batch_size, 16), config.eval_samples), 0});
  };

  std::vector<std::size_t> order;
  int order_epoch = -1;
  auto trainable = model.params().trainable();
  while (step < total) {
    const int epoch = static_cast<int>(step / spe);
    if (epoch != order_epoch) {
      order = epoch_order(train_ids, seed, epoch);
      order_epoch = epoch;
    }
    const std::size_t begin = static_cast<std::size_t>(step % spe) * config.batch_size;
    const std::size_t end = std::min(order.size(), begin + config.batch_size);
    const Tensor<float> x = data.batch(std::span<const std::size_t>(order.data() + begin, end - begin));

    model.params().zero_grad();
    const Tensor<float> loss = mse_loss(model.forward(x, Mode::Train, step).recon, x);
    const double value = loss.item();
    if (!std::isfinite(value))
      throw NumericError("non-finite training loss at step " + std::to_string(step + 1) + " (epoch " +
                         std::to_string(epoch) + ")");
    backward(loss);
    adam_step<float>(trainable, adam);
    ++step;
    emit({step, epoch, "train", value, 0});
    if (step % 10 == 0) log::info("step ", step, "/", total, " mse ", value);

    const bool epoch_end = step % spe == 0;
    if (config.eval_every > 0 ? step % static_cast<std::uint64_t>(config.eval_every) == 0 : epoch_end) run_eval(epoch);
    if (epoch_end && !config.checkpoint_dir.empty()) {
      const Checkpoint ckpt = make_checkpoint(model, &adam, step);
      save_checkpoint_file(config.checkpoint_dir / epoch_file(epoch), ckpt);
      save_checkpoint_file(config.checkpoint_dir / "latest.vxae", ckpt);
      write_outputs(config, result.metrics);
    }
  }

  result.steps = step;
  result.wall_seconds = seconds_since(start);
  result.final_eval_mse = evaluate(model, data, Split::Test, std::min(config.batch_size, 16), config.eval_samples);
  result.checkpoint = make_checkpoint(model, &adam, step);
  if (!config.checkpoint_dir.empty()) {
    save_checkpoint_file(config.checkpoint_dir / "final.vxae", result.checkpoint);
    write_outputs(config, result.metrics);
  }
  return result;
}

CompareReport compare(const TrainConfig& a, const TrainConfig& b, const Dataset& data) {
  CompareReport report;
  report.name_a = a.model;
  report.name_b = b.model;
  report.params_a = count_params(build_model(a.model, a.dim));
  report.params_b = count_params(build_model(b.model, b.dim));
  report.a = train(a, data);
  report.b = train(b, data);
  std::vector<const MetricsRecord*> ta, tb;
  for (const auto& r : report.a.metrics)
    if (r.split == "train") ta.push_back(&r);
  for (const auto& r : report.b.metrics)
    if (r.split == "train") tb.push_back(&r);
  for (std::size_t i = 0; i < std::min(ta.size(), tb.size()); ++i)
    report.rows.push_back({ta[i]->step, ta[i]->mse, tb[i]->mse, ta[i]->wall_seconds, tb[i]->wall_seconds});
  report.wall_ratio = report.b.wall_seconds > 0 ? report.a.wall_seconds / report.b.wall_seconds : 0.0;
  return report;
}

std::string compare_to_csv(const CompareReport& report, bool zero_wall_clock) {
  std::string out = std::string(kCompareCsvHeader) + "\n";
  for (const auto& r : report.rows)
    out += std::to_string(r.step) + "," + format_double(r.mse_a) + "," + format_double(r.mse_b) + "," +
           (zero_wall_clock ? "0,0" : format_double(r.wall_a) + "," + format_double(r.wall_b)) + "\n";
  return out;
}

std::string compare_summary_json(const CompareReport& report) {
  nlohmann::ordered_json j;
  j["model_a"] = report.name_a;
  j["model_b"] = report.name_b;
  j["params_a"] = report.params_a;
  j["params_b"] = report.params_b;
  j["steps"] = report.rows.size();
  j["final_eval_mse_a"] = report.a.final_eval_mse;
  j["final_eval_mse_b"] = report.b.final_eval_mse;
  j["wall_seconds_a"] = report.a.wall_seconds;
  j["wall_seconds_b"] = report.b.wall_seconds;
  j["wall_ratio_a_over_b"] = report.wall_ratio;
  return j.dump(2);
}

}  // namespace vxae
