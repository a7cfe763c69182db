#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "infomotif/autodiff.hpp"

namespace infomotif::ad {

struct AdamOptions {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam keyed by parameter name, so one optimizer can serve a subset of a
/// ParameterSet and survive ParameterSet copies.
class Adam {
 public:
  explicit Adam(AdamOptions opts = {}) : opts_(opts) {}

  /// Applies one update from each parameter's grad. Throws NumericError
  /// (naming the parameter) before touching anything if a gradient is not finite.
  void step(std::span<Parameter* const> params);

  std::int64_t steps() const noexcept { return t_; }
  const AdamOptions& options() const noexcept { return opts_; }
  void set_lr(double lr) { opts_.lr = lr; }

 private:
  struct Moments {
    Matrix m, v;
    std::int64_t t = 0;  // per-parameter, so one optimizer can serve disjoint subsets
  };
  AdamOptions opts_;
  std::int64_t t_ = 0;
  std::unordered_map<std::string, Moments> state_;
};

struct GradCheckOptions {
  double eps = 1e-4;
  std::size_t max_coords = 64;   // sampled per parameter when larger
  double denom_floor = 1e-6;     // keeps near-zero gradients from dominating
  std::uint64_t seed = 0;
  bool train_mode = false;       // builds train-mode tapes; refused if dropout fires
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_row = 0, worst_col = 0;
  double analytic = 0.0, numeric = 0.0;
  std::size_t coords_checked = 0;
};

/// Compares reverse-mode gradients against central differences. `loss` must
/// build a deterministic scalar on the tape it is given; a tape with stochastic
/// ops is rejected with ContractError.
GradCheckReport grad_check(const std::function<Var(Tape&)>& loss, std::span<Parameter* const> params,
                           GradCheckOptions opts = {});

inline constexpr const char* kCheckpointFormat = "infomotif.checkpoint";
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const ParameterSet& params, const std::filesystem::path& file,
                     const nlohmann::json& meta = nlohmann::json::object());
/// Tensors by name plus the stored metadata.
std::map<std::string, Matrix> load_checkpoint(const std::filesystem::path& file, nlohmann::json* meta = nullptr);

}  // namespace infomotif::ad
