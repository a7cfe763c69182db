#include "infomotif/optim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace infomotif::ad {

void Adam::step(std::span<Parameter* const> params) {
  for (const Parameter* p : params)
    if (!p->grad.allFinite()) throw NumericError("non-finite gradient in parameter '" + p->name + "'");
  ++t_;
  for (Parameter* p : params) {
    Moments& st = state_[p->name];
    if (st.m.size() == 0) {
      st.m = Matrix::Zero(p->value.rows(), p->value.cols());
      st.v = Matrix::Zero(p->value.rows(), p->value.cols());
    }
    ++st.t;
    const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(st.t));
    const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(st.t));
    st.m = opts_.beta1 * st.m + (1.0 - opts_.beta1) * p->grad;
    st.v = opts_.beta2 * st.v + (1.0 - opts_.beta2) * p->grad.cwiseAbs2();
    p->value.array() -= opts_.lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + opts_.eps);
  }
}

GradCheckReport grad_check(const std::function<Var(Tape&)>& loss, std::span<Parameter* const> params,
                           GradCheckOptions opts) {
  const TapeOptions topts{.train = opts.train_mode, .seed = opts.seed};
  auto eval = [&]() {
    Tape t(topts);
    return loss(t).scalar();
  };
  {
    Tape t(topts);
    Var l = loss(t);
    if (t.stochastic_ops() > 0) throw ContractError("grad_check: loss uses stochastic ops (dropout active)");
    for (Parameter* p : params) p->grad.setZero(p->value.rows(), p->value.cols());
    t.backward(l);
  }
  GradCheckReport rep;
  Rng rng(opts.seed);
  for (Parameter* p : params) {
    const Matrix analytic = p->grad;
    std::vector<Eigen::Index> coords(static_cast<std::size_t>(p->value.size()));
    std::iota(coords.begin(), coords.end(), 0);
    if (coords.size() > opts.max_coords) {
      std::vector<Eigen::Index> pick;
      std::sample(coords.begin(), coords.end(), std::back_inserter(pick), opts.max_coords, rng);
      coords = std::move(pick);
    }
    for (Eigen::Index k : coords) {
      double& x = p->value.data()[k];
      const double saved = x;
      x = saved + opts.eps;
      const double fp = eval();
      x = saved - opts.eps;
      const double fm = eval();
      x = saved;
      const double num = (fp - fm) / (2.0 * opts.eps);
      const double ana = analytic.data()[k];
      const double rel = std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), opts.denom_floor});
      ++rep.coords_checked;
      if (rel > rep.max_rel_error || rep.worst_param.empty()) {
        rep.max_rel_error = std::max(rel, rep.max_rel_error);
        rep.worst_param = p->name;
        rep.worst_row = k / p->value.cols();
        rep.worst_col = k % p->value.cols();
        rep.analytic = ana;
        rep.numeric = num;
      }
    }
  }
  return rep;
}

void save_checkpoint(const ParameterSet& params, const std::filesystem::path& file, const nlohmann::json& meta) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["meta"] = meta;
  j["tensors"] = nlohmann::json::array();
  for (const Parameter* p : params.all()) {
    std::vector<double> vals(p->value.data(), p->value.data() + p->value.size());
    j["tensors"].push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}, {"values", vals}});
  }
  std::ofstream out(file);
  if (!out) throw Error("cannot write checkpoint " + file.string());
  out << j.dump() << '\n';
}

std::map<std::string, Matrix> load_checkpoint(const std::filesystem::path& file, nlohmann::json* meta) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read checkpoint " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(file.string(), 1, e.what());
  }
  if (j.value("format", "") != kCheckpointFormat)
    throw FormatError(file.string(), 1, "not an infomotif checkpoint");
  if (j.value("version", 0) != kCheckpointVersion)
    throw FormatError(file.string(), 1, "unsupported checkpoint version " + j["version"].dump());
  std::map<std::string, Matrix> out;
  for (const auto& t : j.at("tensors")) {
    const auto rows = t.at("rows").get<Eigen::Index>();
    const auto cols = t.at("cols").get<Eigen::Index>();
    const auto vals = t.at("values").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(vals.size()) != rows * cols)
      throw FormatError(file.string(), 1, "tensor '" + t.at("name").get<std::string>() + "' has wrong size");
    out[t.at("name").get<std::string>()] = Eigen::Map<const Matrix>(vals.data(), rows, cols);
  }
  if (meta) *meta = j.value("meta", nlohmann::json::object());
  return out;
}

}  // namespace infomotif::ad
