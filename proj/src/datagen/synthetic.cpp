#include "varsel/datagen/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "varsel/common/error.hpp"
#include "varsel/common/rng.hpp"
#include "varsel/common/stats.hpp"

namespace varsel {

double Marginal::transform(double z) const {
  switch (kind) {
    case Kind::normal:
      return z;
    case Kind::lognormal:
      return std::exp(log_sd * z);
    case Kind::zero_inflated: {
      const double u = stats::normal_cdf(z);
      if (u < zero_probability) return 0.0;
      double v = (u - zero_probability) / (1.0 - zero_probability);
      v = std::clamp(v, 1e-16, 1.0 - 1e-16);
      return std::exp(log_sd * stats::normal_quantile(v));
    }
  }
  return z;
}

void SyntheticDesign::validate() const {
  if (p < 1) throw InvalidArgument("synthetic design: p must be >= 1");
  if (n < 2) throw InvalidArgument("synthetic design: n must be >= 2");
  long total = 0;
  for (const auto& b : blocks) {
    if (b.size < 1) throw InvalidArgument("synthetic design: block size must be >= 1");
    if (!(b.correlation >= 0.0 && b.correlation < 1.0)) {
      throw InvalidArgument("synthetic design: block correlation must lie in [0, 1), got " +
                            std::to_string(b.correlation));
    }
    total += b.size;
  }
  if (total > p) throw InvalidArgument("synthetic design: block sizes exceed p");
  if (!marginals.empty() && static_cast<int>(marginals.size()) != p) {
    throw InvalidArgument("synthetic design: need one marginal per column");
  }
  for (const auto& m : marginals) {
    if (m.kind == Marginal::Kind::zero_inflated &&
        !(m.zero_probability >= 0.0 && m.zero_probability < 1.0)) {
      throw InvalidArgument("synthetic design: zero probability must lie in [0, 1)");
    }
    if (!(m.log_sd > 0.0)) throw InvalidArgument("synthetic design: log_sd must be > 0");
  }
  for (int j : negated) {
    if (j < 0 || j >= p) throw InvalidArgument("synthetic design: negated column out of range");
  }
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0)) {
    throw InvalidArgument("synthetic design: missing_fraction must lie in [0, 1)");
  }
}

DataMatrix generate_synthetic_covariates(const SyntheticDesign& design) {
  design.validate();
  const int n = design.n;
  const int p = design.p;

  Matrix latent(n, p);
  auto rng = make_rng(design.seed, "synthetic-latent");
  std::normal_distribution<double> gauss;
  for (int i = 0; i < n; ++i) {
    int col = 0;
    for (const auto& block : design.blocks) {
      const double shared = gauss(rng);
      const double a = std::sqrt(block.correlation);
      const double b = std::sqrt(1.0 - block.correlation);
      for (int k = 0; k < block.size; ++k, ++col) {
        latent(i, col) = a * shared + b * gauss(rng);
      }
    }
    for (; col < p; ++col) latent(i, col) = gauss(rng);
  }
  for (int j : design.negated) latent.col(j) *= -1.0;

  Matrix values(n, p);
  for (int j = 0; j < p; ++j) {
    const Marginal m = design.marginals.empty()
                           ? Marginal::normal()
                           : design.marginals[static_cast<std::size_t>(j)];
    for (int i = 0; i < n; ++i) values(i, j) = m.transform(latent(i, j));
  }

  BoolMatrix missing = BoolMatrix::Constant(n, p, false);
  if (design.missing_fraction > 0.0) {
    auto miss_rng = make_rng(design.seed, "synthetic-missing");
    std::bernoulli_distribution drop(design.missing_fraction);
    for (int j = 0; j < p; ++j) {
      for (int i = 0; i < n; ++i) {
        if (drop(miss_rng)) {
          missing(i, j) = true;
          values(i, j) = std::numeric_limits<double>::quiet_NaN();
        }
      }
    }
  }
  return DataMatrix(std::move(values), default_column_names(p), std::move(missing));
}

namespace {

Marginal marginal_from_json(const nlohmann::json& tag) {
  if (tag.is_string()) {
    const auto name = tag.get<std::string>();
    if (name == "normal") return Marginal::normal();
    if (name == "lognormal") return Marginal::lognormal();
    if (name == "zero_inflated") return Marginal::zero_inflated(0.5);
    throw ConfigError("unknown marginal '" + name + "'");
  }
  if (!tag.is_object() || !tag.contains("type")) {
    throw ConfigError("marginal must be a tag string or an object with 'type'");
  }
  auto m = marginal_from_json(tag.at("type"));
  m.log_sd = tag.value("log_sd", m.log_sd);
  if (m.kind == Marginal::Kind::zero_inflated) {
    m.zero_probability = tag.value("zero_probability", m.zero_probability);
  }
  return m;
}

nlohmann::json marginal_to_json(const Marginal& m) {
  switch (m.kind) {
    case Marginal::Kind::normal:
      return {{"type", "normal"}};
    case Marginal::Kind::lognormal:
      return {{"type", "lognormal"}, {"log_sd", m.log_sd}};
    case Marginal::Kind::zero_inflated:
      return {{"type", "zero_inflated"},
              {"zero_probability", m.zero_probability},
              {"log_sd", m.log_sd}};
  }
  return {};
}

std::vector<Marginal> marginal_mix(const nlohmann::json& spec, int p,
                                   std::uint64_t seed) {
  const auto& mix = spec.at("mix");
  const double pi = spec.value("zero_probability", 0.5);
  const double log_sd = spec.value("log_sd", 1.0);
  std::vector<Marginal> options;
  std::vector<double> weights;
  // nlohmann::json objects iterate in sorted key order, so the draw below is
  // independent of how the config file orders its keys.
  for (const auto& [name, weight] : mix.items()) {
    Marginal m = marginal_from_json(nlohmann::json(name));
    m.log_sd = log_sd;
    if (m.kind == Marginal::Kind::zero_inflated) m.zero_probability = pi;
    options.push_back(m);
    weights.push_back(weight.get<double>());
  }
  if (options.empty()) throw ConfigError("marginal mix is empty");
  auto rng = make_rng(seed, "synthetic-marginals");
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::vector<Marginal> out;
  out.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) out.push_back(options[static_cast<std::size_t>(pick(rng))]);
  return out;
}

}  // namespace

SyntheticDesign synthetic_design_from_json(const nlohmann::json& doc) {
  try {
    SyntheticDesign d;
    d.p = doc.at("p").get<int>();
    d.n = doc.at("n").get<int>();
    d.seed = doc.value("seed", std::uint64_t{0});
    d.missing_fraction = doc.value("missing_fraction", 0.0);
    if (doc.contains("blocks")) {
      for (const auto& b : doc.at("blocks")) {
        d.blocks.push_back({b.at("size").get<int>(), b.at("correlation").get<double>()});
      }
    }
    if (doc.contains("negated")) d.negated = doc.at("negated").get<std::vector<int>>();
    if (doc.contains("marginals")) {
      const auto& m = doc.at("marginals");
      if (m.is_array()) {
        for (const auto& tag : m) d.marginals.push_back(marginal_from_json(tag));
      } else if (m.is_object() && m.contains("mix")) {
        d.marginals = marginal_mix(m, d.p, d.seed);
      } else {
        d.marginals.assign(static_cast<std::size_t>(d.p), marginal_from_json(m));
      }
    }
    d.validate();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic design: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::json to_json(const SyntheticDesign& design) {
  nlohmann::json doc;
  doc["p"] = design.p;
  doc["n"] = design.n;
  doc["seed"] = design.seed;
  doc["missing_fraction"] = design.missing_fraction;
  doc["blocks"] = nlohmann::json::array();
  for (const auto& b : design.blocks) {
    doc["blocks"].push_back({{"size", b.size}, {"correlation", b.correlation}});
  }
  doc["negated"] = design.negated;
  doc["marginals"] = nlohmann::json::array();
  for (const auto& m : design.marginals) doc["marginals"].push_back(marginal_to_json(m));
  return doc;
}

}  // namespace varsel
