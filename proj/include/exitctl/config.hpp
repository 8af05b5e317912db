#pragma once

#include "exitctl/descent.hpp"
#include "exitctl/model.hpp"
#include "exitctl/sampler.hpp"
#include "exitctl/variation.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace exitctl {

// Schema violation; `pointer` is the JSON pointer of the offending value.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct ControlOptions {
  std::string kind = "zero";  // zero | basis | oracle | constant
  std::vector<double> coefficients;
  Point value;
  double pde_h = 1e-3;
};

struct EstimateOptions {
  FirstVariationForm form = FirstVariationForm::compact;
  bool hessian = true;
};

struct PdeOptions {
  double h = 1e-3;
  bool mgf_threshold = false;
  std::optional<double> mgf_lambda;
};

struct VerifyOptions {
  std::vector<int> criteria;
};

struct ExperimentConfig {
  ProblemSpec problem;
  BasisPtr basis;
  SimConfig sim;
  std::size_t n_traj = 1000;
  ControlOptions control;
  EstimateOptions estimate;
  DescentConfig descent;
  std::optional<std::filesystem::path> resume;
  PdeOptions pde;
  VerifyOptions verify;
  std::filesystem::path output_dir = "out";
  nlohmann::json resolved;  // every field with its effective value
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig parse_config_document(const nlohmann::json& doc);

// Command-line overrides; both keep `resolved` in sync.
void override_seed(ExperimentConfig& cfg, std::uint64_t seed);
void override_output_dir(ExperimentConfig& cfg, const std::filesystem::path& dir);

// Writes output_dir/config.resolved.json.
void write_resolved_config(const ExperimentConfig& cfg);

std::size_t edit_distance(std::string_view a, std::string_view b);
// Closest candidate within a small edit distance, if any.
std::optional<std::string> suggest_key(std::string_view key, const std::vector<std::string>& candidates);

}  // namespace exitctl
