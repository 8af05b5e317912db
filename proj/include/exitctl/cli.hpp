#pragma once

#include "exitctl/config.hpp"
#include "exitctl/sampler.hpp"

#include <memory>
#include <ostream>
#include <string>

namespace exitctl {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitConfig = 2, kExitVerify = 3 };

// Controller for cfg.control; probes are the basis gradients when requested.
std::shared_ptr<const Controller> make_controller(const ExperimentConfig& cfg, bool with_probes);

// simulate | estimate | descend | pde | verify. Writes artifacts under
// cfg.output_dir and returns an ExitCode.
int run_command(const std::string& cmd, const ExperimentConfig& cfg, std::ostream& log);

int run_cli(int argc, char** argv);

}  // namespace exitctl
