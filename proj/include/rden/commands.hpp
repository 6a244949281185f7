#pragma once

#include "rden/config.hpp"
#include "rden/network.hpp"
#include "rden/noise.hpp"
#include "rden/training.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace rden {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

NoiseSpec noise_from_config(const RunConfig& cfg);
NetConfig net_from_config(const RunConfig& cfg);
TrainConfig train_from_config(const RunConfig& cfg);

// Each command reads its keys from `cfg`, writes into cfg.text("out") and
// throws on failure. Progress lines go to `log`.

void cmd_gen_data(const RunConfig& cfg, std::ostream& log);
void cmd_corrupt(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_denoise(const RunConfig& cfg, std::ostream& log);
void cmd_eval(const RunConfig& cfg, std::ostream& log);
/// Returns false if any requested combination had to be skipped.
bool cmd_validate(const RunConfig& cfg, std::ostream& log);

const std::vector<std::string>& command_names();

/// Runs a command by name and maps errors to exit codes.
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log);

} // namespace rden
