#ifndef BLAB_COMMANDS_HPP
#define BLAB_COMMANDS_HPP

#include <string>

#include "blab/config.hpp"

namespace blab {

// Exit codes: 0 success, 1 numerical-flag failures, 2 config errors.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitConfig = 2;

int cmd_basis_check(const ExperimentConfig& cfg, const std::string& out_dir);
int cmd_sections(const ExperimentConfig& cfg, const std::string& out_dir);
int cmd_essnorm(const ExperimentConfig& cfg, const std::string& out_dir);
int cmd_sot(const ExperimentConfig& cfg, const std::string& out_dir);
int cmd_realize(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace blab

#endif  // BLAB_COMMANDS_HPP
