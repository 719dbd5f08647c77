#include "blab/report.hpp"

#include <chrono>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace blab {

RunWriter::RunWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void RunWriter::write(const std::string& name, const std::string& content) {
  std::ofstream out(dir_ / name, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write artifact '" + name + "'");
  }
  out << content;
  artifacts_.push_back(name);
}

void RunWriter::finalize(const std::string& command,
                         const std::string& config_echo) {
  nlohmann::ordered_json manifest;
  manifest["command"] = command;
  manifest["artifacts"] = artifacts_;
  manifest["config"] = config_echo;
  const auto now = std::chrono::system_clock::now();
  manifest["generated_at"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          now.time_since_epoch())
          .count();
  std::ofstream out(dir_ / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest.json");
  out << manifest.dump(2);
}

}  // namespace blab
