#ifndef BLAB_REPORT_HPP
#define BLAB_REPORT_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace blab {

/// Single-writer run directory: every artifact goes through write(), and
/// finalize() emits manifest.json indexing whatever was written. The
/// timestamp lives only in the manifest so reports stay byte-comparable.
class RunWriter {
 public:
  explicit RunWriter(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  void write(const std::string& name, const std::string& content);
  void finalize(const std::string& command, const std::string& config_echo);

 private:
  std::filesystem::path dir_;
  std::vector<std::string> artifacts_;
};

}  // namespace blab

#endif  // BLAB_REPORT_HPP
