#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blab/config.hpp"

namespace blab {

std::string tool_version();

struct RunManifest {
  std::string status;  // "ok" or "failed"
  std::string error;
  std::string config_hash;  // SHA-256 of the config with sorted keys
  std::string tool_version;
  struct Stage {
    std::string name;
    double seconds = 0;
  };
  std::vector<Stage> stages;  // completed stages, in order
  struct File {
    std::string path;  // relative to the output directory
    std::uintmax_t bytes = 0;
    std::string sha256;
  };
  std::vector<File> files;  // sorted by path; manifest.json itself is not listed
};

Json manifest_to_json(const RunManifest& m);

// Validates, then runs the listed stages in kStageOrder inside a temporary
// sibling of `out`, writes manifest.json last and renames the directory into
// place. A stage failure still publishes the partial directory with a failed
// manifest, then rethrows. Invalid configs throw InvalidArgument before any
// compute and leave `out` untouched.
RunManifest run(const ExperimentConfig& config, const fs::path& out);

}  // namespace blab
