#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "terragan/network.hpp"
#include "terragan/tensor.hpp"

namespace terragan {

/// The backend's checkpoint container: a metadata map plus named tensors,
/// written in a fixed order so identical states produce identical files.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const;
  const std::string& require_meta(const std::string& key) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Snapshot of every parameter and buffer of a network.
Checkpoint snapshot_network(Network& net,
                            const std::map<std::string, std::string>& meta);

/// Restores parameters by name; throws DataError when a parameter is missing
/// or shaped differently and `strict` is set.
void restore_network(Network& net, const Checkpoint& ckpt, bool strict = true);

}  // namespace terragan
