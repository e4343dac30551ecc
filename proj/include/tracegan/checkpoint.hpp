#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "tracegan/nets.hpp"

namespace tracegan {

// Self-describing JSON checkpoints: component kind, architecture/class
// configuration, every parameter tensor, batch-norm running statistics, and
// the hash of the training config that produced the weights.

void save_generator(const Generator& net, const std::filesystem::path& file,
                    const std::string& train_config_hash);
std::unique_ptr<Generator> load_generator(const std::filesystem::path& file);

void save_discriminator(const Discriminator& net, const std::filesystem::path& file,
                        const std::string& train_config_hash);
std::unique_ptr<Discriminator> load_discriminator(const std::filesystem::path& file);

void save_surrogate(const Surrogate& net, const std::filesystem::path& file,
                    const std::string& train_config_hash);
std::unique_ptr<Surrogate> load_surrogate(const std::filesystem::path& file);

// component name stored in a checkpoint ("generator" / "discriminator" / "surrogate")
std::string checkpoint_component(const std::filesystem::path& file);

// fingerprint of the parameter values in a checkpointed net
std::string checkpoint_param_hash(const std::filesystem::path& file);

}  // namespace tracegan
