#include "tracegan/checkpoint.hpp"

#include <fstream>

#include "tracegan/hashing.hpp"

namespace tracegan {

using nlohmann::json;

namespace {

constexpr int kVersion = 1;

json header(const std::string& component, const std::string& train_config_hash) {
  return json{{"format", "tracegan-checkpoint"},
              {"version", kVersion},
              {"component", component},
              {"train_config_hash", train_config_hash}};
}

void write_file(const json& j, const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + file.string());
  out << j.dump() << "\n";
}

json read_file(const std::filesystem::path& file, const std::string& expect_component) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + file.string());
  json j = json::parse(in);
  if (j.value("format", "") != "tracegan-checkpoint" || j.value("version", 0) != kVersion)
    throw std::runtime_error("not a tracegan checkpoint: " + file.string());
  if (!expect_component.empty() && j.at("component").get<std::string>() != expect_component)
    throw std::runtime_error("checkpoint holds a " + j.at("component").get<std::string>() +
                             ", expected " + expect_component + ": " + file.string());
  return j;
}

}  // namespace

void save_generator(const Generator& net, const std::filesystem::path& file,
                    const std::string& train_config_hash) {
  json j = header("generator", train_config_hash);
  j["config"] = net.cfg();
  j["trained"] = net.trained();
  j["state"] = net.net().save_state();
  write_file(j, file);
}

std::unique_ptr<Generator> load_generator(const std::filesystem::path& file) {
  json j = read_file(file, "generator");
  auto net = std::make_unique<Generator>(j.at("config").get<GeneratorCfg>(), 0);
  net->net().load_state(j.at("state"));
  if (j.value("trained", false)) net->mark_trained();
  return net;
}

void save_discriminator(const Discriminator& net, const std::filesystem::path& file,
                        const std::string& train_config_hash) {
  json j = header("discriminator", train_config_hash);
  j["config"] = net.cfg();
  j["state"] = net.net().save_state();
  write_file(j, file);
}

std::unique_ptr<Discriminator> load_discriminator(const std::filesystem::path& file) {
  json j = read_file(file, "discriminator");
  auto net = std::make_unique<Discriminator>(j.at("config").get<DiscriminatorCfg>(), 0);
  net->net().load_state(j.at("state"));
  return net;
}

void save_surrogate(const Surrogate& net, const std::filesystem::path& file,
                    const std::string& train_config_hash) {
  json j = header("surrogate", train_config_hash);
  j["config"] = net.cfg();
  j["state"] = net.net().save_state();
  write_file(j, file);
}

std::unique_ptr<Surrogate> load_surrogate(const std::filesystem::path& file) {
  json j = read_file(file, "surrogate");
  auto net = std::make_unique<Surrogate>(j.at("config").get<SurrogateCfg>(), 0);
  net->net().load_state(j.at("state"));
  return net;
}

std::string checkpoint_component(const std::filesystem::path& file) {
  return read_file(file, "").at("component").get<std::string>();
}

std::string checkpoint_param_hash(const std::filesystem::path& file) {
  json j = read_file(file, "");
  const std::string component = j.at("component").get<std::string>();
  if (component == "generator") return hash_hex(load_generator(file)->net().param_hash());
  if (component == "discriminator") return hash_hex(load_discriminator(file)->net().param_hash());
  return hash_hex(load_surrogate(file)->net().param_hash());
}

}  // namespace tracegan
