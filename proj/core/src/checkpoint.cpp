#include "a2f/checkpoint.hpp"

#include <algorithm>

#include "a2f/errors.hpp"

namespace a2f {

namespace fs = std::filesystem;

void save_checkpoint(const fs::path& path, const CheckpointHeader& header,
                     const std::vector<CheckpointPart>& parts) {
  torch::serialize::OutputArchive archive;
  archive.write("format", c10::IValue(std::string("a2f-checkpoint")));
  archive.write("format_version", c10::IValue(header.format_version));
  archive.write("stage", c10::IValue(header.stage));
  archive.write("config", c10::IValue(header.config_json));
  archive.write("schema", c10::IValue(header.schema.to_json()));
  archive.write("schema_fingerprint", c10::IValue(header.schema.fingerprint()));
  archive.write("epoch", c10::IValue(header.epoch));
  std::string roles;
  for (const auto& part : parts) {
    roles += (roles.empty() ? "" : ",") + part.role;
    torch::serialize::OutputArchive params;
    part.module->save(params);
    archive.write("params/" + part.role, params);
    if (part.optimizer) {
      torch::serialize::OutputArchive opt;
      part.optimizer->save(opt);
      archive.write("optimizer/" + part.role, opt);
    }
  }
  archive.write("roles", c10::IValue(roles));
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  archive.save_to(tmp.string());
  fs::rename(tmp, path);
}

namespace {

std::string read_string(torch::serialize::InputArchive& archive, const std::string& key) {
  c10::IValue v;
  if (!archive.try_read(key, v) || !v.isString()) {
    throw CheckpointError("checkpoint field '" + key + "' missing");
  }
  return v.toStringRef();
}

std::int64_t read_int(torch::serialize::InputArchive& archive, const std::string& key) {
  c10::IValue v;
  if (!archive.try_read(key, v) || !v.isInt()) {
    throw CheckpointError("checkpoint field '" + key + "' missing");
  }
  return v.toInt();
}

}  // namespace

CheckpointReader::CheckpointReader(const fs::path& path) : path_(path) {
  if (!fs::exists(path)) throw CheckpointError("checkpoint " + path.string() + " not found");
  try {
    archive_.load_from(path.string());
  } catch (const c10::Error&) {
    throw CheckpointError("checkpoint " + path.string() + " is corrupted or not a checkpoint");
  }
  try {
    if (read_string(archive_, "format") != "a2f-checkpoint") {
      throw CheckpointError(path.string() + " is not an a2f checkpoint");
    }
    header_.format_version = read_int(archive_, "format_version");
    if (header_.format_version != kCheckpointFormatVersion) {
      throw CheckpointError("checkpoint format version " + std::to_string(header_.format_version) +
                            " is not supported");
    }
    header_.stage = read_string(archive_, "stage");
    header_.config_json = read_string(archive_, "config");
    header_.schema = AttributeSchema::from_json(read_string(archive_, "schema"));
    header_.schema_fingerprint = read_string(archive_, "schema_fingerprint");
    header_.epoch = read_int(archive_, "epoch");
  } catch (const SchemaError& e) {
    throw CheckpointError("checkpoint schema: " + std::string(e.what()));
  }
  if (header_.schema.fingerprint() != header_.schema_fingerprint) {
    throw CheckpointError("checkpoint schema does not match its stored fingerprint");
  }
  const auto roles = read_string(archive_, "roles");
  std::size_t start = 0;
  while (start < roles.size()) {
    auto comma = roles.find(',', start);
    if (comma == std::string::npos) comma = roles.size();
    roles_.push_back(roles.substr(start, comma - start));
    start = comma + 1;
  }
}

bool CheckpointReader::has_role(const std::string& role) const {
  return std::find(roles_.begin(), roles_.end(), role) != roles_.end();
}

void CheckpointReader::load_module(const std::string& role, torch::nn::Module& module) {
  torch::serialize::InputArchive params;
  if (!archive_.try_read("params/" + role, params)) {
    throw CheckpointError("checkpoint " + path_.string() + " has no role '" + role + "'");
  }
  try {
    module.load(params);
  } catch (const c10::Error& e) {
    throw CheckpointError("parameters of role '" + role + "' do not fit the model: " +
                          e.what_without_backtrace());
  }
}

bool CheckpointReader::load_optimizer(const std::string& role, torch::optim::Optimizer& optimizer) {
  torch::serialize::InputArchive opt;
  if (!archive_.try_read("optimizer/" + role, opt)) return false;
  try {
    optimizer.load(opt);
  } catch (const c10::Error& e) {
    throw CheckpointError("optimizer state of role '" + role + "' is unusable: " +
                          e.what_without_backtrace());
  }
  return true;
}

void CheckpointReader::expect_stage(const std::string& stage) const {
  if (header_.stage != stage) {
    throw CheckpointError(path_.string() + " holds a '" + header_.stage + "' checkpoint, expected '" +
                          stage + "'");
  }
}

}  // namespace a2f
