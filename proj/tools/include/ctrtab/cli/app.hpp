#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace ctrtab::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_other = 1,
  exit_config = 2,        // bad config, unknown keys or out-of-domain parameters
  exit_prerequisite = 3,  // missing input file or upstream artifact
  exit_training_abort = 4,
  exit_data = 5,          // malformed data, schema or checkpoint
};

int exit_code_for(const std::exception& e);

struct Invocation {
  std::string command;  // gen | train | sample | eval | verify | ablate
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::optional<std::string> stage;
  std::optional<std::uint64_t> seed;
};

// Loads the config, runs the command and maps errors onto exit codes.
// Progress goes to log, error messages to err.
int run(const Invocation& inv, std::ostream& log, std::ostream& err);

// argv parsing plus run().
int main_entry(int argc, char** argv);

// Commands. cfg is the parsed config file; relative paths inside it resolve
// against base. Each writes its artifacts, <command>.config.json and an entry
// in manifest.json under out.
void cmd_gen(const nlohmann::json& cfg, const std::filesystem::path& base, const std::filesystem::path& out,
             std::ostream& log);
void cmd_train(const nlohmann::json& cfg, const std::filesystem::path& base, const std::filesystem::path& out,
               std::ostream& log);
void cmd_sample(const nlohmann::json& cfg, const std::filesystem::path& base, const std::filesystem::path& out,
                std::ostream& log);
void cmd_eval(const nlohmann::json& cfg, const std::filesystem::path& base, const std::filesystem::path& out,
              std::ostream& log);
void cmd_verify(const nlohmann::json& cfg, const std::filesystem::path& base, const std::filesystem::path& out,
                std::ostream& log);
void cmd_ablate(const nlohmann::json& cfg, const std::filesystem::path& base, const std::filesystem::path& out,
                std::ostream& log);

// 64-bit FNV-1a of a file's bytes as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

}  // namespace ctrtab::cli
