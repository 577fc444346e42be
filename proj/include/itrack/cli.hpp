#pragma once

// Command-line front end: gen-toy, fit, backtest, sweep.

#include "itrack/backtest.hpp"
#include "itrack/market_data.hpp"
#include "itrack/selector.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace itrack::cli {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "ITRACK_OUT_DIR";

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRunFailed = 1;
inline constexpr int kUsage = 2;

/// The JSON document read by `backtest` and `sweep`. Relative paths resolve
/// against the directory holding the config file.
///
///     {
///       "prices": "prices.csv",          // or "toy": {ToySpec fields}
///       "benchmark": "benchmark.csv",
///       "groups": "groups.csv",          // optional
///       "methods": ["ours", "forward"],
///       "k": [30, 40, 50],
///       "seed": 0,
///       "train": {TrainConfig fields},
///       "backtest": {BacktestConfig fields},
///       "output_dir": "out"               // optional
///     }
struct RunConfig {
    std::optional<std::filesystem::path> prices;
    std::optional<std::filesystem::path> benchmark;
    std::optional<std::filesystem::path> groups;
    std::optional<ToySpec> toy;
    std::vector<Method> methods{Method::Ours};
    std::vector<int> k{30};
    std::uint64_t seed = 0;
    selector::TrainConfig train;
    backtest::BacktestConfig backtest;
    std::optional<std::filesystem::path> output_dir;

    void validate() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// ticker,group
std::vector<std::pair<std::string, int>> load_groups(const std::filesystem::path& path);
void write_groups(const std::filesystem::path& path, const std::vector<std::string>& tickers,
                  const std::vector<int>& groups);

/// Records written files and emits `manifest.json` with SHA-256 hashes.
class Manifest {
public:
    Manifest(std::filesystem::path dir, std::string command);

    void add(const std::filesystem::path& file);
    void add_error(const std::string& message);
    void set(const std::string& key, nlohmann::json value);
    bool failed() const { return !errors_.empty(); }
    /// Writes the manifest atomically and returns its path.
    std::filesystem::path write() const;

private:
    std::filesystem::path dir_;
    std::string command_;
    std::vector<std::filesystem::path> files_;
    std::vector<std::string> errors_;
    nlohmann::json extra_ = nlohmann::json::object();
};

/// Parses argv and runs a subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

}  // namespace itrack::cli
