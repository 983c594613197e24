#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "reception/jsonl.hpp"

namespace reception {

struct RunConfig {
    std::filesystem::path out_dir;
    std::filesystem::path corpus;  // ignored when demo is set
    std::string source_doc;        // document whose quotes are traced
    bool demo = false;
    std::uint64_t demo_seed = 42;
    std::size_t demo_quotes = 8;
    double ocr_rate = 0.0;
    std::size_t chunk_size = 100;
    std::string embedder = "hash";  // "hash" or "import"
    std::size_t dim = 256;
    std::filesystem::path chunk_vectors;  // embedder=import
    std::filesystem::path query_vectors;  // embedder=import
    std::size_t k = 1000;
    int min_score = 30;
    std::uint64_t seed = 1;  // query-tier sampling
    double deepen_threshold = 0.5;
    int port = 8080;
    unsigned threads = 0;
    std::filesystem::path annotations;  // existing export; simulated in demo mode when empty
    std::filesystem::path vocab;
    std::filesystem::path lexicon;
    std::string rho_mode = "pooled";

    /// Throws std::invalid_argument naming the offending key.
    void validate() const;
    /// Settings that affect artifact content (paths to outputs excluded).
    Json content_json() const;
};

/// Sets one key from its textual value; throws std::invalid_argument on an
/// unknown key or a malformed value.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// key = value lines, '#' comments. Relative paths resolve against the
/// config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);

class StageError : public std::runtime_error {
public:
    // exit_code follows the CLI convention: 1 usage, 2 data, 3 internal.
    StageError(std::string stage, const std::string& cause, int exit_code)
        : std::runtime_error("stage '" + stage + "': " + cause), stage_(std::move(stage)), exit_code_(exit_code) {}
    const std::string& stage() const { return stage_; }
    int exit_code() const { return exit_code_; }

private:
    std::string stage_;
    int exit_code_;
};

struct StageOutcome {
    std::string name;
    bool ran = false;
};

struct RunReport {
    std::vector<StageOutcome> stages;
    std::vector<std::string> warnings;
};

/// Runs every stage in order, skipping stages whose outputs are all newer
/// than their inputs. Failures are rethrown as StageError.
RunReport run_pipeline(const RunConfig& cfg, std::ostream* log = nullptr);

/// Writes via a temporary file and rename so interrupted stages never leave
/// a complete-looking artifact.
void write_text_file(const std::filesystem::path& path, const std::string& content);
void write_jsonl_file(const std::filesystem::path& path, const std::vector<Json>& rows);

}  // namespace reception
