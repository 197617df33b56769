#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

/// Fixed-precision number; NaN and infinities print as NA.
std::string num(double v, int precision = 6);

/// Accumulates CSV text in memory; rows are written in the order given.
class Csv {
public:
    explicit Csv(std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);
    [[nodiscard]] const std::string& text() const { return text_; }

private:
    std::size_t width_;
    std::string text_;
};

std::string sha256_file(const std::filesystem::path& path);

/// Run manifest: command line, input and output digests, configuration,
/// per-expiration outcomes and timings. Written as manifest.json.
class Manifest {
public:
    Manifest(std::string command, const std::vector<std::string>& argv);

    void input(const std::filesystem::path& path);
    void config(const std::string& key, nlohmann::ordered_json value);
    void outcome(const std::string& root, const std::string& expiration, const std::string& status,
                 const std::string& message = {});
    void warning(const std::string& message);
    void timing(const std::string& key, double seconds);

    /// Writes `content` under `dir` and records its digest.
    void write_output(const std::filesystem::path& dir, const std::string& name, const std::string& content);
    void save(const std::filesystem::path& dir);

    [[nodiscard]] int failures() const { return failures_; }
    [[nodiscard]] int successes() const { return successes_; }

private:
    nlohmann::ordered_json doc_;
    int failures_ = 0;
    int successes_ = 0;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace forge
