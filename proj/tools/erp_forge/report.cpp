#include "report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace forge {

std::string num(double v, int precision) {
    if (!std::isfinite(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos) s = s.substr(s.front() == '-' ? 1 : 0);
    return s;
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

void Csv::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) {
        throw std::logic_error("csv row width mismatch");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
        if (quote) {
            text_ += '"';
            for (char c : cells[i]) {
                if (c == '"') text_ += '"';
                text_ += c;
            }
            text_ += '"';
        } else {
            text_ += cells[i];
        }
    }
    text_ += '\n';
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += kHex[md[i] >> 4];
        out += kHex[md[i] & 15];
    }
    return out;
}

Manifest::Manifest(std::string command, const std::vector<std::string>& argv) {
    std::string line;
    for (const auto& a : argv) {
        if (!line.empty()) line += ' ';
        line += a;
    }
    doc_["tool"] = "erp-forge";
    doc_["command"] = std::move(command);
    doc_["command_line"] = line;
    doc_["inputs"] = nlohmann::ordered_json::array();
    doc_["config"] = nlohmann::ordered_json::object();
    doc_["outputs"] = nlohmann::ordered_json::array();
    doc_["outcomes"] = nlohmann::ordered_json::array();
    doc_["warnings"] = nlohmann::ordered_json::array();
    doc_["timings_s"] = nlohmann::ordered_json::object();
}

void Manifest::input(const std::filesystem::path& path) {
    doc_["inputs"].push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

void Manifest::config(const std::string& key, nlohmann::ordered_json value) { doc_["config"][key] = std::move(value); }

void Manifest::outcome(const std::string& root, const std::string& expiration, const std::string& status,
                       const std::string& message) {
    nlohmann::ordered_json o{{"root", root}, {"expiration", expiration}, {"status", status}};
    if (!message.empty()) o["message"] = message;
    doc_["outcomes"].push_back(std::move(o));
    (status == "ok" ? successes_ : failures_)++;
}

void Manifest::warning(const std::string& message) { doc_["warnings"].push_back(message); }

void Manifest::timing(const std::string& key, double seconds) { doc_["timings_s"][key] = seconds; }

void Manifest::write_output(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
    const auto path = dir / name;
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << content;
        if (!out) throw IoError("write failed for " + path.string());
    }
    doc_["outputs"].push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

void Manifest::save(const std::filesystem::path& dir) {
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write manifest in " + dir.string());
    out << doc_.dump(2) << '\n';
}

}  // namespace forge
