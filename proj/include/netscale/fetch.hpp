#pragma once

// Corpus download, checksum verification and unpacking. Needs libcurl and
// OpenSSL (link netscale_fetch); everything else in the library does not.

#include <curl/curl.h>
#include <openssl/evp.h>
#include <spawn.h>
#include <sys/wait.h>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "netscale/error.hpp"
#include "netscale/manifest.hpp"

extern char** environ;

namespace netscale {

namespace fs = std::filesystem;

namespace detail {

inline std::string to_hex(const unsigned char* data, std::size_t size) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(2 * size, '0');
    for (std::size_t i = 0; i < size; ++i) {
        out[2 * i] = digits[data[i] >> 4];
        out[2 * i + 1] = digits[data[i] & 15];
    }
    return out;
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace detail

/// Hex digest of a file. `algorithm` is any OpenSSL digest name ("sha256", "md5", ...).
inline std::string file_digest(const fs::path& path, const std::string& algorithm = "sha256") {
    const EVP_MD* md = EVP_get_digestbyname(algorithm.c_str());
    if (!md) throw Error("unknown digest '" + algorithm + "'");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1) throw Error("digest initialisation failed");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), out, &len);
    return detail::to_hex(out, len);
}

/// Digest algorithm implied by a hex digest's length: 32 -> md5, 40 -> sha1, 64 -> sha256, 128 -> sha512.
inline std::string digest_algorithm_for(std::string_view hex) {
    switch (hex.size()) {
        case 32: return "md5";
        case 40: return "sha1";
        case 64: return "sha256";
        case 128: return "sha512";
    }
    throw ChecksumError("unrecognised digest length " + std::to_string(hex.size()));
}

/// Lines of "<hex digest>  <file name>" (sha256sum / md5sum output; a '*'
/// before the name marks binary mode and is ignored). Blank and '#' lines are skipped.
inline std::map<std::string, std::string> parse_checksum_list(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto space = body.find_first_of(" \t");
        if (space == std::string_view::npos) throw ChecksumError("checksum list line " + std::to_string(lineno) + " has no file name");
        std::string digest = detail::lower(std::string(body.substr(0, space)));
        auto name = detail::trim(body.substr(space));
        if (!name.empty() && name.front() == '*') name.remove_prefix(1);
        digest_algorithm_for(digest);
        out[std::string(name)] = digest;
    }
    return out;
}

namespace detail {

inline bool is_url(std::string_view s) {
    for (std::string_view scheme : {"http://", "https://", "ftp://", "file://"})
        if (s.substr(0, scheme.size()) == scheme) return true;
    return false;
}

inline void download(const std::string& url, const fs::path& target) {
    static std::once_flag init;
    std::call_once(init, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
    std::FILE* out = std::fopen(target.c_str(), "wb");
    if (!out) throw Error("cannot write '" + target.string() + "'");
    CURL* curl = curl_easy_init();
    if (!curl) {
        std::fclose(out);
        throw Error("curl initialisation failed");
    }
    char err[CURL_ERROR_SIZE] = {};
    curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl, CURLOPT_WRITEDATA, out);
    curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl, CURLOPT_FAILONERROR, 1L);
    curl_easy_setopt(curl, CURLOPT_ERRORBUFFER, err);
    CURLcode rc = curl_easy_perform(curl);
    curl_easy_cleanup(curl);
    std::fclose(out);
    if (rc != CURLE_OK) {
        fs::remove(target);
        throw Error("download of '" + url + "' failed: " + (err[0] ? std::string(err) : curl_easy_strerror(rc)));
    }
}

/// Run a program found on PATH and wait for it; throws on a non-zero exit.
inline void run_program(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    pid_t pid = 0;
    if (posix_spawnp(&pid, argv[0], nullptr, nullptr, argv.data(), environ) != 0)
        throw Error("cannot start '" + args[0] + "'");
    int status = 0;
    if (waitpid(pid, &status, 0) < 0 || !WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw Error("'" + args[0] + "' failed on '" + args.back() + "'");
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline bool is_tar_archive(const std::string& name) {
    auto n = lower(name);
    for (std::string_view ext : {".tar", ".tar.gz", ".tgz", ".tar.bz2", ".tbz2", ".tar.xz", ".txz"})
        if (ends_with(n, ext)) return true;
    return false;
}

/// Files that never describe a network.
inline bool is_auxiliary(const fs::path& rel) {
    auto name = lower(rel.filename().string());
    if (name == "manifest.csv" || name == "manifest.json" || name == ".netscale-fetch.json") return true;
    if (name.rfind("readme", 0) == 0 || name.rfind("license", 0) == 0 || name.rfind("licence", 0) == 0) return true;
    if (name == "sha256sums" || name == "md5sums") return true;
    for (std::string_view ext : {".md", ".pdf", ".sha256", ".md5", ".json", ".html", ".py", ".ipynb"})
        if (ends_with(name, ext)) return true;
    return false;
}

inline std::string network_id_for(const fs::path& rel) {
    std::string s = rel.generic_string();
    for (std::string_view ext : {".gz", ".bz2", ".xz"})
        if (ends_with(s, ext)) s.resize(s.size() - ext.size());
    for (std::string_view ext : {".txt", ".edges", ".edgelist", ".el", ".csv", ".tsv", ".dat", ".net"})
        if (ends_with(lower(s), ext)) {
            s.resize(s.size() - ext.size());
            break;
        }
    std::replace(s.begin(), s.end(), '/', '_');
    return s;
}

inline std::vector<fs::path> network_files(const fs::path& root) {
    std::vector<fs::path> out;
    for (auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        auto rel = fs::relative(e.path(), root);
        if (!is_auxiliary(rel)) out.push_back(rel);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Move every entry of `from` into `to`, replacing same-named entries.
inline void move_contents(const fs::path& from, const fs::path& to) {
    fs::create_directories(to);
    for (auto& e : fs::directory_iterator(from)) {
        auto target = to / e.path().filename();
        if (fs::exists(target)) fs::remove_all(target);
        fs::rename(e.path(), target);
    }
}

}  // namespace detail

struct FetchOptions {
    /// URL (http, https, ftp, file), local archive, local edge-list file, or local directory.
    std::string source;
    /// Optional checksum list; entries may name the archive itself or files inside it.
    std::optional<fs::path> checksum_file;
    /// Optional expected digest of the downloaded/local archive (md5 or sha256 by length).
    std::optional<std::string> archive_digest;
    fs::path destination;
};

struct FetchResult {
    fs::path corpus_dir;
    fs::path manifest;
    std::size_t network_files = 0;
    bool already_present = false;  // a previous fetch of the same source was found; nothing was done
    bool verified = false;         // at least one checksum was checked
    bool manifest_written = false; // false when a manifest already existed and was kept
};

/// Write a manifest stub listing every network file under `root` with blank
/// domain fields, unless a manifest already exists there.
inline bool write_manifest_stub(const fs::path& root) {
    auto path = root / "manifest.csv";
    if (fs::exists(path)) return false;
    std::vector<ManifestEntry> entries;
    std::set<std::string> ids;
    for (auto& rel : detail::network_files(root)) {
        ManifestEntry e;
        e.id = detail::network_id_for(rel);
        if (!ids.insert(e.id).second) {
            e.id = rel.generic_string();
            ids.insert(e.id);
        }
        e.path = rel.generic_string();
        entries.push_back(std::move(e));
    }
    std::ofstream out(path);
    write_manifest_csv(out, entries);
    return true;
}

/// Obtain, verify and unpack a corpus into `opts.destination`.
///
/// Work happens in a sibling staging directory; the destination is only
/// touched after every checksum has matched, so a corrupted archive leaves
/// nothing behind. A stamp file records the source, and a repeat call with
/// the same source returns immediately without downloading.
inline FetchResult fetch_corpus(const FetchOptions& opts) {
    if (opts.source.empty()) throw ParameterError("no corpus source given");
    if (opts.destination.empty()) throw ParameterError("no destination directory given");
    FetchResult result;
    result.corpus_dir = opts.destination;
    result.manifest = opts.destination / "manifest.csv";
    const auto stamp_path = opts.destination / ".netscale-fetch.json";

    if (fs::exists(stamp_path)) {
        std::ifstream in(stamp_path);
        auto stamp = nlohmann::json::parse(in, nullptr, false);
        if (!stamp.is_discarded() && stamp.value("source", std::string{}) == opts.source) {
            result.already_present = true;
            result.verified = stamp.value("verified", false);
            result.manifest_written = write_manifest_stub(opts.destination);
            result.network_files = detail::network_files(opts.destination).size();
            return result;
        }
    }

    std::map<std::string, std::string> expected;
    if (opts.checksum_file) {
        std::ifstream in(*opts.checksum_file);
        if (!in) throw Error("cannot open checksum list '" + opts.checksum_file->string() + "'");
        expected = parse_checksum_list(in);
    }

    auto parent = fs::absolute(opts.destination).parent_path();
    fs::create_directories(parent);
    const auto staging = parent / (opts.destination.filename().string() + ".staging");
    const auto unpacked = staging / "corpus";
    fs::remove_all(staging);
    fs::create_directories(unpacked);

    try {
        fs::path input;
        std::string name;
        if (detail::is_url(opts.source)) {
            auto url_path = opts.source.substr(0, opts.source.find_first_of("?#"));
            name = url_path.substr(url_path.find_last_of('/') + 1);
            if (name.empty()) name = "download";
            input = staging / name;
            detail::download(opts.source, input);
        } else {
            input = opts.source;
            if (!fs::exists(input)) throw Error("source '" + opts.source + "' does not exist");
            name = input.filename().string();
        }

        auto check = [&](const fs::path& file, const std::string& digest, const std::string& label) {
            auto got = file_digest(file, digest_algorithm_for(digest));
            if (got != digest) throw ChecksumError("checksum mismatch for '" + label + "': expected " + digest + ", got " + got);
            result.verified = true;
        };

        std::set<std::string> consumed;
        if (fs::is_directory(input)) {
            fs::copy(input, unpacked, fs::copy_options::recursive);
        } else {
            if (opts.archive_digest) check(input, detail::lower(*opts.archive_digest), name);
            if (auto it = expected.find(name); it != expected.end()) {
                check(input, it->second, name);
                consumed.insert(name);
            }
            if (detail::is_tar_archive(name)) detail::run_program({"tar", "-xf", input.string(), "-C", unpacked.string()});
            else fs::copy_file(input, unpacked / name);
        }
        for (auto& [file, digest] : expected) {
            if (consumed.count(file)) continue;
            auto path = unpacked / file;
            if (!fs::exists(path)) throw ChecksumError("checksum list names '" + file + "', which is not in the corpus");
            check(path, digest, file);
        }

        detail::move_contents(unpacked, opts.destination);
        fs::remove_all(staging);
    } catch (...) {
        fs::remove_all(staging);
        throw;
    }

    result.manifest_written = write_manifest_stub(opts.destination);
    result.network_files = detail::network_files(opts.destination).size();
    nlohmann::ordered_json stamp;
    stamp["source"] = opts.source;
    stamp["verified"] = result.verified;
    stamp["network_files"] = result.network_files;
    std::ofstream(stamp_path) << stamp.dump(2) << '\n';
    return result;
}

}  // namespace netscale
