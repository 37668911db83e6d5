#include <cstddef>
#include <fstream>
#include <iostream>
#include <thread>

#include <openssl/evp.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "openlearner/datasets.hpp"

namespace openlearner::data {

namespace fs = std::filesystem;

namespace {

std::string to_hex(const unsigned char* digest, std::size_t length) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (std::size_t i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0f]);
    }
    return out;
}

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
            throw ModelError("failed to initialise SHA-256");
        }
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* bytes, std::size_t length) {
        if (EVP_DigestUpdate(ctx_, bytes, length) != 1) {
            throw ModelError("SHA-256 update failed");
        }
    }
    std::string hex() {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int length = 0;
        if (EVP_DigestFinal_ex(ctx_, digest, &length) != 1) {
            throw ModelError("SHA-256 finalisation failed");
        }
        return to_hex(digest, length);
    }

private:
    EVP_MD_CTX* ctx_;
};

struct ParsedUrl {
    std::string scheme;
    std::string host_port; // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw DataError("unsupported url (missing scheme): " + url);
    }
    ParsedUrl out;
    out.scheme = url.substr(0, scheme_end);
    const auto rest = url.substr(scheme_end + 3);
    if (out.scheme == "file") {
        out.path = rest;
        return out;
    }
    const auto path_start = rest.find('/');
    const std::string authority = path_start == std::string::npos ? rest : rest.substr(0, path_start);
    out.host_port = out.scheme + "://" + authority;
    out.path = path_start == std::string::npos ? "/" : rest.substr(path_start);
    return out;
}

// transient transport failure (retried), as opposed to a digest mismatch
struct TransferError {
    std::string reason;
};

void download_once(const std::string& url, const fs::path& dest) {
    const ParsedUrl parsed = parse_url(url);
    if (parsed.scheme == "file") {
        std::error_code ec;
        fs::copy_file(parsed.path, dest, fs::copy_options::overwrite_existing, ec);
        if (ec) {
            throw TransferError{"cannot copy " + parsed.path + ": " + ec.message()};
        }
        return;
    }
    if (parsed.scheme != "http" && parsed.scheme != "https") {
        throw DataError("unsupported url scheme '" + parsed.scheme + "' in " + url);
    }
    httplib::Client client(parsed.host_port);
    client.set_follow_location(true);
    client.set_connection_timeout(std::chrono::seconds(15));
    client.set_read_timeout(std::chrono::seconds(120));
    std::ofstream out(dest, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + dest.string());
    }
    auto res = client.Get(parsed.path, [&](const char* bytes, size_t length) {
        out.write(bytes, static_cast<std::streamsize>(length));
        return static_cast<bool>(out);
    });
    out.close();
    if (!res) {
        throw TransferError{"transport failure for " + url + ": " + httplib::to_string(res.error())};
    }
    if (res->status != 200) {
        throw TransferError{"HTTP " + std::to_string(res->status) + " for " + url};
    }
}

void download_with_retries(const std::string& url, const fs::path& dest,
                           const FetchOptions& options) {
    auto backoff = options.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            download_once(url, dest);
            return;
        } catch (const TransferError& e) {
            if (attempt >= options.attempts) {
                throw DataError("giving up on " + url + " after " + std::to_string(attempt) +
                                " attempts: " + e.reason);
            }
            if (options.verbose) {
                std::cerr << "retrying " << url << " after failure: " << e.reason << "\n";
            }
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
}

} // namespace

std::string sha256_hex(std::span<const std::byte> bytes) {
    Sha256 hasher;
    hasher.update(bytes.data(), bytes.size());
    return hasher.hex();
}

std::string sha256_hex(std::string_view text) {
    Sha256 hasher;
    hasher.update(text.data(), text.size());
    return hasher.hex();
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string() + " for hashing");
    }
    Sha256 hasher;
    char buffer[1 << 16];
    while (in) {
        in.read(buffer, sizeof(buffer));
        hasher.update(buffer, static_cast<std::size_t>(in.gcount()));
    }
    return hasher.hex();
}

std::vector<fs::path> fetch(const DatasetManifest& manifest, const FetchOptions& options) {
    if (manifest.cache_dir.empty()) {
        throw DataError("manifest '" + manifest.name + "' has no cache_dir");
    }
    const fs::path dataset_dir = manifest.cache_dir / manifest.name;
    fs::create_directories(dataset_dir);

    std::vector<fs::path> paths;
    paths.reserve(manifest.files.size());
    for (const auto& file : manifest.files) {
        const fs::path dest = dataset_dir / file.name;
        bool need_download = true;
        if (fs::exists(dest)) {
            if (sha256_file(dest) == file.sha256) {
                need_download = false; // warm cache, no network
            } else if (options.verbose) {
                std::cerr << dest.string() << " is corrupted, re-downloading\n";
            }
        }
        if (need_download) {
            const fs::path partial = dest.string() + ".partial";
            download_with_retries(file.url, partial, options);
            const std::string actual = sha256_file(partial);
            if (actual != file.sha256) {
                fs::remove(partial);
                throw DataError("digest mismatch for " + file.name + " from " + file.url +
                                ": expected " + file.sha256 + ", got " + actual);
            }
            fs::rename(partial, dest);
        }
        paths.push_back(dest);
    }
    return paths;
}

} // namespace openlearner::data
