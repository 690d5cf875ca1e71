#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "market/hash.hpp"

namespace market {

using Bytes = std::vector<std::uint8_t>;

struct StoreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BlobNotFound : StoreError {
    explicit BlobNotFound(const ContentHash& h) : StoreError("blob not found: " + h.hex()) {}
};

// Local content-addressed blob store. Blobs are keyed by the SHA-256 of
// their bytes; put is idempotent. Handles are safe to share across threads.
class BlobStore {
public:
    virtual ~BlobStore() = default;

    virtual ContentHash put(std::span<const std::uint8_t> payload) = 0;
    virtual Bytes get(const ContentHash& hash) const = 0;
    virtual bool has(const ContentHash& hash) const = 0;
    virtual std::size_t size() const = 0;

    ContentHash put(const std::string& payload);
    std::string get_text(const ContentHash& hash) const;
};

class MemoryBlobStore final : public BlobStore {
public:
    ContentHash put(std::span<const std::uint8_t> payload) override;
    using BlobStore::put;
    Bytes get(const ContentHash& hash) const override;
    bool has(const ContentHash& hash) const override;
    std::size_t size() const override;

private:
    mutable std::mutex mutex_;
    std::map<ContentHash, Bytes> blobs_;
};

// One file per blob, filename = hex digest, under a root directory.
// Writes go through a temp file and rename, so racing puts of the same
// content are benign.
class DirBlobStore final : public BlobStore {
public:
    explicit DirBlobStore(std::filesystem::path root);

    ContentHash put(std::span<const std::uint8_t> payload) override;
    using BlobStore::put;
    Bytes get(const ContentHash& hash) const override;
    bool has(const ContentHash& hash) const override;
    std::size_t size() const override;

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path blob_path(const ContentHash& hash) const;

    std::filesystem::path root_;
};

} // namespace market
