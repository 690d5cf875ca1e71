#include "market/store.hpp"

#include <atomic>
#include <fstream>

#include <unistd.h>

namespace market {

namespace fs = std::filesystem;

ContentHash BlobStore::put(const std::string& payload)
{
    return put(std::span(reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size()));
}

std::string BlobStore::get_text(const ContentHash& hash) const
{
    Bytes b = get(hash);
    return std::string(b.begin(), b.end());
}

ContentHash MemoryBlobStore::put(std::span<const std::uint8_t> payload)
{
    ContentHash h = digest(payload);
    std::lock_guard lock(mutex_);
    blobs_.try_emplace(h, payload.begin(), payload.end());
    return h;
}

Bytes MemoryBlobStore::get(const ContentHash& hash) const
{
    std::lock_guard lock(mutex_);
    auto it = blobs_.find(hash);
    if (it == blobs_.end()) {
        throw BlobNotFound(hash);
    }
    return it->second;
}

bool MemoryBlobStore::has(const ContentHash& hash) const
{
    std::lock_guard lock(mutex_);
    return blobs_.contains(hash);
}

std::size_t MemoryBlobStore::size() const
{
    std::lock_guard lock(mutex_);
    return blobs_.size();
}

DirBlobStore::DirBlobStore(fs::path root) : root_(std::move(root))
{
    fs::create_directories(root_);
}

fs::path DirBlobStore::blob_path(const ContentHash& hash) const
{
    return root_ / hash.hex();
}

ContentHash DirBlobStore::put(std::span<const std::uint8_t> payload)
{
    ContentHash h = digest(payload);
    fs::path target = blob_path(h);
    if (fs::exists(target)) {
        return h;
    }
    static std::atomic<unsigned> counter{0};
    fs::path tmp = root_ / (".tmp-" + std::to_string(::getpid()) + "-" +
                            std::to_string(counter.fetch_add(1)));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw StoreError("cannot open temp file in " + root_.string());
        }
        out.write(reinterpret_cast<const char*>(payload.data()),
                  std::streamsize(payload.size()));
        if (!out) {
            throw StoreError("short write to " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        if (!fs::exists(target)) {
            throw StoreError("rename failed: " + ec.message());
        }
    }
    return h;
}

Bytes DirBlobStore::get(const ContentHash& hash) const
{
    std::ifstream in(blob_path(hash), std::ios::binary);
    if (!in) {
        throw BlobNotFound(hash);
    }
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (digest(data) != hash) {
        throw StoreError("stored blob corrupted: " + hash.hex());
    }
    return data;
}

bool DirBlobStore::has(const ContentHash& hash) const
{
    return fs::exists(blob_path(hash));
}

std::size_t DirBlobStore::size() const
{
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(root_)) {
        if (entry.is_regular_file() && entry.path().filename().string().size() == 64) {
            ++n;
        }
    }
    return n;
}

} // namespace market
