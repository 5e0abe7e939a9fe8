#include "coop/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

namespace coop {

namespace fs = std::filesystem;

namespace {

constexpr ArtifactKind kAllKinds[] = {ArtifactKind::scenario, ArtifactKind::equilibrium, ArtifactKind::sweep,
                                      ArtifactKind::score, ArtifactKind::counterfactual};

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool valid_id(const std::string& id) {
    return id.size() == 64 && std::all_of(id.begin(), id.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
}

// Cross-process exclusive lock held for the lifetime of the object.
class FileLock {
public:
    explicit FileLock(const fs::path& path) {
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) throw Error("cannot open lock file '" + path.string() + "'");
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            throw Error("cannot lock '" + path.string() + "'");
        }
    }
    ~FileLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

void atomic_write(const fs::path& target, const std::string& text) {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(rng());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << text;
        out.flush();
        if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

StoredArtifact read_artifact(const fs::path& path) {
    const io::json doc = io::read_json_file(path);
    StoredArtifact a;
    a.id = doc.at("id").get<std::string>();
    a.kind = artifact_kind_from_string(doc.at("kind").get<std::string>());
    a.created_at = doc.value("created_at", "");
    a.payload = doc.at("payload");
    return a;
}

}  // namespace

std::string to_string(ArtifactKind kind) {
    switch (kind) {
        case ArtifactKind::scenario: return "scenario";
        case ArtifactKind::equilibrium: return "equilibrium";
        case ArtifactKind::sweep: return "sweep";
        case ArtifactKind::score: return "score";
        case ArtifactKind::counterfactual: return "counterfactual";
    }
    return "scenario";
}

ArtifactKind artifact_kind_from_string(const std::string& s) {
    for (auto k : kAllKinds) {
        if (to_string(k) == s) return k;
    }
    throw DomainError("unknown artifact kind '" + s + "'");
}

ArtifactStore::ArtifactStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
    for (auto k : kAllKinds) fs::create_directories(root_ / to_string(k));
}

fs::path ArtifactStore::path_for(ArtifactKind kind, const std::string& id) const {
    return root_ / to_string(kind) / (id + ".json");
}

ArtifactStore::PutResult ArtifactStore::put(ArtifactKind kind, const io::json& payload) {
    // The kind is part of the digest so the same document stored under two kinds
    // gets two ids.
    const std::string id = io::content_digest(io::json{{"kind", to_string(kind)}, {"payload", payload}});
    const fs::path target = path_for(kind, id);

    std::lock_guard guard(mutex_);
    FileLock lock(root_ / ".lock");
    if (fs::exists(target)) return {id, false};

    io::json doc = {{"id", id}, {"kind", to_string(kind)}, {"created_at", utc_now()},
                    {"payload", io::canonicalize(payload)}};
    atomic_write(target, doc.dump());
    return {id, true};
}

std::optional<StoredArtifact> ArtifactStore::try_fetch(const std::string& id) const {
    if (!valid_id(id)) return std::nullopt;
    for (auto k : kAllKinds) {
        const fs::path p = path_for(k, id);
        if (fs::exists(p)) return read_artifact(p);
    }
    return std::nullopt;
}

StoredArtifact ArtifactStore::fetch(const std::string& id) const {
    if (auto a = try_fetch(id)) return *a;
    throw NotFound("no artifact with id '" + id + "'");
}

std::vector<IndexEntry> ArtifactStore::list(std::optional<ArtifactKind> kind) const {
    std::vector<IndexEntry> out;
    for (auto k : kAllKinds) {
        if (kind && *kind != k) continue;
        const fs::path dir = root_ / to_string(k);
        if (!fs::is_directory(dir)) continue;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() != ".json") continue;
            const std::string id = entry.path().stem().string();
            if (!valid_id(id)) continue;
            try {
                const StoredArtifact a = read_artifact(entry.path());
                out.push_back({a.id, a.kind, a.created_at});
            } catch (const std::exception&) {
                // unreadable or partial file; skipped
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const IndexEntry& x, const IndexEntry& y) {
        return std::tie(x.created_at, x.id) < std::tie(y.created_at, y.id);
    });
    return out;
}

void ArtifactStore::write_index_locked(const std::vector<IndexEntry>& entries) {
    io::json arr = io::json::array();
    for (const auto& e : entries) arr.push_back({{"id", e.id}, {"kind", to_string(e.kind)}, {"created_at", e.created_at}});
    atomic_write(root_ / "index.json", io::json{{"schema_version", io::kSchemaVersion}, {"artifacts", arr}}.dump(2));
}

std::vector<IndexEntry> ArtifactStore::rebuild_index() {
    std::lock_guard guard(mutex_);
    FileLock lock(root_ / ".lock");
    auto entries = list();
    write_index_locked(entries);
    return entries;
}

bool ArtifactStore::healthy() const {
    std::error_code ec;
    if (!fs::is_directory(root_, ec)) return false;
    return ::access(root_.c_str(), W_OK) == 0;
}

}  // namespace coop
