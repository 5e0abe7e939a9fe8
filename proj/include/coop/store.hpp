#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "coop/serialization.hpp"

namespace coop {

enum class ArtifactKind { scenario, equilibrium, sweep, score, counterfactual };

std::string to_string(ArtifactKind kind);
ArtifactKind artifact_kind_from_string(const std::string& s);

struct StoredArtifact {
    std::string id;  // SHA-256 of the canonical payload
    ArtifactKind kind = ArtifactKind::scenario;
    std::string created_at;  // ISO-8601 UTC; not part of the id
    io::json payload;
};

struct IndexEntry {
    std::string id;
    ArtifactKind kind = ArtifactKind::scenario;
    std::string created_at;
};

/// Content-addressed JSON artifacts on disk, one file per artifact at
/// `<root>/<kind>/<id>.json`. Writes are atomic (temp file + rename) and
/// serialized across processes with an advisory lock on `<root>/.lock`.
class ArtifactStore {
public:
    explicit ArtifactStore(std::filesystem::path root);

    struct PutResult {
        std::string id;
        bool created = false;  // false when identical content was already stored
    };

    PutResult put(ArtifactKind kind, const io::json& payload);
    /// Throws NotFound.
    StoredArtifact fetch(const std::string& id) const;
    std::optional<StoredArtifact> try_fetch(const std::string& id) const;
    std::vector<IndexEntry> list(std::optional<ArtifactKind> kind = std::nullopt) const;

    /// Rewrites `<root>/index.json` from the files on disk.
    std::vector<IndexEntry> rebuild_index();

    /// True when the root is a writable directory.
    bool healthy() const;
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path path_for(ArtifactKind kind, const std::string& id) const;
    void write_index_locked(const std::vector<IndexEntry>& entries);

    std::filesystem::path root_;
    mutable std::mutex mutex_;
};

}  // namespace coop
