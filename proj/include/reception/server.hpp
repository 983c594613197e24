#pragma once

#include <memory>
#include <optional>
#include <string>

#include "reception/annotate.hpp"
#include "reception/corpus.hpp"

namespace reception {

struct ServerOptions {
    double deepen_threshold = kDefaultDeepenThreshold;
    std::optional<std::string> static_dir;  // UI bundle, mounted at "/"
};

/// HTTP JSON API over an AnnotationStore:
///   GET  /api/queries                 per-query progress list
///   GET  /api/next?annotator=ID       Candidate, or 204 when the queue is empty
///   POST /api/label                   {candidate_id, label, annotator, duration_seconds}
///   GET  /api/progress?query=ID       label counts, density, deepen/stop
///   GET  /api/context?chunk=ID&radius=2
///   GET  /api/export[?query=ID]       JSONL
class AnnotationServer {
public:
    AnnotationServer(AnnotationStore& store, const ChunkCatalog& catalog, ServerOptions options = {});
    ~AnnotationServer();
    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds and blocks until stop().
    bool listen(const std::string& host, int port);
    /// Binds to an ephemeral port and returns it (or -1).
    int bind_any_port(const std::string& host);
    /// Serves on a socket previously bound by bind_any_port; blocks.
    bool listen_after_bind();
    void wait_until_ready() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace reception
