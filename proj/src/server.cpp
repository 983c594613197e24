#include "reception/server.hpp"

#include <httplib.h>

#include <sstream>

#include "reception/error.hpp"

namespace reception {

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    Json body;
    body["error"] = message;
    send_json(res, body, status);
}

}  // namespace

struct AnnotationServer::Impl {
    AnnotationStore& store;
    const ChunkCatalog& catalog;
    ServerOptions options;
    httplib::Server http;

    Impl(AnnotationStore& s, const ChunkCatalog& c, ServerOptions o)
        : store(s), catalog(c), options(std::move(o)) {
        routes();
    }

    Json progress_json(const std::string& query_id) const {
        const auto p = store.progress(query_id);
        const auto d = decide_deepening(p.significant, p.annotated, p.dont_know, options.deepen_threshold, query_id);
        return to_json(p, d);
    }

    void routes() {
        http.Get("/api/queries", [this](const httplib::Request&, httplib::Response& res) {
            Json list = Json::array();
            for (const auto& q : store.query_ids()) list.push_back(progress_json(q));
            send_json(res, list);
        });

        http.Get("/api/next", [this](const httplib::Request& req, httplib::Response& res) {
            const auto annotator = req.get_param_value("annotator");
            if (annotator.empty()) return send_error(res, 400, "missing 'annotator' parameter");
            auto c = store.next_candidate(annotator);
            if (!c) {
                res.status = 204;
                return;
            }
            send_json(res, to_json(*c));
        });

        http.Post("/api/label", [this](const httplib::Request& req, httplib::Response& res) {
            Json body;
            try {
                body = Json::parse(req.body);
            } catch (const nlohmann::json::exception&) {
                return send_error(res, 400, "body is not valid JSON");
            }
            if (!body.is_object() || !body.contains("candidate_id") || !body.contains("label") ||
                !body.contains("annotator")) {
                return send_error(res, 400, "expected {candidate_id, label, annotator, duration_seconds}");
            }
            try {
                const auto a = store.submit_label(body["candidate_id"].get<std::string>(),
                                                  std::string_view(body["label"].get<std::string>()),
                                                  body["annotator"].get<std::string>(),
                                                  body.value("duration_seconds", 0.0));
                send_json(res, to_json(a));
            } catch (const DataError& e) {
                send_error(res, 404, e.what());
            } catch (const std::invalid_argument& e) {
                send_error(res, 400, e.what());
            } catch (const nlohmann::json::exception& e) {
                send_error(res, 400, e.what());
            }
        });

        http.Get("/api/progress", [this](const httplib::Request& req, httplib::Response& res) {
            const auto query = req.get_param_value("query");
            if (query.empty()) return send_error(res, 400, "missing 'query' parameter");
            send_json(res, progress_json(query));
        });

        http.Get("/api/context", [this](const httplib::Request& req, httplib::Response& res) {
            const auto chunk = req.get_param_value("chunk");
            std::size_t radius = 2;
            if (req.has_param("radius")) {
                try {
                    radius = std::stoul(req.get_param_value("radius"));
                } catch (const std::exception&) {
                    return send_error(res, 400, "bad 'radius'");
                }
            }
            const auto* centre = catalog.find(chunk);
            if (centre == nullptr) return send_error(res, 404, "unknown chunk '" + chunk + "'");
            Json out;
            out["chunk_id"] = chunk;
            out["doc_id"] = centre->doc_id;
            Json items = Json::array();
            for (const auto* c : catalog.neighborhood(chunk, radius)) {
                Json item;
                item["chunk_id"] = c->chunk_id;
                item["is_hit"] = c->chunk_id == chunk;
                item["text"] = c->text;
                items.push_back(std::move(item));
            }
            out["chunks"] = std::move(items);
            send_json(res, out);
        });

        http.Get("/api/export", [this](const httplib::Request& req, httplib::Response& res) {
            std::optional<std::string> query;
            if (req.has_param("query")) query = req.get_param_value("query");
            std::ostringstream body;
            for (const auto& row : store.export_annotations(query)) jsonl::write_line(body, row);
            res.set_content(body.str(), "application/x-ndjson; charset=utf-8");
        });

        if (options.static_dir) http.set_mount_point("/", *options.static_dir);
    }
};

AnnotationServer::AnnotationServer(AnnotationStore& store, const ChunkCatalog& catalog, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, catalog, std::move(options))) {}

AnnotationServer::~AnnotationServer() { stop(); }

bool AnnotationServer::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }

int AnnotationServer::bind_any_port(const std::string& host) { return impl_->http.bind_to_any_port(host); }

bool AnnotationServer::listen_after_bind() { return impl_->http.listen_after_bind(); }

void AnnotationServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

void AnnotationServer::stop() {
    if (impl_) impl_->http.stop();
}

}  // namespace reception
