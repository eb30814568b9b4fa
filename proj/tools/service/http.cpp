#include "http.hpp"

#include <httplib.h>

namespace affinity::service {

int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownCandidate:
    case ErrorCode::UnknownContext:
        return 404;
    case ErrorCode::DuplicateActiveSession:
    case ErrorCode::SessionNotActive:
    case ErrorCode::DuplicateResponse:
        return 409;
    case ErrorCode::LexiconUnavailable:
        return 503;
    case ErrorCode::StorageError:
        return 500;
    default:
        return 400;
    }
}

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
    send_json(res, status, Json{{"code", code}, {"message", message}});
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const Error& e) {
            send_error(res, http_status(e.code()), error_code_name(e.code()), e.what());
        } catch (const Json::exception& e) {
            send_error(res, 400, "ParseError", e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "InternalError", e.what());
        }
    };
}

Json body_json(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    auto doc = parse_json(req.body, "request body");
    if (!doc.is_object()) fail(ErrorCode::ParseError, "request body must be a JSON object");
    return doc;
}

} // namespace

void mount_routes(httplib::Server& server, ElicitationService& service) {
    server.Get("/v1/healthz", guarded([&service](const httplib::Request&, httplib::Response& res) {
                   send_json(res, 200, Json{{"status", "ok"}, {"lexicon", service.has_lexicon()}});
               }));

    server.Post("/v1/sessions", guarded([&service](const httplib::Request& req, httplib::Response& res) {
                    const auto body = body_json(req);
                    auto it = body.find("candidate_id");
                    if (it == body.end() || !it->is_string())
                        fail(ErrorCode::InvalidArgument, "body needs a string 'candidate_id'");
                    send_json(res, 201, service.create_session(it->get<std::string>()));
                }));

    server.Post(R"(/v1/sessions/([^/]+)/ratings)",
                guarded([&service](const httplib::Request& req, httplib::Response& res) {
                    const auto body = body_json(req);
                    auto it = body.find("ratings");
                    if (it == body.end() || !it->is_object())
                        fail(ErrorCode::InvalidArgument, "body needs a 'ratings' object");
                    std::map<std::string, int> ratings;
                    for (const auto& [variant, value] : it->items()) {
                        if (!value.is_number_integer())
                            fail(ErrorCode::OutOfRangeRating, "rating for '" + variant + "' must be an integer");
                        ratings[variant] = value.get<int>();
                    }
                    std::optional<std::string> key;
                    if (req.has_header("Idempotency-Key")) key = req.get_header_value("Idempotency-Key");
                    std::optional<int> round;
                    if (auto r = body.find("round"); r != body.end()) round = r->get<int>();
                    send_json(res, 200, service.submit_ratings(req.matches[1], ratings, key, round));
                }));

    server.Get(R"(/v1/sessions/([^/]+))", guarded([&service](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, 200, service.get_session(req.matches[1]));
               }));

    server.Get(R"(/v1/candidates/([^/]+)/profile)",
               guarded([&service](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, 200, service.get_profile(req.matches[1]));
               }));

    server.Get(R"(/v1/candidates/([^/]+)/recommendations)",
               guarded([&service](const httplib::Request& req, httplib::Response& res) {
                   std::optional<std::string> context;
                   if (req.has_param("context")) context = req.get_param_value("context");
                   send_json(res, 200, service.get_recommendations(req.matches[1], context));
               }));
}

} // namespace affinity::service
