#pragma once

#include "affinity/error.hpp"
#include "service.hpp"

namespace httplib {
class Server;
}

namespace affinity::service {

// 4xx for caller errors, 409 for session state conflicts.
int http_status(ErrorCode code);

// Registers the /v1 API on `server`. The service must outlive the server.
void mount_routes(httplib::Server& server, ElicitationService& service);

} // namespace affinity::service
