#pragma once

// Internal thin wrapper over cpp-httplib shared by the completion gateway
// and the remote embedding provider. Not installed.

#include <map>
#include <string>

namespace stars::http {

struct ParsedUrl {
    bool https = false;
    std::string host;
    int port = 80;
    std::string path;  // leading slash, may carry nested segments
};

/// Accepts http://host[:port][/path] and https://host[:port][/path].
ParsedUrl parse_url(const std::string& url);

struct PostResult {
    int status = 0;          // 0 means transport-level failure
    std::string body;
    std::string error;       // transport error description when status == 0
};

PostResult post_json(const ParsedUrl& url, const std::string& body,
                     const std::map<std::string, std::string>& headers,
                     int timeout_seconds);

}  // namespace stars::http
