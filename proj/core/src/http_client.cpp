#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "http_client.hpp"

#include "stars/error.hpp"

namespace stars::http {

ParsedUrl parse_url(const std::string& url) {
    ParsedUrl out;
    std::string rest;
    if (url.rfind("https://", 0) == 0) {
        out.https = true;
        out.port = 443;
        rest = url.substr(8);
    } else if (url.rfind("http://", 0) == 0) {
        out.https = false;
        out.port = 80;
        rest = url.substr(7);
    } else {
        throw ConfigError("endpoint URL must start with http:// or https://: " + url);
    }
    const std::size_t slash = rest.find('/');
    std::string authority = slash == std::string::npos ? rest : rest.substr(0, slash);
    out.path = slash == std::string::npos ? "/" : rest.substr(slash);
    const std::size_t colon = authority.find(':');
    if (colon != std::string::npos) {
        out.host = authority.substr(0, colon);
        try {
            out.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("invalid port in endpoint URL: " + url);
        }
    } else {
        out.host = authority;
    }
    if (out.host.empty()) {
        throw ConfigError("endpoint URL missing host: " + url);
    }
    return out;
}

namespace {

template <typename ClientT>
PostResult do_post(ClientT& client, const ParsedUrl& url, const std::string& body,
                   const std::map<std::string, std::string>& headers,
                   int timeout_seconds) {
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    client.set_write_timeout(timeout_seconds, 0);
    httplib::Headers h(headers.begin(), headers.end());
    auto res = client.Post(url.path, h, body, "application/json");
    PostResult out;
    if (!res) {
        out.status = 0;
        out.error = httplib::to_string(res.error());
        return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
}

}  // namespace

PostResult post_json(const ParsedUrl& url, const std::string& body,
                     const std::map<std::string, std::string>& headers,
                     int timeout_seconds) {
    if (url.https) {
        httplib::SSLClient client(url.host, url.port);
        client.enable_server_certificate_verification(true);
        return do_post(client, url, body, headers, timeout_seconds);
    }
    httplib::Client client(url.host, url.port);
    return do_post(client, url, body, headers, timeout_seconds);
}

}  // namespace stars::http
