#pragma once

// Thin wrapper so only a couple of translation units pull in cpp-httplib.

#include <chrono>
#include <string>

namespace fusionkit::detail {

enum class Transport { Ok, Connection, Timeout, Other };

struct HttpResult {
    Transport transport = Transport::Ok;
    int status = 0;
    std::string body;
    std::string error;
};

/// `base_url` is `http://host[:port][/prefix]`; `path` is appended to the prefix.
HttpResult http_post_json(const std::string& base_url, const std::string& path, const std::string& body,
                          std::chrono::milliseconds timeout);

HttpResult http_get(const std::string& base_url, const std::string& path, std::chrono::milliseconds timeout);

} // namespace fusionkit::detail
