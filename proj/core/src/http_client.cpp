#include "http_client.hpp"

#include <httplib.h>

namespace fusionkit::detail {
namespace {

struct SplitUrl {
    std::string origin;
    std::string prefix;
};

SplitUrl split_url(const std::string& base_url)
{
    const auto scheme_end = base_url.find("://");
    const auto path_start =
        base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) {
        return {base_url, ""};
    }
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }
    return {base_url.substr(0, path_start), prefix};
}

HttpResult to_result(const httplib::Result& res)
{
    HttpResult out;
    if (!res) {
        const auto err = res.error();
        out.error = httplib::to_string(err);
        switch (err) {
        case httplib::Error::Connection:
        case httplib::Error::BindIPAddress:
        case httplib::Error::ProxyConnection:
            out.transport = Transport::Connection;
            break;
        case httplib::Error::ConnectionTimeout:
        case httplib::Error::Read:
            out.transport = Transport::Timeout;
            break;
        default:
            out.transport = Transport::Other;
        }
        return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
}

template <typename Fn>
HttpResult with_client(const std::string& base_url, std::chrono::milliseconds timeout, Fn&& fn)
{
    const auto url = split_url(base_url);
    httplib::Client client(url.origin);
    if (!client.is_valid()) {
        HttpResult out;
        out.transport = Transport::Connection;
        out.error = "invalid endpoint " + base_url;
        return out;
    }
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    return to_result(fn(client, url.prefix));
}

} // namespace

HttpResult http_post_json(const std::string& base_url, const std::string& path, const std::string& body,
                          std::chrono::milliseconds timeout)
{
    return with_client(base_url, timeout, [&](httplib::Client& c, const std::string& prefix) {
        return c.Post(prefix + path, body, "application/json");
    });
}

HttpResult http_get(const std::string& base_url, const std::string& path, std::chrono::milliseconds timeout)
{
    return with_client(base_url, timeout,
                       [&](httplib::Client& c, const std::string& prefix) { return c.Get(prefix + path); });
}

} // namespace fusionkit::detail
