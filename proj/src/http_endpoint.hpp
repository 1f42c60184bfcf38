#pragma once

#include <string>
#include <string_view>

namespace clonar::net {

/// "http://host:port/prefix" split into the part httplib::Client takes and
/// a path prefix without trailing slash.
struct Endpoint {
  std::string origin;
  std::string pathPrefix;
};

inline Endpoint splitUrl(std::string_view url) {
  const auto scheme = url.find("://");
  const std::size_t hostStart = scheme == std::string_view::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', hostStart);
  Endpoint e;
  if (slash == std::string_view::npos) {
    e.origin = std::string(url);
  } else {
    e.origin = std::string(url.substr(0, slash));
    e.pathPrefix = std::string(url.substr(slash));
  }
  while (!e.pathPrefix.empty() && e.pathPrefix.back() == '/') e.pathPrefix.pop_back();
  return e;
}

}  // namespace clonar::net
