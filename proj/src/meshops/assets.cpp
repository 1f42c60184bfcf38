#include "clonar/meshops/assets.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "clonar/error.hpp"

namespace clonar::meshops {

using nlohmann::json;

namespace {

constexpr std::uint32_t kGlbMagic = 0x46546C67;  // "glTF"
constexpr std::uint32_t kChunkJson = 0x4E4F534A;  // "JSON"
constexpr std::uint32_t kChunkBin = 0x004E4942;   // "BIN\0"
constexpr int kFloat = 5126;
constexpr int kUnsignedByte = 5121;
constexpr int kUnsignedShort = 5123;
constexpr int kUnsignedInt = 5125;

void putU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t getU32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void putF32(std::vector<std::uint8_t>& out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  putU32(out, bits);
}

float getF32(std::span<const std::uint8_t> b, std::size_t at) {
  const std::uint32_t bits = getU32(b, at);
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

std::size_t pad4(std::size_t n) { return (n + 3) & ~std::size_t{3}; }

[[noreturn]] void malformed(const std::string& what) { fail(ErrorCode::MalformedAsset, what); }

}  // namespace

std::vector<std::uint8_t> exportGltf(const Mesh& m) {
  m.checkStructure();
  if (m.vertices.empty() || m.faces.empty()) malformed("cannot export an empty mesh");
  const std::size_t indexCount = m.faces.size() * 3;
  const std::size_t posBytes = m.vertices.size() * 12;
  const std::size_t normBytes = m.normals ? posBytes : 0;
  const std::size_t idxBytes = indexCount * 4;
  const std::size_t binBytes = posBytes + normBytes + idxBytes;
  if (m.vertices.size() > std::numeric_limits<std::uint32_t>::max() ||
      binBytes > std::numeric_limits<std::uint32_t>::max() / 2) {
    fail(ErrorCode::MeshTooLarge, "mesh exceeds 32-bit glTF limits");
  }

  std::vector<std::uint8_t> bin;
  bin.reserve(binBytes);
  float lo[3] = {std::numeric_limits<float>::max(), std::numeric_limits<float>::max(),
                 std::numeric_limits<float>::max()};
  float hi[3] = {-lo[0], -lo[1], -lo[2]};
  for (const auto& v : m.vertices) {
    const float c[3] = {static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)};
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], c[k]);
      hi[k] = std::max(hi[k], c[k]);
      putF32(bin, c[k]);
    }
  }
  if (m.normals) {
    for (const auto& n : *m.normals) {
      putF32(bin, n.x);
      putF32(bin, n.y);
      putF32(bin, n.z);
    }
  }
  for (const auto& f : m.faces) {
    for (const auto i : f) putU32(bin, i);
  }

  json attributes = {{"POSITION", 0}};
  json bufferViews = json::array();
  json accessors = json::array();
  bufferViews.push_back({{"buffer", 0}, {"byteOffset", 0}, {"byteLength", posBytes}, {"target", 34962}});
  accessors.push_back({{"bufferView", 0},
                       {"componentType", kFloat},
                       {"count", m.vertices.size()},
                       {"type", "VEC3"},
                       {"min", {lo[0], lo[1], lo[2]}},
                       {"max", {hi[0], hi[1], hi[2]}}});
  if (m.normals) {
    attributes["NORMAL"] = 1;
    bufferViews.push_back(
        {{"buffer", 0}, {"byteOffset", posBytes}, {"byteLength", normBytes}, {"target", 34962}});
    accessors.push_back({{"bufferView", 1},
                         {"componentType", kFloat},
                         {"count", m.vertices.size()},
                         {"type", "VEC3"}});
  }
  const std::size_t idxView = bufferViews.size();
  bufferViews.push_back({{"buffer", 0},
                         {"byteOffset", posBytes + normBytes},
                         {"byteLength", idxBytes},
                         {"target", 34963}});
  accessors.push_back({{"bufferView", idxView},
                       {"componentType", kUnsignedInt},
                       {"count", indexCount},
                       {"type", "SCALAR"}});

  const json doc = {
      {"asset", {{"version", "2.0"}, {"generator", "clonar"}}},
      {"scene", 0},
      {"scenes", {{{"nodes", {0}}}}},
      {"nodes", {{{"mesh", 0}}}},
      {"meshes",
       {{{"primitives",
          {{{"attributes", attributes}, {"indices", accessors.size() - 1}, {"mode", 4}}}}}}},
      {"buffers", {{{"byteLength", binBytes}}}},
      {"bufferViews", bufferViews},
      {"accessors", accessors},
  };

  std::string text = doc.dump();
  text.resize(pad4(text.size()), ' ');
  bin.resize(pad4(bin.size()), 0);

  std::vector<std::uint8_t> out;
  const std::size_t total = 12 + 8 + text.size() + 8 + bin.size();
  out.reserve(total);
  putU32(out, kGlbMagic);
  putU32(out, 2);
  putU32(out, static_cast<std::uint32_t>(total));
  putU32(out, static_cast<std::uint32_t>(text.size()));
  putU32(out, kChunkJson);
  out.insert(out.end(), text.begin(), text.end());
  putU32(out, static_cast<std::uint32_t>(bin.size()));
  putU32(out, kChunkBin);
  out.insert(out.end(), bin.begin(), bin.end());
  return out;
}

Mesh importGltf(std::span<const std::uint8_t> b) {
  if (b.size() < 20) malformed("glb shorter than its header");
  if (getU32(b, 0) != kGlbMagic) malformed("missing glTF magic");
  if (getU32(b, 4) != 2) malformed("unsupported glb version");
  if (getU32(b, 8) != b.size()) malformed("glb length field does not match the data");

  std::size_t at = 12;
  std::string jsonText;
  std::span<const std::uint8_t> bin;
  bool haveJson = false;
  while (at + 8 <= b.size()) {
    const std::uint32_t len = getU32(b, at);
    const std::uint32_t type = getU32(b, at + 4);
    at += 8;
    if (len > b.size() - at) malformed("chunk overruns the file");
    if (type == kChunkJson && !haveJson) {
      jsonText.assign(reinterpret_cast<const char*>(b.data() + at), len);
      haveJson = true;
    } else if (type == kChunkBin && bin.empty()) {
      bin = b.subspan(at, len);
    }
    at += pad4(len);
  }
  if (!haveJson) malformed("glb has no JSON chunk");

  try {
    const json doc = json::parse(jsonText);
    const auto& prim = doc.at("meshes").at(0).at("primitives").at(0);
    if (prim.value("mode", 4) != 4) malformed("only triangle primitives are supported");

    auto accessorData = [&](int index, std::size_t& count, int& componentType,
                            std::string& type) -> std::span<const std::uint8_t> {
      const auto& acc = doc.at("accessors").at(static_cast<std::size_t>(index));
      count = acc.at("count").get<std::size_t>();
      componentType = acc.at("componentType").get<int>();
      type = acc.at("type").get<std::string>();
      const auto& view = doc.at("bufferViews").at(acc.at("bufferView").get<std::size_t>());
      if (view.value("buffer", 0) != 0) malformed("only the embedded buffer is supported");
      if (view.contains("byteStride")) malformed("strided buffer views are not supported");
      const std::size_t offset = view.value("byteOffset", std::size_t{0}) +
                                 acc.value("byteOffset", std::size_t{0});
      const std::size_t length = view.at("byteLength").get<std::size_t>();
      if (offset > bin.size() || length > bin.size() - offset) malformed("buffer view overruns BIN");
      return bin.subspan(offset, length);
    };

    Mesh m;
    std::size_t count = 0;
    int ctype = 0;
    std::string type;
    auto pos = accessorData(prim.at("attributes").at("POSITION").get<int>(), count, ctype, type);
    if (ctype != kFloat || type != "VEC3") malformed("POSITION must be float32 VEC3");
    if (count * 12 > pos.size()) malformed("POSITION accessor overruns its view");
    m.vertices.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      m.vertices.push_back({getF32(pos, i * 12), getF32(pos, i * 12 + 4), getF32(pos, i * 12 + 8)});
    }

    if (prim.at("attributes").contains("NORMAL")) {
      std::size_t nc = 0;
      auto nrm = accessorData(prim["attributes"]["NORMAL"].get<int>(), nc, ctype, type);
      if (ctype != kFloat || type != "VEC3" || nc != count || nc * 12 > nrm.size()) {
        malformed("NORMAL must be float32 VEC3 matching POSITION");
      }
      std::vector<Vec3> normals;
      for (std::size_t i = 0; i < nc; ++i) {
        normals.push_back({getF32(nrm, i * 12), getF32(nrm, i * 12 + 4), getF32(nrm, i * 12 + 8)});
      }
      m.normals = std::move(normals);
    }

    std::vector<std::uint32_t> indices;
    if (prim.contains("indices")) {
      std::size_t ic = 0;
      auto idx = accessorData(prim["indices"].get<int>(), ic, ctype, type);
      const std::size_t width = ctype == kUnsignedInt     ? 4
                                : ctype == kUnsignedShort ? 2
                                : ctype == kUnsignedByte  ? 1
                                                          : 0;
      if (width == 0 || type != "SCALAR") malformed("unsupported index accessor");
      if (ic * width > idx.size()) malformed("index accessor overruns its view");
      for (std::size_t i = 0; i < ic; ++i) {
        std::uint32_t v = 0;
        for (std::size_t k = 0; k < width; ++k) v |= static_cast<std::uint32_t>(idx[i * width + k]) << (8 * k);
        indices.push_back(v);
      }
    } else {
      for (std::size_t i = 0; i < count; ++i) indices.push_back(static_cast<std::uint32_t>(i));
    }
    if (indices.size() % 3 != 0) malformed("index count is not a multiple of 3");
    for (std::size_t i = 0; i < indices.size(); i += 3) {
      m.faces.push_back({indices[i], indices[i + 1], indices[i + 2]});
    }
    try {
      m.checkStructure();
    } catch (const Error& e) {
      malformed(e.what());
    }
    return m;
  } catch (const json::exception& e) {
    malformed(std::string("glTF JSON: ") + e.what());
  }
}

std::string exportObj(const Mesh& m) {
  m.checkStructure();
  std::string out;
  char buf[32];
  auto num = [&](double v) {
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, r.ptr);
  };
  for (const auto& v : m.vertices) {
    out += "v ";
    num(v.x);
    out += ' ';
    num(v.y);
    out += ' ';
    num(v.z);
    out += '\n';
  }
  for (const auto& f : m.faces) {
    out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' +
           std::to_string(f[2] + 1) + '\n';
  }
  return out;
}

Mesh importObj(std::string_view text) {
  Mesh m;
  std::size_t lineNo = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    ++lineNo;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);

    std::istringstream in(line);
    std::string tag;
    if (!(in >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(in >> x >> y >> z)) malformed("bad vertex on line " + std::to_string(lineNo));
      m.vertices.push_back({x, y, z});
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string tok;
      while (in >> tok) {
        long idx = 0;
        const auto slash = tok.find('/');
        const std::string head = tok.substr(0, slash);
        const auto r = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (r.ec != std::errc{} || r.ptr != head.data() + head.size() || idx == 0) {
          malformed("bad face index '" + tok + "' on line " + std::to_string(lineNo));
        }
        const long resolved = idx > 0 ? idx - 1 : static_cast<long>(m.vertices.size()) + idx;
        if (resolved < 0 || resolved >= static_cast<long>(m.vertices.size())) {
          malformed("face index out of range on line " + std::to_string(lineNo));
        }
        poly.push_back(static_cast<std::uint32_t>(resolved));
      }
      if (poly.size() < 3) malformed("face with fewer than 3 vertices on line " + std::to_string(lineNo));
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) m.faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  try {
    m.checkStructure();
  } catch (const Error& e) {
    malformed(e.what());
  }
  return m;
}

}  // namespace clonar::meshops
