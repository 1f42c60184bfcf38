#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "clonar/detection/detection.hpp"
#include "clonar/error.hpp"
#include "clonar/evaluation/anova.hpp"
#include "clonar/evaluation/sus.hpp"
#include "clonar/generation/extrude.hpp"
#include "clonar/generation/mesh.hpp"
#include "clonar/imaging/codec.hpp"
#include "clonar/lasso/lasso.hpp"
#include "clonar/meshops/assets.hpp"
#include "clonar/meshops/decimate.hpp"

namespace py = pybind11;
using namespace clonar;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U32Array = py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>;

imaging::RasterImage toImage(const U8Array& a) {
  if (a.ndim() != 3 || (a.shape(2) != 3 && a.shape(2) != 4)) {
    fail(ErrorCode::InvalidArgument, "image must have shape (H, W, 3) or (H, W, 4)");
  }
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  const int c = static_cast<int>(a.shape(2));
  imaging::RasterImage img(w, h);
  const auto* p = a.data();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto* px = p + (static_cast<std::size_t>(y) * w + x) * c;
      img.at(x, y) = {px[0], px[1], px[2], c == 4 ? px[3] : std::uint8_t{255}};
    }
  }
  return img;
}

U8Array fromImage(const imaging::RasterImage& img) {
  U8Array out({img.height(), img.width(), 4});
  auto* p = out.mutable_data();
  for (const auto& px : img.pixels()) {
    *p++ = px.r;
    *p++ = px.g;
    *p++ = px.b;
    *p++ = px.a;
  }
  return out;
}

imaging::BinaryMask toMask(const U8Array& a) {
  if (a.ndim() != 2) fail(ErrorCode::InvalidArgument, "mask must have shape (H, W)");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  imaging::BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, a.at(y, x) != 0);
  }
  return m;
}

py::array_t<bool> fromMask(const imaging::BinaryMask& m) {
  py::array_t<bool> out({m.height(), m.width()});
  auto* p = out.mutable_data();
  for (const auto b : m.bits()) *p++ = b != 0;
  return out;
}

std::vector<imaging::Point2> toPoints(const F64Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) fail(ErrorCode::InvalidArgument, "points must have shape (N, 2)");
  std::vector<imaging::Point2> pts(static_cast<std::size_t>(a.shape(0)));
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {a.at(i, 0), a.at(i, 1)};
  return pts;
}

F64Array fromPoints(const std::vector<imaging::Point2>& pts) {
  F64Array out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.mutable_at(i, 0) = pts[i].x;
    out.mutable_at(i, 1) = pts[i].y;
  }
  return out;
}

Mesh toMesh(const F64Array& v, const U32Array& f) {
  if (v.ndim() != 2 || v.shape(1) != 3) fail(ErrorCode::InvalidArgument, "vertices must have shape (N, 3)");
  if (f.ndim() != 2 || f.shape(1) != 3) fail(ErrorCode::InvalidArgument, "faces must have shape (M, 3)");
  Mesh m;
  for (py::ssize_t i = 0; i < v.shape(0); ++i) m.vertices.push_back({v.at(i, 0), v.at(i, 1), v.at(i, 2)});
  for (py::ssize_t i = 0; i < f.shape(0); ++i) m.faces.push_back({f.at(i, 0), f.at(i, 1), f.at(i, 2)});
  m.checkStructure();
  return m;
}

py::tuple fromMesh(const Mesh& m) {
  F64Array v({static_cast<py::ssize_t>(m.vertices.size()), py::ssize_t{3}});
  U32Array f({static_cast<py::ssize_t>(m.faces.size()), py::ssize_t{3}});
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    v.mutable_at(i, 0) = m.vertices[i].x;
    v.mutable_at(i, 1) = m.vertices[i].y;
    v.mutable_at(i, 2) = m.vertices[i].z;
  }
  for (std::size_t i = 0; i < m.faces.size(); ++i) {
    for (int k = 0; k < 3; ++k) f.mutable_at(i, k) = m.faces[i][k];
  }
  return py::make_tuple(v, f);
}

py::bytes toBytes(std::span<const std::uint8_t> b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

std::vector<std::uint8_t> fromBytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

evaluation::SusResponse toSus(const std::vector<int>& items) { return evaluation::SusResponse::fromItems(items); }

py::dict anovaDict(const evaluation::AnovaResult& r) {
  py::dict d;
  d["F"] = r.F;
  d["df_between"] = r.dfBetween;
  d["df_within"] = r.dfWithin;
  d["p"] = r.p;
  d["ss_between"] = r.ssBetween;
  d["ss_within"] = r.ssWithin;
  return d;
}

}  // namespace

PYBIND11_MODULE(_clonar, m) {
  m.doc() = "Lasso selection, colour-blob detection, mesh simplification and glTF export";

  static py::exception<Error> clonarError(m, "ClonarError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object args = py::make_tuple(std::string(toString(e.code())), e.what());
      PyErr_SetObject(clonarError.ptr(), args.ptr());
    }
  });

  m.def("encode_png", [](const U8Array& img) { return toBytes(imaging::encodePng(toImage(img))); },
        py::arg("image"), "RGBA PNG bytes from an (H, W, 3|4) uint8 array.");
  m.def("decode_png", [](const py::bytes& b) { return fromImage(imaging::decodePng(fromBytes(b))); },
        py::arg("data"), "(H, W, 4) uint8 array from PNG bytes.");

  m.def(
      "close_stroke",
      [](const F64Array& pts, double minZoneArea) {
        lasso::Stroke s;
        s.points = toPoints(pts);
        const auto poly = lasso::closeStroke(s, {minZoneArea, 0.5});
        return py::make_tuple(fromPoints(poly.vertices), poly.areaPx);
      },
      py::arg("points"), py::arg("min_zone_area") = 400.0,
      "Closed zone (vertices, area_px) from an (N, 2) stroke.");
  m.def(
      "point_in_polygon",
      [](const F64Array& poly, double x, double y) { return lasso::pointInPolygon(toPoints(poly), {x, y}); },
      py::arg("polygon"), py::arg("x"), py::arg("y"));

  m.def(
      "segment",
      [](const U8Array& img, std::optional<F64Array> zone, double threshold) {
        std::optional<lasso::LassoPolygon> poly;
        if (zone) poly = lasso::LassoPolygon{toPoints(*zone), 0.0};
        detection::DetectorConfig cfg;
        cfg.confidenceThreshold = threshold;
        detection::ReferenceSegmenter backend;
        py::list out;
        for (const auto& o : detection::segment(toImage(img), poly, cfg, backend)) {
          py::dict d;
          d["label"] = o.label;
          d["confidence"] = o.confidence;
          d["bbox"] = py::make_tuple(o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h);
          d["mask"] = fromMask(o.mask);
          d["crop"] = fromImage(o.crop);
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("image"), py::arg("zone") = py::none(), py::arg("threshold") = 0.5,
      "Reference colour-blob detection, optionally restricted to a zone polygon.");

  m.def("stub_extrude", [](const U8Array& mask) { return fromMesh(generation::stubExtrude(toMask(mask))); },
        py::arg("mask"), "Closed prism (vertices, faces) from an (H, W) silhouette.");
  m.def(
      "decimate",
      [](const F64Array& v, const U32Array& f, std::size_t target, bool preserveBoundary) {
        meshops::DecimationParams p;
        p.targetVertices = target;
        p.preserveBoundary = preserveBoundary;
        return fromMesh(meshops::decimate(toMesh(v, f), p));
      },
      py::arg("vertices"), py::arg("faces"), py::arg("target_vertices"), py::arg("preserve_boundary") = false);
  m.def("export_glb", [](const F64Array& v, const U32Array& f) { return toBytes(meshops::exportGltf(toMesh(v, f))); },
        py::arg("vertices"), py::arg("faces"));
  m.def("import_glb", [](const py::bytes& b) { return fromMesh(meshops::importGltf(fromBytes(b))); },
        py::arg("data"));
  m.def(
      "validate_mesh",
      [](const F64Array& v, const U32Array& f) {
        const auto r = validateMesh(toMesh(v, f));
        py::dict d;
        d["closed"] = r.isClosed();
        d["manifold"] = r.isManifoldEdge;
        d["boundary_edges"] = r.boundaryEdges;
        d["degenerate_faces"] = r.degenerateFaces;
        d["volume"] = r.volume;
        return d;
      },
      py::arg("vertices"), py::arg("faces"));

  m.def("sus_score", [](const std::vector<int>& items) { return evaluation::susScore(toSus(items)); },
        py::arg("items"));
  m.def(
      "sus_mean",
      [](const std::vector<std::vector<int>>& cohort) {
        std::vector<evaluation::SusResponse> rs;
        for (const auto& items : cohort) rs.push_back(toSus(items));
        return evaluation::susMean(rs);
      },
      py::arg("cohort"));
  m.def("anova", [](const std::vector<std::vector<double>>& groups) { return anovaDict(evaluation::anovaFromRaw(groups)); },
        py::arg("groups"), "One-way ANOVA on raw group samples.");
  m.def(
      "anova_from_summary",
      [](const std::vector<std::tuple<std::size_t, double, double>>& groups) {
        std::vector<evaluation::GroupSummary> s;
        for (const auto& [n, mean, var] : groups) s.push_back({n, mean, var});
        return anovaDict(evaluation::anovaFromSummary(s));
      },
      py::arg("groups"), "One-way ANOVA from (n, mean, variance) per group.");
  m.def("f_survival", &evaluation::fSurvival, py::arg("F"), py::arg("df_between"), py::arg("df_within"));
}
