#pragma once
// File formats. Everything lands on disk through a temp-file-plus-rename so
// readers never observe a partial write.
//
//  * Checkpoint: one JSON header line, a newline, then raw little-endian
//    float64 blocks in the order p, u1, u2, u3, w, wdot (plate vectors carry
//    all four Hermite DOFs per node).
//  * Time series: CSV whose first line is '#' followed by a JSON object with
//    the configuration, its hash, and the run metadata.
//  * Matrices: text triplets "i j value", one entry per line.
//  * Optional SVG line plot of scalar series.

#include "fpsi/config.hpp"
#include "fpsi/integrator.hpp"
#include "fpsi/operators.hpp"
#include "fpsi/util.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fpsi {

inline void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw error("io: cannot open '" + tmp.string() + "' for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw error("io: short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

namespace detail {

inline void append_doubles(std::string& buf, const Vec& v) {
  static_assert(sizeof(double) == 8);
  const std::size_t off = buf.size();
  buf.resize(off + 8 * static_cast<std::size_t>(v.size()));
  std::memcpy(buf.data() + off, v.data(), 8 * static_cast<std::size_t>(v.size()));
}

}  // namespace detail

struct Checkpoint {
  nlohmann::json header;
  State y;
};

inline void write_checkpoint(const std::string& path, const OperatorSet& o, const State& y, double t,
                             const std::string& cfg_hash) {
  const int n = o.np;
  nlohmann::json h{{"format", "fpsi-checkpoint"},
                   {"version", 1},
                   {"t", t},
                   {"grid", {{"nx", o.geom.nx}, {"ny", o.geom.ny}, {"nz", o.geom.nz}}},
                   {"np", o.np},
                   {"nw", o.nw},
                   {"blocks", {"p", "u1", "u2", "u3", "w", "wdot"}},
                   {"config_hash", cfg_hash}};
  std::string buf = h.dump();
  buf.push_back('\n');
  detail::append_doubles(buf, y.p);
  for (int c = 0; c < 3; ++c) detail::append_doubles(buf, Vec(y.u.segment(c * n, n)));
  detail::append_doubles(buf, y.w);
  detail::append_doubles(buf, y.s);
  atomic_write(path, buf);
}

inline Checkpoint read_checkpoint(const std::string& path, const OperatorSet& o) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw error("io: cannot open checkpoint '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw error("io: checkpoint '" + path + "' missing header");
  Checkpoint cp;
  try {
    cp.header = nlohmann::json::parse(line);
  } catch (const std::exception& e) {
    throw error("io: bad checkpoint header: " + std::string(e.what()));
  }
  if (cp.header.value("format", "") != "fpsi-checkpoint") throw error("io: not a checkpoint file: '" + path + "'");
  if (cp.header.value("np", -1) != o.np || cp.header.value("nw", -1) != o.nw)
    throw error("io: checkpoint dimensions do not match the configured grid");
  auto read_block = [&f, &path](Eigen::Index n) {
    Vec v(n);
    f.read(reinterpret_cast<char*>(v.data()), 8 * n);
    if (!f) throw error("io: truncated checkpoint '" + path + "'");
    return v;
  };
  cp.y = State(o.np, o.nu, o.nw);
  cp.y.p = read_block(o.np);
  for (int c = 0; c < 3; ++c) cp.y.u.segment(c * o.np, o.np) = read_block(o.np);
  cp.y.w = read_block(o.nw);
  cp.y.s = read_block(o.nw);
  return cp;
}

/// Energy/balance trace as CSV with a JSON comment header.
inline void write_trace_csv(const std::string& path, const std::vector<StepRecord>& trace, const nlohmann::json& meta,
                            bool with_potential) {
  std::string out = "# " + meta.dump() + "\n";
  out += with_potential ? "t,E,a_O_cum,divU_work_cum,balance_residual,h_norm,Pi\n"
                        : "t,E,a_O_cum,divU_work_cum,balance_residual,h_norm\n";
  char buf[256];
  for (const StepRecord& r : trace) {
    if (with_potential)
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.E, r.aO_cum, r.divU_cum,
                    r.balance_residual, r.h_norm, r.Pi);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.E, r.aO_cum, r.divU_cum,
                    r.balance_residual, r.h_norm);
    out += buf;
  }
  atomic_write(path, out);
}

inline void dump_matrix(const std::string& path, const SpMat& A) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%% %ld %ld %ld\n", static_cast<long>(A.rows()), static_cast<long>(A.cols()),
                static_cast<long>(A.nonZeros()));
  out += buf;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(it.row()), static_cast<long>(it.col()),
                    it.value());
      out += buf;
    }
  atomic_write(path, out);
}

/// Minimal self-contained line plot; series share the time axis.
inline void write_svg_plot(const std::string& path, const std::string& title, const std::vector<double>& t,
                           const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  const int W = 720, H = 420, L = 70, R = 20, Tm = 40, B = 45;
  double tmin = t.empty() ? 0.0 : t.front(), tmax = t.empty() ? 1.0 : t.back();
  if (tmax <= tmin) tmax = tmin + 1.0;
  double vmin = 0.0, vmax = 1.0;
  bool first = true;
  for (const auto& s : series)
    for (double v : s.second) {
      if (first) {
        vmin = vmax = v;
        first = false;
      } else {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
    }
  if (vmax <= vmin) vmax = vmin + 1.0;
  const double pad = 0.05 * (vmax - vmin);
  vmin -= pad;
  vmax += pad;
  auto X = [&](double x) { return L + (x - tmin) / (tmax - tmin) * (W - L - R); };
  auto Y = [&](double v) { return H - B - (v - vmin) / (vmax - vmin) * (H - Tm - B); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n", W, H,
                W, H);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">%s</text>\n",
                W / 2, title.c_str());
  svg += buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", L, H - B, W - R,
                H - B);
  svg += buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", L, Tm, L, H - B);
  svg += buf;
  for (int i = 0; i <= 4; ++i) {
    const double tv = tmin + i * (tmax - tmin) / 4.0, vv = vmin + i * (vmax - vmin) / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%d\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">%.3g</text>\n",
                  X(tv), H - B + 18, tv);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">%.3g</text>\n",
                  L - 6, Y(vv) + 4, vv);
    svg += buf;
  }
  int ci = 0;
  for (const auto& s : series) {
    std::string pts;
    for (std::size_t i = 0; i < t.size() && i < s.second.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(t[i]), Y(s.second[i]));
      pts += buf;
    }
    const char* col = colors[ci % 4];
    std::snprintf(buf, sizeof buf, "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" points=\"%s\"/>\n", col,
                  pts.c_str());
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\" fill=\"%s\">%s</text>\n",
                  W - R - 150, Tm + 16 * (ci + 1), col, s.first.c_str());
    svg += buf;
    ++ci;
  }
  svg += "</svg>\n";
  atomic_write(path, svg);
}

struct AmbientSamples {
  Vec u;    // 3 * npts, component-major
  Vec div;  // npts, zero when the file omits it
};

/// Nodal ambient field file: JSON with nx/ny/nz, component-major "values",
/// and optionally "div_values" with nodal divergence samples.
inline AmbientSamples read_ambient_file(const std::string& path, const BoxGeometry& g) {
  std::ifstream f(path);
  if (!f) throw config_error("io: cannot open ambient file '" + path + "'");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw config_error("io: bad ambient file: " + std::string(e.what()));
  }
  if (j.value("nx", -1) != g.nx || j.value("ny", -1) != g.ny || j.value("nz", -1) != g.nz)
    throw config_error("io: ambient file grid does not match the configuration");
  std::vector<double> vals = j.value("values", std::vector<double>{});
  if (vals.size() != static_cast<std::size_t>(3 * g.npts()))
    throw config_error("io: ambient file needs 3 * npts values, component-major");
  std::vector<double> dvals = j.value("div_values", std::vector<double>{});
  if (!dvals.empty() && dvals.size() != static_cast<std::size_t>(g.npts()))
    throw config_error("io: div_values needs npts entries when present");
  AmbientSamples s;
  s.u = Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  s.div = dvals.empty() ? Vec(Vec::Zero(g.npts()))
                        : Vec(Eigen::Map<const Vec>(dvals.data(), static_cast<Eigen::Index>(dvals.size())));
  return s;
}

}  // namespace fpsi
