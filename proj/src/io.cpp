#include "thermosig/io.hpp"

#include <json.hpp>
#include <png.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace thermosig {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Header plus non-blank data lines of a CSV file.
struct CsvFile {
  std::vector<std::string> header;
  std::vector<std::string> lines;

  std::size_t column(std::string_view name, const fs::path& path) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError(path.string() + ": missing column '" + std::string(name) + "'", 0, std::string(name));
  }
};

CsvFile read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  CsvFile csv;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (!have_header) {
      for (auto f : split_csv(line)) csv.header.emplace_back(f);
      have_header = true;
    } else {
      csv.lines.push_back(line);
    }
  }
  if (!have_header) throw ParseError(path.string() + ": empty file");
  return csv;
}

double cell_number(const std::vector<std::string_view>& fields, std::size_t col, std::size_t row,
                   const std::string& col_name, const fs::path& path) {
  if (col >= fields.size())
    throw ParseError(path.string() + ": row " + std::to_string(row) + " has no column '" + col_name + "'", row,
                     col_name);
  const auto v = parse_double(fields[col]);
  if (!v)
    throw ParseError(path.string() + ": non-numeric value '" + std::string(fields[col]) + "' at row " +
                         std::to_string(row) + ", column '" + col_name + "'",
                     row, col_name);
  return *v;
}

std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto append_row = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += r[i];
    }
    out += '\n';
  };
  append_row(header);
  for (const auto& r : rows) append_row(r);
  return out;
}

// ---- 16-bit images ----------------------------------------------------------

RawFrame read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  auto token = [&]() {
    std::string t;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        continue;
      }
      t += c;
    }
    return t;
  };
  if (token() != "P5") throw ParseError(path.string() + ": not a binary PGM (P5)");
  const auto w = parse_double(token());
  const auto h = parse_double(token());
  const auto maxval = parse_double(token());
  if (!w || !h || !maxval || *w < 1 || *h < 1) throw ParseError(path.string() + ": malformed PGM header");
  if (*maxval < 256) throw ParseError(path.string() + ": 16-bit required, found an 8-bit image");
  const auto width = static_cast<Eigen::Index>(*w);
  const auto height = static_cast<Eigen::Index>(*h);
  std::vector<unsigned char> bytes(static_cast<std::size_t>(width * height * 2));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size())
    throw ParseError(path.string() + ": truncated PGM data, expected " + std::to_string(bytes.size()) + " bytes, got " +
                     std::to_string(in.gcount()));
  RawFrame f(height, width);
  for (Eigen::Index i = 0; i < width * height; ++i)
    f.data()[i] = static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
  return f;
}

void write_pgm(const fs::path& path, const RawFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << "P5\n" << frame.cols() << ' ' << frame.rows() << "\n65535\n";
  std::vector<unsigned char> bytes(static_cast<std::size_t>(frame.size() * 2));
  for (Eigen::Index i = 0; i < frame.size(); ++i) {
    bytes[2 * i] = static_cast<unsigned char>(frame.data()[i] >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(frame.data()[i] & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

RawFrame read_png(const fs::path& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw InvalidArgument("cannot open '" + path.string() + "'");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("libpng initialisation failed");
  }
  RawFrame f;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(path.string() + ": corrupt PNG");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(path.string() + ": 16-bit required, found a " + std::to_string(depth) + "-bit " +
                     (color == PNG_COLOR_TYPE_GRAY ? "grayscale" : "colour") + " image");
  }
  f.resize(h, w);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 2);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) f(y, x) = static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return f;
}

bool has_extension(const fs::path& p, std::initializer_list<const char*> exts) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return std::any_of(exts.begin(), exts.end(), [&](const char* x) { return e == x; });
}

fs::path sidecar_for(const fs::path& raw) {
  fs::path a = raw;
  a += ".json";
  if (fs::exists(a)) return a;
  fs::path b = raw;
  b.replace_extension(".json");
  if (fs::exists(b)) return b;
  throw InvalidArgument("raw frame file '" + raw.string() + "' has no JSON sidecar ('" + a.string() + "')");
}

}  // namespace

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

ThermalFrameSequence load_frames(const fs::path& path, std::optional<double> fps) {
  if (!fs::exists(path)) throw InvalidArgument("frame source '" + path.string() + "' does not exist");
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path))
      if (e.is_regular_file() && has_extension(e.path(), {".pgm", ".png"})) files.push_back(e.path());
    if (files.empty()) throw InvalidArgument("frame directory '" + path.string() + "' contains no PGM/PNG frames");
    std::sort(files.begin(), files.end());
    if (!fps) throw InvalidArgument("frame directory needs an fps (meta.json or --fps)");
    std::vector<RawFrame> frames;
    frames.reserve(files.size());
    for (const auto& f : files) {
      RawFrame frame = has_extension(f, {".png"}) ? read_png(f) : read_pgm(f);
      if (!frames.empty() && (frame.rows() != frames.front().rows() || frame.cols() != frames.front().cols()))
        throw InvalidArgument("frame '" + f.filename().string() + "' is " + std::to_string(frame.cols()) + "x" +
                              std::to_string(frame.rows()) + ", expected " + std::to_string(frames.front().cols()) +
                              "x" + std::to_string(frames.front().rows()));
      frames.push_back(std::move(frame));
    }
    return ThermalFrameSequence(std::move(frames), *fps);
  }

  const json side = [&] {
    try {
      return json::parse(read_text(sidecar_for(path)));
    } catch (const json::exception& e) {
      throw ParseError("frame sidecar: " + std::string(e.what()));
    }
  }();
  long long width = 0, height = 0, count = 0;
  std::string dtype;
  double side_fps = 0.0;
  try {
    width = side.at("width").get<long long>();
    height = side.at("height").get<long long>();
    count = side.at("count").get<long long>();
    dtype = side.value("dtype", std::string("u16le"));
    side_fps = side.value("fps", 0.0);
  } catch (const json::exception& e) {
    throw ParseError("frame sidecar: " + std::string(e.what()));
  }
  if (dtype != "u16le") throw ParseError("frame sidecar: dtype '" + dtype + "' unsupported, 16-bit required (u16le)");
  if (width < 1 || height < 1 || count < 1) throw ParseError("frame sidecar: width, height and count must be positive");
  const double rate = fps ? *fps : side_fps;
  const auto expected = static_cast<std::uintmax_t>(width * height * count * 2);
  const std::uintmax_t actual = fs::file_size(path);
  if (actual != expected)
    throw ParseError("raw frame file '" + path.string() + "' size mismatch: expected " + std::to_string(expected) +
                     " bytes, got " + std::to_string(actual));
  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> bytes(static_cast<std::size_t>(width * height * 2));
  std::vector<RawFrame> frames;
  frames.reserve(static_cast<std::size_t>(count));
  for (long long k = 0; k < count; ++k) {
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    RawFrame f(height, width);
    for (long long i = 0; i < width * height; ++i)
      f.data()[i] = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
    frames.push_back(std::move(f));
  }
  return ThermalFrameSequence(std::move(frames), rate);
}

void write_frames_pgm(const fs::path& dir, const ThermalFrameSequence& seq) {
  fs::create_directories(dir);
  char name[32];
  for (std::size_t i = 0; i < seq.size(); ++i) {
    std::snprintf(name, sizeof name, "frame_%06zu.pgm", i);
    write_pgm(dir / name, seq.frame(i));
  }
}

void write_frame_png(const fs::path& file, const RawFrame& frame) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(file.c_str(), "wb"));
  if (!fp) throw InvalidArgument("cannot write '" + file.string() + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("writing PNG '" + file.string() + "' failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(frame.cols()), static_cast<png_uint_32>(frame.rows()), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(static_cast<std::size_t>(frame.cols()) * 2);
  for (Eigen::Index y = 0; y < frame.rows(); ++y) {
    for (Eigen::Index x = 0; x < frame.cols(); ++x) {
      row[2 * x] = static_cast<unsigned char>(frame(y, x) >> 8);
      row[2 * x + 1] = static_cast<unsigned char>(frame(y, x) & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_frames_raw(const fs::path& file, const ThermalFrameSequence& seq) {
  if (seq.size() == 0) throw InvalidArgument("write_frames_raw: empty sequence");
  {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + file.string() + "'");
    std::vector<unsigned char> bytes(static_cast<std::size_t>(seq.width()) * static_cast<std::size_t>(seq.height()) * 2);
    for (const auto& f : seq.frames()) {
      for (Eigen::Index i = 0; i < f.size(); ++i) {
        bytes[2 * i] = static_cast<unsigned char>(f.data()[i] & 0xff);
        bytes[2 * i + 1] = static_cast<unsigned char>(f.data()[i] >> 8);
      }
      out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
  }
  const json side = {{"width", seq.width()}, {"height", seq.height()}, {"count", seq.size()},
                     {"dtype", "u16le"},     {"fps", seq.fps()}};
  fs::path sc = file;
  sc += ".json";
  write_text(sc, side.dump(2) + "\n");
}

namespace {

constexpr std::array<const char*, 16> kLandmarkColumns = {
    "frame_idx", "conf",    "bb_x",   "bb_y",   "bb_w",      "bb_h",      "eye_l_x",   "eye_l_y",
    "eye_r_x",   "eye_r_y", "nose_x", "nose_y", "mouth_l_x", "mouth_l_y", "mouth_r_x", "mouth_r_y"};

}  // namespace

LandmarkTrack load_landmarks(const fs::path& path) {
  const CsvFile csv = read_csv(path);
  std::array<std::size_t, 16> col{};
  for (std::size_t k = 0; k < kLandmarkColumns.size(); ++k) col[k] = csv.column(kLandmarkColumns[k], path);
  std::vector<LandmarkFrame> detections;
  detections.reserve(csv.lines.size());
  for (std::size_t r = 0; r < csv.lines.size(); ++r) {
    const auto fields = split_csv(csv.lines[r]);
    std::array<double, 16> v{};
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = cell_number(fields, col[k], r + 1, kLandmarkColumns[k], path);
    if (v[0] < 0 || v[0] != std::floor(v[0]))
      throw ParseError(path.string() + ": frame_idx must be a non-negative integer at row " + std::to_string(r + 1),
                       r + 1, "frame_idx");
    LandmarkFrame lm;
    lm.frame_idx = static_cast<std::int64_t>(v[0]);
    lm.confidence = v[1];
    lm.bbox = {v[2], v[3], v[4], v[5]};
    for (int p = 0; p < 5; ++p) lm.points[static_cast<std::size_t>(p)] = {v[6 + 2 * p], v[7 + 2 * p]};
    detections.push_back(lm);
  }
  return LandmarkTrack::from_detections(std::move(detections));
}

void write_landmarks(const fs::path& path, const LandmarkTrack& track) {
  std::vector<std::string> header(kLandmarkColumns.begin(), kLandmarkColumns.end());
  std::vector<std::vector<std::string>> rows;
  rows.reserve(track.size());
  for (const auto& e : track.entries()) {
    std::vector<std::string> r{std::to_string(e.frame_idx), format_double(e.confidence), format_double(e.bbox.x),
                               format_double(e.bbox.y),     format_double(e.bbox.w),     format_double(e.bbox.h)};
    for (const auto& p : e.points) {
      r.push_back(format_double(p.x()));
      r.push_back(format_double(p.y()));
    }
    rows.push_back(std::move(r));
  }
  write_text(path, csv_text(header, rows));
}

ReferenceSignal load_reference(const fs::path& path, std::string name, std::string units) {
  const CsvFile csv = read_csv(path);
  const std::size_t tc = csv.column("time_s", path);
  const std::size_t vc = csv.column("value", path);
  std::vector<double> time;
  Series values(static_cast<Eigen::Index>(csv.lines.size()));
  for (std::size_t r = 0; r < csv.lines.size(); ++r) {
    const auto fields = split_csv(csv.lines[r]);
    const double t = cell_number(fields, tc, r + 1, "time_s", path);
    values[static_cast<Eigen::Index>(r)] = cell_number(fields, vc, r + 1, "value", path);
    if (!time.empty() && !(t > time.back()))
      throw ParseError(path.string() + ": time not increasing at row " + std::to_string(r + 1), r + 1, "time_s");
    time.push_back(t);
  }
  if (time.size() < 2) throw TooFewSamples("reference " + path.string(), 2, time.size());
  return ReferenceSignal::from_samples(std::move(name), std::move(units), std::move(time), std::move(values));
}

void write_reference(const fs::path& path, const ReferenceSignal& ref) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ref.time.size());
  for (std::size_t i = 0; i < ref.time.size(); ++i)
    rows.push_back({format_double(ref.time[i]), format_double(ref.values[static_cast<Eigen::Index>(i)])});
  write_text(path, csv_text({"time_s", "value"}, rows));
}

void write_traces(const fs::path& path, const std::vector<RoiTrace>& traces) {
  if (traces.empty()) throw InvalidArgument("write_traces: no traces");
  const Eigen::Index n = traces.front().size();
  std::vector<std::string> header{"frame_idx", "time_s"};
  for (const auto& t : traces) {
    t.validate();
    if (t.size() != n) throw InvalidArgument("write_traces: traces differ in length");
    header.push_back(std::string(to_string(t.roi)) + ":" + to_string(t.aggregation));
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::string> r{std::to_string(i), format_double(static_cast<double>(i) / traces.front().fps)};
    for (const auto& t : traces) r.push_back(t.valid[i] ? format_double(t.values[i]) : std::string());
    rows.push_back(std::move(r));
  }
  write_text(path, csv_text(header, rows));
}

std::vector<RoiTrace> load_traces(const fs::path& path, double fps) {
  if (!(fps > 0.0)) throw InvalidArgument("load_traces: fps must be positive");
  const CsvFile csv = read_csv(path);
  csv.column("frame_idx", path);
  std::vector<RoiTrace> traces;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < csv.header.size(); ++c) {
    const std::string& h = csv.header[c];
    if (h == "frame_idx" || h == "time_s") continue;
    const auto colon = h.find(':');
    RoiTrace t;
    t.roi = parse_roi(h.substr(0, colon));
    t.aggregation = colon == std::string::npos ? AggregationKind::mean() : parse_aggregation(h.substr(colon + 1));
    t.fps = fps;
    traces.push_back(std::move(t));
    cols.push_back(c);
  }
  if (traces.empty()) throw ParseError(path.string() + ": no ROI columns");
  const auto n = static_cast<Eigen::Index>(csv.lines.size());
  for (auto& t : traces) {
    t.values = Series::Zero(n);
    t.valid = Mask::Constant(n, false);
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto fields = split_csv(csv.lines[static_cast<std::size_t>(r)]);
    for (std::size_t k = 0; k < traces.size(); ++k) {
      if (cols[k] >= fields.size() || fields[cols[k]].empty()) continue;
      const double v =
          cell_number(fields, cols[k], static_cast<std::size_t>(r) + 1, csv.header[cols[k]], path);
      if (!std::isfinite(v)) continue;
      traces[k].values[r] = v;
      traces[k].valid[r] = true;
    }
  }
  return traces;
}

void write_estimate(const fs::path& path, const BiosignalEstimate& est) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(est.size()));
  for (Eigen::Index i = 0; i < est.size(); ++i)
    rows.push_back({format_double(est.time_at(i)), est.valid[i] ? format_double(est.values[i]) : std::string(),
                    est.valid[i] ? "1" : "0"});
  write_text(path, csv_text({"time_s", "value", "valid"}, rows));
}

BiosignalEstimate load_estimate(const fs::path& path, BiosignalKind kind) {
  const CsvFile csv = read_csv(path);
  const std::size_t tc = csv.column("time_s", path);
  const std::size_t vc = csv.column("value", path);
  std::optional<std::size_t> okc;
  for (std::size_t i = 0; i < csv.header.size(); ++i)
    if (csv.header[i] == "valid") okc = i;
  const auto n = static_cast<Eigen::Index>(csv.lines.size());
  if (n < 2) throw TooFewSamples("estimate " + path.string(), 2, static_cast<std::size_t>(n));
  BiosignalEstimate est;
  est.kind = kind;
  est.values = Series::Zero(n);
  est.valid = Mask::Constant(n, false);
  std::vector<double> t(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = static_cast<std::size_t>(r) + 1;
    const auto fields = split_csv(csv.lines[static_cast<std::size_t>(r)]);
    t[static_cast<std::size_t>(r)] = cell_number(fields, tc, row, "time_s", path);
    bool ok = vc < fields.size() && !fields[vc].empty();
    if (okc) ok = ok && cell_number(fields, *okc, row, "valid", path) != 0.0;
    if (ok) {
      est.values[r] = cell_number(fields, vc, row, "value", path);
      est.valid[r] = std::isfinite(est.values[r]);
    }
  }
  const double dt = t[1] - t[0];
  if (!(dt > 0.0)) throw ParseError(path.string() + ": time not increasing at row 2", 2, "time_s");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw ParseError(path.string() + ": time not increasing at row " + std::to_string(i + 1), i + 1, "time_s");
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * std::max(1.0, dt))
      throw ParseError(path.string() + ": estimate timestamps must be uniform (row " + std::to_string(i + 1) + ")", i + 1,
                       "time_s");
  }
  est.t0 = t[0];
  est.rate_hz = 1.0 / dt;
  est.provenance = path.filename().string();
  return est;
}

std::string reference_units(std::string_view name) {
  if (name == "PEDA") return "kOhm";
  if (name == "PP" || name == "PP_NR") return "degC^2";
  if (name == "HR" || name == "BR") return "bpm";
  return "";
}

namespace {

json meta_to_json(const SessionMeta& m, double fps) {
  return {{"session_id", m.session_id},   {"subject_id", m.subject_id},
          {"condition", m.condition_name()}, {"sex", std::string(to_string(m.sex))},
          {"age_group", std::string(to_string(m.age_group))}, {"fps", fps}};
}

}  // namespace

SessionBundle load_session(const fs::path& dir, bool with_frames) {
  SessionBundle b;
  const fs::path meta_path = dir / "meta.json";
  if (!fs::exists(meta_path)) throw InvalidArgument("session '" + dir.string() + "' has no meta.json");
  try {
    const json m = json::parse(read_text(meta_path));
    b.meta.session_id = m.value("session_id", dir.filename().string());
    b.meta.subject_id = m.value("subject_id", std::string());
    b.meta.condition_label = m.value("condition", std::string("Other"));
    b.meta.condition = parse_condition(b.meta.condition_label);
    b.meta.sex = parse_sex(m.value("sex", std::string()));
    b.meta.age_group = parse_age_group(m.value("age_group", std::string()));
    b.fps = m.value("fps", 7.5);
  } catch (const json::exception& e) {
    throw ParseError(meta_path.string() + ": " + e.what());
  }
  if (!(b.fps > 0.0)) throw ParseError(meta_path.string() + ": fps must be positive");

  const bool have_traces = fs::exists(dir / "traces.csv");
  if (have_traces) b.traces = load_traces(dir / "traces.csv", b.fps);
  if (!have_traces || with_frames) {
    if (fs::exists(dir / "frames")) b.frames = load_frames(dir / "frames", b.fps);
    else if (fs::exists(dir / "frames.raw")) b.frames = load_frames(dir / "frames.raw", b.fps);
    if (fs::exists(dir / "landmarks.csv")) b.landmarks = load_landmarks(dir / "landmarks.csv");
  }
  if (!have_traces && !b.frames)
    throw InvalidArgument("session '" + dir.string() + "' has neither traces.csv nor frames");
  if (b.frames && !b.landmarks) throw InvalidArgument("session '" + dir.string() + "' has frames but no landmarks.csv");

  if (fs::exists(dir / "refs")) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir / "refs"))
      if (e.is_regular_file() && has_extension(e.path(), {".csv"})) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string name = f.stem().string();
      b.references[name] = load_reference(f, name, reference_units(name));
    }
  }
  return b;
}

void write_session(const fs::path& dir, const SessionBundle& b) {
  fs::create_directories(dir);
  write_text(dir / "meta.json", meta_to_json(b.meta, b.fps).dump(2) + "\n");
  if (!b.traces.empty()) write_traces(dir / "traces.csv", b.traces);
  if (b.frames) write_frames_pgm(dir / "frames", *b.frames);
  if (b.landmarks) write_landmarks(dir / "landmarks.csv", *b.landmarks);
  if (!b.references.empty()) {
    fs::create_directories(dir / "refs");
    for (const auto& [name, ref] : b.references) write_reference(dir / "refs" / (name + ".csv"), ref);
  }
}

std::vector<fs::path> find_sessions(const fs::path& root) {
  if (!fs::is_directory(root)) throw InvalidArgument("session root '" + root.string() + "' is not a directory");
  if (fs::exists(root / "meta.json")) return {root};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && fs::exists(e.path() / "meta.json")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw InvalidArgument("no sessions (directories with meta.json) under '" + root.string() + "'");
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw InvalidArgument("write to '" + path.string() + "' failed");
  }
  fs::rename(tmp, path);
}

}  // namespace thermosig
