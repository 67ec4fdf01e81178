#include "wdro/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wdro/error.hpp"

namespace wdro::io {

std::string format_real(double v) {
  char buf[64];
  // %.17g always round-trips; prefer the shortest that does.
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

constexpr std::string_view kModelMagic = "wdro-mlp";
constexpr int kModelVersion = 1;

struct LineReader {
  std::istream& in;
  int line_no = 0;

  // Next non-blank, non-comment line split into tokens; false at EOF.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      tokens.clear();
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(ErrorCode code, const std::string& msg) const {
    throw Error(code, "line " + std::to_string(line_no) + ": " + msg);
  }

  void expect(std::vector<std::string>& tokens, std::string_view keyword) {
    if (!next(tokens)) fail(ErrorCode::Parse, "unexpected end of file, expected '" +
                                                  std::string(keyword) + "'");
    if (tokens.front() != keyword)
      fail(ErrorCode::Parse, "expected '" + std::string(keyword) + "', found '" + tokens.front() + "'");
  }

  double real(const std::string& tok) const {
    const char* begin = tok.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v))
      fail(ErrorCode::Parse, "'" + tok + "' is not a finite real number");
    return v;
  }

  std::size_t count(const std::string& tok) const {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      fail(ErrorCode::Parse, "'" + tok + "' is not a non-negative integer");
    return v;
  }

  std::size_t keyed_count(std::vector<std::string>& tokens, std::string_view keyword) {
    expect(tokens, keyword);
    if (tokens.size() != 2) fail(ErrorCode::Parse, std::string(keyword) + " takes one value");
    return count(tokens[1]);
  }

  std::vector<double> reals(const std::vector<std::string>& tokens, std::size_t first,
                            std::size_t expected, std::string_view what) const {
    if (tokens.size() - first != expected)
      fail(ErrorCode::ShapeMismatch, std::string(what) + " has " +
                                         std::to_string(tokens.size() - first) +
                                         " values, expected " + std::to_string(expected));
    std::vector<double> out;
    out.reserve(expected);
    for (std::size_t i = first; i < tokens.size(); ++i) out.push_back(real(tokens[i]));
    return out;
  }
};

}  // namespace

std::string write_model(const Mlp& net) {
  std::ostringstream out;
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "input " << net.input_dim() << '\n';
  out << "output " << net.output_dim() << '\n';
  out << "hidden " << net.hidden_layers() << '\n';
  out << "activation " << to_string(net.activation()) << '\n';
  out << "domain_lo";
  for (double v : net.domain().lo) out << ' ' << format_real(v);
  out << "\ndomain_hi";
  for (double v : net.domain().hi) out << ' ' << format_real(v);
  out << '\n';
  for (const Layer& l : net.layers()) {
    out << "layer " << l.weight.rows() << ' ' << l.weight.cols() << '\n';
    for (std::size_t i = 0; i < l.weight.rows(); ++i) {
      for (std::size_t j = 0; j < l.weight.cols(); ++j)
        out << (j ? " " : "") << format_real(l.weight(i, j));
      out << '\n';
    }
    out << "bias";
    for (double v : l.bias) out << ' ' << format_real(v);
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

Mlp read_model(std::istream& in) {
  LineReader rd{in};
  std::vector<std::string> t;
  rd.expect(t, kModelMagic);
  if (t.size() != 2 || rd.count(t[1]) != kModelVersion)
    rd.fail(ErrorCode::Parse, "unsupported model version");
  const std::size_t n = rd.keyed_count(t, "input");
  const std::size_t k = rd.keyed_count(t, "output");
  const std::size_t hidden = rd.keyed_count(t, "hidden");
  rd.expect(t, "activation");
  if (t.size() != 2) rd.fail(ErrorCode::Parse, "activation takes one value");
  ActivationKind act;
  try {
    act = parse_activation(t[1]);
  } catch (const Error& e) {
    rd.fail(ErrorCode::Parse, e.what());
  }
  if (n == 0 || k == 0) rd.fail(ErrorCode::ShapeMismatch, "input and output must be positive");
  rd.expect(t, "domain_lo");
  Vec lo(rd.reals(t, 1, n, "domain_lo"));
  rd.expect(t, "domain_hi");
  Vec hi(rd.reals(t, 1, n, "domain_hi"));
  for (std::size_t i = 0; i < n; ++i)
    if (lo[i] > hi[i]) rd.fail(ErrorCode::Parse, "domain_lo exceeds domain_hi");

  std::vector<Layer> layers;
  std::size_t expected_cols = n;
  for (std::size_t h = 0; h <= hidden; ++h) {
    rd.expect(t, "layer");
    if (t.size() != 3) rd.fail(ErrorCode::Parse, "layer takes rows and cols");
    const std::size_t rows = rd.count(t[1]);
    const std::size_t cols = rd.count(t[2]);
    if (rows == 0) rd.fail(ErrorCode::ShapeMismatch, "layer has zero rows");
    if (cols != expected_cols)
      rd.fail(ErrorCode::ShapeMismatch, "layer " + std::to_string(h + 1) + " has " +
                                            std::to_string(cols) + " columns, expected " +
                                            std::to_string(expected_cols));
    if (h == hidden && rows != k)
      rd.fail(ErrorCode::ShapeMismatch, "output layer has " + std::to_string(rows) +
                                            " rows, expected " + std::to_string(k));
    std::vector<double> w;
    w.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
      if (!rd.next(t)) rd.fail(ErrorCode::Parse, "unexpected end of file inside weights");
      auto row = rd.reals(t, 0, cols, "weight row");
      w.insert(w.end(), row.begin(), row.end());
    }
    rd.expect(t, "bias");
    Vec b(rd.reals(t, 1, rows, "bias"));
    layers.push_back({Mat(rows, cols, std::move(w)), std::move(b)});
    expected_cols = rows;
  }
  rd.expect(t, "end");
  if (rd.next(t)) rd.fail(ErrorCode::Parse, "trailing content after 'end'");
  return Mlp(std::move(layers), act, Box{std::move(lo), std::move(hi)});
}

Mlp read_model_string(const std::string& text) {
  std::istringstream in(text);
  return read_model(in);
}

Mlp load_model(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  try {
    return read_model(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string write_dataset(const std::vector<LabeledSample>& data) {
  std::ostringstream out;
  const std::size_t n = data.empty() ? 0 : data.front().x.size();
  for (std::size_t i = 0; i < n; ++i) out << 'x' << i << ',';
  out << "label\n";
  for (const auto& s : data) {
    for (double v : s.x) out << format_real(v) << ',';
    out << s.y << '\n';
  }
  return out.str();
}

std::vector<LabeledSample> read_dataset(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": " + msg);
  };
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto header = split(line);
    if (header.empty() || header.back() != "label") fail("header must end with 'label'");
    columns = header.size();
    break;
  }
  if (columns == 0) fail("missing header");
  std::vector<LabeledSample> data;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != columns)
      fail("expected " + std::to_string(columns) + " columns, found " + std::to_string(cells.size()));
    std::vector<double> x;
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (cells[i].empty() || *end != '\0' || !std::isfinite(v)) fail("bad feature '" + cells[i] + "'");
      x.push_back(v);
    }
    std::size_t label = 0;
    const auto& lab = cells.back();
    const auto [ptr, ec] = std::from_chars(lab.data(), lab.data() + lab.size(), label);
    if (ec != std::errc{} || ptr != lab.data() + lab.size()) fail("bad label '" + lab + "'");
    data.push_back({Vec(std::move(x)), label});
  }
  return data;
}

std::vector<LabeledSample> read_dataset_string(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in);
}

std::vector<LabeledSample> load_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  try {
    return read_dataset(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void check_dataset(const Mlp& net, const std::vector<LabeledSample>& data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].x.size() != net.input_dim())
      throw Error(ErrorCode::DimensionMismatch,
                  "sample " + std::to_string(i) + " has dimension " +
                      std::to_string(data[i].x.size()) + ", model expects " +
                      std::to_string(net.input_dim()));
    if (data[i].y >= net.output_dim())
      throw Error(ErrorCode::InvalidArgument, "sample " + std::to_string(i) + " label " +
                                                  std::to_string(data[i].y) + " out of range");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << contents;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace wdro::io
