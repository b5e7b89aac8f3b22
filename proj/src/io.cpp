#include "gsr/io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace gsr {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- CSV -------------------------------------------------------------------

struct CsvWriter::Impl {
  std::ofstream out;
  size_t width = 0;
};

static std::string csv_escape(const std::string& field) {
  const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return field;
  std::string quoted = "\"";
  for (char ch : field) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : impl_(std::make_unique<Impl>()) {
  if (header.empty()) throw std::invalid_argument("CSV header must be nonempty");
  impl_->out.open(path, std::ios::binary);  // binary: no platform newline translation
  if (!impl_->out) throw std::runtime_error("cannot open for writing: " + path.string());
  impl_->width = header.size();
  write_row(header);
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
  if (fields.size() != impl_->width)
    throw std::invalid_argument("CSV row width does not match the header");
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << csv_escape(fields[i]);
  }
  impl_->out << "\r\n";
  if (!impl_->out) throw std::runtime_error("CSV write failed");
}

CsvWriter::~CsvWriter() = default;

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  char ch;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(row);
    row.clear();
    any = false;
  };
  while (in.get(ch)) {
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      any = true;
      continue;
    }
    switch (ch) {
      case '"': quoted = true; any = true; break;
      case ',': end_field(); any = true; break;
      case '\r': break;
      case '\n':
        if (any || !field.empty() || !row.empty()) end_row();
        break;
      default: field += ch; any = true;
    }
  }
  if (any || !field.empty() || !row.empty()) end_row();
  return rows;
}

// ---- graph -----------------------------------------------------------------

void save_graph(const Graph& g, const std::filesystem::path& edges_path,
                const std::filesystem::path& coords_path) {
  std::ofstream edges(edges_path, std::ios::binary);
  if (!edges) throw std::runtime_error("cannot open for writing: " + edges_path.string());
  edges << "# nodes " << g.size() << " trace_normalized " << (g.trace_normalized ? 1 : 0) << "\n";
  for (int i = 0; i < g.size(); ++i)
    for (int j = i + 1; j < g.size(); ++j)
      if (g.adjacency(i, j) != 0.0)
        edges << i << ' ' << j << ' ' << format_double(g.adjacency(i, j)) << "\n";

  std::ofstream coords(coords_path, std::ios::binary);
  if (!coords) throw std::runtime_error("cannot open for writing: " + coords_path.string());
  for (int i = 0; i < g.size(); ++i) {
    const Eigen::Vector2d c = g.coords.empty() ? Eigen::Vector2d::Zero() : g.coords[i];
    coords << i << ' ' << format_double(c.x()) << ' ' << format_double(c.y()) << "\n";
  }
}

Graph load_graph(const std::filesystem::path& edges_path,
                 const std::filesystem::path& coords_path) {
  std::ifstream edges(edges_path);
  if (!edges) throw std::runtime_error("cannot open for reading: " + edges_path.string());
  std::string line;
  if (!std::getline(edges, line)) throw std::runtime_error("edge file is empty");
  int n = 0, norm_flag = 0;
  {
    std::istringstream head(line);
    std::string hash, nodes_kw, norm_kw;
    if (!(head >> hash >> nodes_kw >> n >> norm_kw >> norm_flag) || hash != "#" ||
        nodes_kw != "nodes" || norm_kw != "trace_normalized")
      throw std::runtime_error("edge file header is malformed");
  }
  if (n < 2) throw std::runtime_error("edge file declares fewer than two nodes");

  Mat w = Mat::Zero(n, n);
  while (std::getline(edges, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int i, j;
    double weight;
    if (!(ls >> i >> j >> weight)) throw std::runtime_error("malformed edge line: " + line);
    if (i < 0 || i >= n || j < 0 || j >= n || i == j)
      throw std::runtime_error("edge endpoint out of range: " + line);
    w(i, j) = weight;
    w(j, i) = weight;
  }

  std::ifstream coords(coords_path);
  if (!coords) throw std::runtime_error("cannot open for reading: " + coords_path.string());
  std::vector<Eigen::Vector2d> points(n, Eigen::Vector2d::Zero());
  std::vector<char> seen(n, 0);
  while (std::getline(coords, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int i;
    double x, y;
    if (!(ls >> i >> x >> y)) throw std::runtime_error("malformed coordinate line: " + line);
    if (i < 0 || i >= n) throw std::runtime_error("coordinate index out of range: " + line);
    points[i] = {x, y};
    seen[i] = 1;
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) throw std::runtime_error("coordinate file misses node " + std::to_string(i));

  return graph_from_adjacency(std::move(points), std::move(w), norm_flag != 0);
}

// ---- signals ----------------------------------------------------------------

void save_signals(const std::vector<Vec>& signals, const std::filesystem::path& path) {
  if (signals.empty()) throw std::invalid_argument("refusing to save an empty signal set");
  const auto n = signals.front().size();
  std::vector<std::string> header;
  header.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) header.push_back("node_" + std::to_string(i));
  CsvWriter csv(path, header);
  std::vector<std::string> row(n);
  for (const Vec& s : signals) {
    if (s.size() != n) throw std::invalid_argument("signals must share a length");
    for (Eigen::Index i = 0; i < n; ++i) row[i] = format_double(s[i]);
    csv.write_row(row);
  }
}

std::vector<Vec> load_signals(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw std::runtime_error("signal file has no header: " + path.string());
  const size_t n = rows.front().size();
  std::vector<Vec> signals;
  signals.reserve(rows.size() - 1);
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != n) throw std::runtime_error("signal row width mismatch");
    Vec s(n);
    for (size_t i = 0; i < n; ++i) s[i] = std::stod(rows[r][i]);
    signals.push_back(std::move(s));
  }
  return signals;
}

// ---- prior ------------------------------------------------------------------

void save_prior(const PriorParams& theta, const std::filesystem::path& path) {
  theta.validate();
  json j;
  j["num_filters"] = theta.num_filters();
  j["order"] = theta.order();
  j["num_components"] = theta.num_components();
  auto matrix_rows = [](const Mat& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["coeffs"] = matrix_rows(theta.coeffs);
  j["weight_logits"] = matrix_rows(theta.weight_logits);
  j["component_vars"] = matrix_rows(theta.component_vars);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

PriorParams load_prior(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  json j;
  in >> j;
  auto matrix_from = [](const json& rows, const char* what) {
    if (!rows.is_array() || rows.empty())
      throw std::runtime_error(std::string("prior file: ") + what + " must be a nonempty array");
    const size_t cols = rows.front().size();
    Mat m(rows.size(), cols);
    for (size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != cols)
        throw std::runtime_error(std::string("prior file: ragged rows in ") + what);
      for (size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c].get<double>();
    }
    return m;
  };
  PriorParams theta;
  theta.coeffs = matrix_from(j.at("coeffs"), "coeffs");
  theta.weight_logits = matrix_from(j.at("weight_logits"), "weight_logits");
  theta.component_vars = matrix_from(j.at("component_vars"), "component_vars");
  if (j.at("num_filters").get<int>() != theta.num_filters() ||
      j.at("order").get<int>() != theta.order() ||
      j.at("num_components").get<int>() != theta.num_components())
    throw std::runtime_error("prior file: declared shape disagrees with the arrays");
  theta.validate();
  return theta;
}

// ---- mask -------------------------------------------------------------------

void save_mask(const SamplingMask& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "total " << mask.total << "\n";
  for (int v : mask.selected) out << v << "\n";
}

SamplingMask load_mask(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::string kw;
  SamplingMask mask;
  if (!(in >> kw >> mask.total) || kw != "total")
    throw std::runtime_error("mask file header is malformed");
  int v;
  while (in >> v) mask.selected.push_back(v);
  if (mask.observed() < 1 || mask.observed() > mask.total)
    throw std::runtime_error("mask file holds an invalid index set");
  return mask;
}

}  // namespace gsr
