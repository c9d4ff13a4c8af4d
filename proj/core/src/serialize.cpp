#include "gnnlab/serialize.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "gnnlab/csv.hpp"
#include "gnnlab/errors.hpp"

namespace gnnlab {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- csv -------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

std::size_t CsvTable::require_column(std::string_view name) const {
  if (auto c = column(name)) return *c;
  throw FormatError(fmt::format("missing column '{}'", name));
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const auto& cell = rows.at(row).at(col);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw FormatError(fmt::format("row {}: column '{}' has non-numeric value '{}'", row + 1, header.at(col), cell));
  }
  return v;
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_commas(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw FormatError(fmt::format("line {}: expected {} cells, found {}", lineno, t.header.size(), cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw FormatError("csv: missing header row");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  return read_csv(in);
}

// ---- json helpers ------------------------------------------------------------

json to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw FormatError(fmt::format("matrix: {}x{} needs {} values, found {}", rows, cols, rows * cols, data.size()));
  }
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

namespace {

json header(std::string_view model) {
  return {{"format", "gnnlab-checkpoint"}, {"version", kCheckpointVersion}, {"model", model}};
}

void check_header(const json& j, std::string_view model) {
  if (j.value("format", "") != "gnnlab-checkpoint") throw FormatError("checkpoint: unrecognized format tag");
  if (j.value("version", 0) != kCheckpointVersion) {
    throw FormatError(fmt::format("checkpoint: unsupported version {}", j.value("version", 0)));
  }
  if (j.value("model", "") != model) {
    throw FormatError(fmt::format("checkpoint: holds model '{}', expected '{}'", j.value("model", ""), model));
  }
}

json mlp_body(const MlpParams& p) {
  json M = json::array(), b = json::array();
  for (const auto& m : p.M) M.push_back(to_json(m));
  for (const auto& v : p.b) b.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  return {{"widths", p.widths}, {"f_trunc", p.f_trunc}, {"M", M}, {"b", b}};
}

MlpParams mlp_body_from(const json& j) {
  MlpParams p;
  p.widths = j.at("widths").get<std::vector<std::size_t>>();
  p.f_trunc = j.at("f_trunc").get<double>();
  for (const auto& m : j.at("M")) p.M.push_back(matrix_from_json(m));
  for (const auto& v : j.at("b")) {
    auto vals = v.get<std::vector<double>>();
    p.b.push_back(Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size())));
  }
  p.validate();
  return p;
}

}  // namespace

json checkpoint_json(const GnnParams& p) {
  json j = header("gnn");
  json W = json::array();
  for (const auto& w : p.gcn.W) W.push_back(to_json(w));
  j["gcn"] = {{"depth", p.gcn.depth()}, {"dim", p.gcn.dim()}, {"gamma", p.gcn.gamma}, {"W", W}};
  j["mlp"] = mlp_body(p.mlp);
  return j;
}

json checkpoint_json(const MlpParams& p) {
  json j = header("mlp");
  j["mlp"] = mlp_body(p);
  return j;
}

json checkpoint_json(const MultiscaleParams& p) {
  json j = header("multiscale");
  j["alpha"] = std::vector<double>(p.alpha.data(), p.alpha.data() + p.alpha.size());
  j["W"] = to_json(p.W);
  j["mlp"] = mlp_body(p.head);
  return j;
}

GnnParams gnn_from_checkpoint(const json& j) {
  check_header(j, "gnn");
  GnnParams p;
  const auto& g = j.at("gcn");
  p.gcn.gamma = g.at("gamma").get<std::vector<double>>();
  for (const auto& w : g.at("W")) p.gcn.W.push_back(matrix_from_json(w));
  p.mlp = mlp_body_from(j.at("mlp"));
  p.validate();
  return p;
}

MlpParams mlp_from_checkpoint(const json& j) {
  check_header(j, "mlp");
  return mlp_body_from(j.at("mlp"));
}

MultiscaleParams multiscale_from_checkpoint(const json& j) {
  check_header(j, "multiscale");
  MultiscaleParams p;
  auto a = j.at("alpha").get<std::vector<double>>();
  p.alpha = Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(a.size()));
  p.W = matrix_from_json(j.at("W"));
  p.head = mlp_body_from(j.at("mlp"));
  p.validate();
  return p;
}

json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},         {"step_size", c.step_size},
          {"optimizer", to_string(c.optimizer)},
          {"adam_beta1", c.adam_beta1}, {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},     {"project", c.project},
          {"seed", c.seed},             {"loss_norm", to_string(c.loss_norm)},
          {"train_gamma", c.train_gamma}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "epochs") c.epochs = value.get<std::size_t>();
    else if (key == "step_size") c.step_size = value.get<double>();
    else if (key == "optimizer") c.optimizer = optimizer_from_string(value.get<std::string>());
    else if (key == "adam_beta1") c.adam_beta1 = value.get<double>();
    else if (key == "adam_beta2") c.adam_beta2 = value.get<double>();
    else if (key == "adam_eps") c.adam_eps = value.get<double>();
    else if (key == "project") c.project = value.get<bool>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "loss_norm") c.loss_norm = loss_norm_from_string(value.get<std::string>());
    else if (key == "train_gamma") c.train_gamma = value.get<bool>();
    else throw FormatError(fmt::format("train config: unknown key '{}'", key));
  }
  c.validate();
  return c;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_text_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << contents;
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

// ---- bundles -----------------------------------------------------------------

namespace {

std::string features_csv(const Matrix& x) {
  std::string s;
  for (Eigen::Index c = 0; c < x.cols(); ++c) s += fmt::format("{}x{}", c ? "," : "", c);
  s += '\n';
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) s += fmt::format("{}{}", c ? "," : "", x(i, c));
    s += '\n';
  }
  return s;
}

Matrix read_features(const fs::path& path, std::size_t n) {
  const auto t = read_csv_file(path.string());
  if (t.rows.size() != n) {
    throw FormatError(fmt::format("{}: expected {} rows, found {}", path.string(), n, t.rows.size()));
  }
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < t.header.size(); ++c) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = t.number(i, c);
  return x;
}

}  // namespace

void write_bundle(const Dataset& ds, const fs::path& dir) {
  ds.validate();
  if (ds.op.kind() == OperatorKind::custom) throw InputError("write_bundle: custom operators cannot be bundled");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

  std::ostringstream edges;
  write_edge_list(edges, ds.graph);
  write_text_file(dir / "edges.txt", edges.str());
  write_text_file(dir / "features.csv", features_csv(ds.x));
  write_text_file(dir / "features_fresh.csv", features_csv(ds.x_fresh));

  std::string targets = "node,y,y_clean,observed\n";
  std::string fresh = "node,y_clean\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    targets += fmt::format("{},{},{},{}\n", i, ds.y[k], ds.y_clean[k], ds.mask.observed(i) ? 1 : 0);
    fresh += fmt::format("{},{}\n", i, ds.y_clean_fresh[k]);
  }
  write_text_file(dir / "targets.csv", targets);
  write_text_file(dir / "targets_fresh.csv", fresh);

  json meta = ds.meta;
  meta["n"] = ds.size();
  meta["operator"] = to_string(ds.op.kind());
  meta["self_loops"] = ds.graph.has_self_loops();
  meta["pi"] = ds.mask.pi;
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

Dataset read_bundle(const fs::path& dir) {
  Dataset ds;
  ds.meta = read_json_file(dir / "meta.json");
  const auto n = ds.meta.at("n").get<std::size_t>();
  std::ifstream edges_in(dir / "edges.txt");
  if (!edges_in) throw IoError(fmt::format("cannot open '{}'", (dir / "edges.txt").string()));
  const auto edges = read_edge_list(edges_in);
  ds.graph = build_graph(n, edges, ds.meta.value("self_loops", false));
  ds.op = propagation_operator(ds.graph, operator_kind_from_string(ds.meta.at("operator").get<std::string>()));
  ds.x = read_features(dir / "features.csv", n);
  ds.x_fresh = read_features(dir / "features_fresh.csv", n);

  const auto t = read_csv_file((dir / "targets.csv").string());
  if (t.rows.size() != n) throw FormatError("targets.csv: row count does not match meta n");
  const auto cn = t.require_column("node"), cy = t.require_column("y"), cc = t.require_column("y_clean"),
             co = t.require_column("observed");
  ds.y.resize(static_cast<Eigen::Index>(n));
  ds.y_clean.resize(static_cast<Eigen::Index>(n));
  ds.mask = {std::vector<std::uint8_t>(n, 0), ds.meta.value("pi", 1.0)};
  for (std::size_t r = 0; r < n; ++r) {
    const auto node = static_cast<std::size_t>(t.number(r, cn));
    if (node >= n) throw FormatError(fmt::format("targets.csv row {}: node id {} out of range", r + 1, node));
    ds.y[static_cast<Eigen::Index>(node)] = t.number(r, cy);
    ds.y_clean[static_cast<Eigen::Index>(node)] = t.number(r, cc);
    ds.mask.omega[node] = t.number(r, co) != 0.0 ? 1 : 0;
  }
  const auto f = read_csv_file((dir / "targets_fresh.csv").string());
  if (f.rows.size() != n) throw FormatError("targets_fresh.csv: row count does not match meta n");
  ds.y_clean_fresh.resize(static_cast<Eigen::Index>(n));
  const auto fn = f.require_column("node"), fc = f.require_column("y_clean");
  for (std::size_t r = 0; r < n; ++r) {
    const auto node = static_cast<std::size_t>(f.number(r, fn));
    if (node >= n) throw FormatError(fmt::format("targets_fresh.csv row {}: node id {} out of range", r + 1, node));
    ds.y_clean_fresh[static_cast<Eigen::Index>(node)] = f.number(r, fc);
  }
  ds.validate();
  return ds;
}

}  // namespace gnnlab
