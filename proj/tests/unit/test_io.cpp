#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gnnlab/csv.hpp"
#include "gnnlab/datagen.hpp"
#include "gnnlab/errors.hpp"
#include "gnnlab/ingest.hpp"
#include "gnnlab/serialize.hpp"
#include "oracles.hpp"

using namespace gnnlab;
using namespace gnnlab::testing;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("gnnlab_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

const std::string kSample = std::string(GNNLAB_REPO_DATA_DIR) + "/california_sample.csv";

void expect_same_dataset(const Dataset& a, const Dataset& b) {
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.op, b.op);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.x_fresh, b.x_fresh);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.y_clean, b.y_clean);
  EXPECT_EQ(a.y_clean_fresh, b.y_clean_fresh);
  EXPECT_EQ(a.mask.omega, b.mask.omega);
  EXPECT_EQ(a.mask.pi, b.mask.pi);
}

}  // namespace

TEST(Csv, ParsesAndReportsErrors) {
  std::istringstream ok("a, b\n1,2\n 3 ,x\n");
  const auto t = read_csv(ok);
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.number(1, 0), 3.0);
  EXPECT_EQ(*t.column("b"), 1u);
  EXPECT_FALSE(t.column("c"));
  try {
    t.number(1, 1);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
  try {
    t.require_column("Latitude");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("Latitude"), std::string::npos);
  }
  std::istringstream ragged("a,b\n1\n");
  EXPECT_THROW(read_csv(ragged), FormatError);
  std::istringstream empty("");
  EXPECT_THROW(read_csv(empty), FormatError);
  EXPECT_THROW(read_csv_file("/nonexistent/file.csv"), IoError);
}

TEST(Checkpoint, RoundTripsEveryModel) {
  Rng rng(3);
  const auto g = init_gnn({3, 2, {{5, 4}, 7.5}}, rng);
  const auto g2 = gnn_from_checkpoint(nlohmann::json::parse(checkpoint_json(g).dump()));
  EXPECT_EQ(g2.gcn.W, g.gcn.W);
  EXPECT_EQ(g2.gcn.gamma, g.gcn.gamma);
  EXPECT_EQ(g2.mlp.M, g.mlp.M);
  EXPECT_EQ(g2.mlp.b, g.mlp.b);
  EXPECT_EQ(g2.mlp.widths, g.mlp.widths);
  EXPECT_EQ(g2.mlp.f_trunc, 7.5);

  const auto m = init_mlp(2, {{3}, 2.0}, rng);
  const auto m2 = mlp_from_checkpoint(nlohmann::json::parse(checkpoint_json(m).dump()));
  EXPECT_EQ(m2.M, m.M);
  EXPECT_EQ(m2.b, m.b);

  auto ms = init_multiscale(2, 3, {{4}, 3.0}, rng);
  ms.alpha << 0.1, -2.0, 1.0 / 3.0;
  const auto ms2 = multiscale_from_checkpoint(nlohmann::json::parse(checkpoint_json(ms).dump()));
  EXPECT_EQ(ms2.alpha, ms.alpha);
  EXPECT_EQ(ms2.W, ms.W);

  EXPECT_THROW(mlp_from_checkpoint(checkpoint_json(g)), FormatError);
  auto bad = checkpoint_json(g);
  bad["version"] = 99;
  EXPECT_THROW(gnn_from_checkpoint(bad), FormatError);
  bad = checkpoint_json(g);
  bad["format"] = "other";
  EXPECT_THROW(gnn_from_checkpoint(bad), FormatError);
}

TEST(TrainConfigJson, RoundTripAndUnknownKeys) {
  TrainConfig cfg;
  cfg.epochs = 17;
  cfg.optimizer = Optimizer::sgd;
  cfg.loss_norm = LossNorm::over_omega;
  cfg.train_gamma = false;
  cfg.seed = 1234567890123ULL;
  const auto back = train_config_from_json(to_json(cfg));
  EXPECT_EQ(back.epochs, 17u);
  EXPECT_EQ(back.optimizer, Optimizer::sgd);
  EXPECT_EQ(back.loss_norm, LossNorm::over_omega);
  EXPECT_FALSE(back.train_gamma);
  EXPECT_EQ(back.seed, cfg.seed);
  EXPECT_EQ(train_config_from_json(nlohmann::json::object()).epochs, TrainConfig{}.epochs);
  EXPECT_THROW(train_config_from_json({{"learning_rate", 0.1}}), FormatError);
}

TEST(Bundle, SyntheticRoundTrip) {
  TempDir tmp;
  SyntheticSpec spec;
  spec.topology = {TopologyKind::erdos_renyi, 80, 4.0};
  spec.target = TargetKind::random_dnn;
  spec.op_kind = OperatorKind::sym_norm;
  spec.dim = 2;
  spec.pi = 0.5;
  spec.seed = 5;
  const auto ds = make_synthetic(spec);
  write_bundle(ds, tmp.path() / "b");
  for (const char* f : {"edges.txt", "features.csv", "features_fresh.csv", "targets.csv", "targets_fresh.csv",
                        "meta.json"})
    EXPECT_TRUE(fs::exists(tmp.path() / "b" / f)) << f;
  const auto back = read_bundle(tmp.path() / "b");
  expect_same_dataset(ds, back);
  EXPECT_EQ(back.meta, ds.meta);
  EXPECT_THROW(read_bundle(tmp.path() / "missing"), IoError);
}

TEST(Bundle, RejectsCorruptTargets) {
  TempDir tmp;
  SyntheticSpec spec;
  spec.topology = {TopologyKind::ring, 10, 2.0};
  write_bundle(make_synthetic(spec), tmp.path());
  tmp.write("targets.csv", "node,y,y_clean,observed\n0,1,1,1\n");
  EXPECT_THROW(read_bundle(tmp.path()), FormatError);
}

TEST(California, SampleBuildsSymmetricKnnGraph) {
  const auto ds = ingest_california(kSample, 8);
  ASSERT_EQ(ds.size(), 500u);
  EXPECT_NO_THROW(ds.validate());
  EXPECT_TRUE(ds.transductive());
  EXPECT_EQ(ds.x, ds.x_fresh);
  EXPECT_EQ(ds.mask.count(), 500u);
  EXPECT_EQ(ds.dim(), 8u);
  const auto base = ds.graph.without_self_loops();
  for (NodeId i = 0; i < 500; ++i) {
    EXPECT_GE(base.degree(i), 8u);
    for (auto j : base.neighbors(i)) EXPECT_TRUE(base.has_edge(j, i));
  }
  for (Eigen::Index c = 0; c < ds.x.cols(); ++c) EXPECT_NEAR(ds.x.col(c).mean(), 0.0, 1e-12);
  EXPECT_GT(ds.y.minCoeff(), 0.0);
}

TEST(California, SingleNeighbourMatchesBruteForce) {
  const auto ds = ingest_california(kSample, 1);
  const auto table = read_csv_file(kSample);
  const auto lat = table.require_column("Latitude"), lon = table.require_column("Longitude");
  const std::size_t n = table.rows.size();
  Matrix pts(static_cast<Eigen::Index>(n), 2);
  for (std::size_t r = 0; r < n; ++r) {
    pts(static_cast<Eigen::Index>(r), 0) = table.number(r, lat);
    pts(static_cast<Eigen::Index>(r), 1) = table.number(r, lon);
  }
  // brute-force nearest neighbour, ties to the smaller index
  std::vector<Edge> expected;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = i == 0 ? 1 : 0;
    double bd = (pts.row(static_cast<Eigen::Index>(i)) - pts.row(static_cast<Eigen::Index>(best))).squaredNorm();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (pts.row(static_cast<Eigen::Index>(i)) - pts.row(static_cast<Eigen::Index>(j))).squaredNorm();
      if (d < bd) bd = d, best = j;
    }
    expected.push_back({static_cast<NodeId>(i), static_cast<NodeId>(best)});
  }
  const auto oracle = build_graph(n, expected, false);
  const auto base = ds.graph.without_self_loops();
  EXPECT_EQ(base, oracle);
  // a union of nearest-neighbour pairs has at most n edges and no isolated node
  EXPECT_LE(base.num_edges(), n);
  for (NodeId i = 0; i < n; ++i) EXPECT_GE(base.degree(i), 1u);
}

TEST(California, FormatErrors) {
  TempDir tmp;
  const auto missing = tmp.write("m.csv", "MedInc,HouseAge\n1,2\n3,4\n");
  try {
    ingest_california(missing.string(), 1);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("AveRooms"), std::string::npos);
  }
  std::string text = "MedInc,HouseAge,AveRooms,AveBedrms,Population,AveOccup,Latitude,Longitude,MedHouseVal\n";
  text += "1,2,3,4,5,6,34.1,-118.2,2.5\n";
  text += "1,2,3,4,5,6,oops,-118.2,2.5\n";
  const auto bad = tmp.write("b.csv", text);
  try {
    ingest_california(bad.string(), 1);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(California, BundleRoundTrip) {
  TempDir tmp;
  const auto ds = ingest_california(kSample, 6);
  write_bundle(ds, tmp.path());
  const auto back = read_bundle(tmp.path());
  expect_same_dataset(ds, back);
  EXPECT_TRUE(back.transductive());
}

TEST(Chameleon, SmallFixture) {
  TempDir tmp;
  const auto edges = tmp.write("edges.csv", "id1,id2\n0,1\n1,0\n1,2\n2,3\n3,0\n");
  const auto feats = tmp.write("features.json", R"({"0": [0, 3], "1": [3], "2": [], "3": [1, 3, 0]})");
  const auto target = tmp.write("target.csv", "id,target\n2,10\n0,0\n1,100\n3,1000\n");
  const auto ds = ingest_chameleon(edges.string(), feats.string(), target.string());
  ASSERT_EQ(ds.size(), 4u);
  EXPECT_EQ(ds.graph.without_self_loops().num_edges(), 4u);
  EXPECT_EQ(ds.dim(), 4u);
  EXPECT_EQ(ds.x.row(2), Matrix::Zero(1, 4));
  EXPECT_EQ(ds.x(0, 0), 1.0);
  EXPECT_EQ(ds.x(0, 3), 1.0);
  EXPECT_EQ(ds.x(0, 1), 0.0);
  EXPECT_EQ(ds.x(3, 1), 1.0);

  // log(1 + traffic), then standardized with the sample std
  Vector raw(4);
  raw << std::log(1.0), std::log(101.0), std::log(11.0), std::log(1001.0);
  const Vector expected = (raw.array() - raw.mean()) / std::sqrt((raw.array() - raw.mean()).square().sum() / 3.0);
  EXPECT_LT((ds.y - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(ds.transductive());

  const auto top = ingest_chameleon(edges.string(), feats.string(), target.string(), 1);
  ASSERT_EQ(top.dim(), 1u);
  EXPECT_EQ(top.x.col(0).sum(), 3.0);  // noun 3 is the most frequent
}

TEST(Chameleon, DanglingIds) {
  TempDir tmp;
  const auto feats = tmp.write("features.json", R"({"0": [0], "1": [0]})");
  const auto target = tmp.write("target.csv", "id,target\n0,5\n1,6\n");
  const auto edges = tmp.write("edges.csv", "id1,id2\n0,1\n1,7\n");
  try {
    ingest_chameleon(edges.string(), feats.string(), target.string());
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("dangling"), std::string::npos);
  }
  const auto good_edges = tmp.write("e2.csv", "id1,id2\n0,1\n");
  const auto bad_feats = tmp.write("f2.json", R"({"0": [0], "4": [1]})");
  EXPECT_THROW(ingest_chameleon(good_edges.string(), bad_feats.string(), target.string()), FormatError);
  const auto bad_target = tmp.write("t2.csv", "id,target\n0,5\n0,6\n");
  EXPECT_THROW(ingest_chameleon(good_edges.string(), feats.string(), bad_target.string()), FormatError);
}
