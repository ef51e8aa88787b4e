#include <gtest/gtest.h>

#include "dualmink/harness.hpp"
#include "dualmink/svg.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

namespace dualmink {
namespace {

namespace fs = std::filesystem;

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dualmink_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }
  static std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream log_;
  CommandOptions opt_;
};

std::string run_config(const std::string& f, double q, int dim = 1) {
  std::string res = dim == 1 ? "int[1] 256" : "int[2] 16 32";
  return "[run]\ndim = " + std::to_string(dim) + "\nresolution = " + res + "\nf = \"" + f + "\"\n[solver]\nq = " +
         format_real(q) + "\n";
}

TEST(RunConfigFile, RandomizedRoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    RunConfig c;
    c.dim = 1 + trial % 2;
    c.resolution = c.dim == 1 ? Resolution{16 * (1 + int(u(rng) * 16)), 0} : Resolution{8 + 2 * int(u(rng) * 8), 32};
    c.scheme = c.dim == 2 && u(rng) < 0.5 ? DiffScheme::fd4 : DiffScheme::spectral;
    FSpec f;
    f.dim = c.dim;
    f.constant = 1.0 + 0.1 * (u(rng) - 0.5);
    f.terms.push_back({0.1 * (u(rng) - 0.5), {2, c.dim == 2 ? 1 : 0, u(rng) < 0.5}});
    c.f = trial % 5 == 0 ? "manufacture:ball(" + format_real(0.5 + u(rng)) + ")" : f.str();
    c.solver.q = u(rng) * c.dim + 1e-3;
    c.solver.newton_tol = std::pow(10.0, -8 - 4 * u(rng));
    c.solver.homotopy_steps = 1 + int(u(rng) * 20);
    c.solver.shrink = 0.1 + 0.8 * u(rng);
    c.solver.override_q_range = u(rng) < 0.3;
    c.output = "out/run" + std::to_string(trial);
    c.seed = rng();
    Document doc;
    write_run_config(doc, c);
    const std::string text = doc.str();
    const RunConfig back = read_run_config(Document::parse(text));
    EXPECT_EQ(back, c) << text;
    Document again;
    write_run_config(again, back);
    EXPECT_EQ(again.str(), text);
  }
}

TEST(RunConfigFile, RejectsOddDensity) {
  EXPECT_THROW(read_run_config(Document::parse(run_config("1+0.1*cos(3θ)", 1.0))), ParseError);
}

TEST(SweepSpecFile, RoundTripAndMatrix) {
  SweepSpec s;
  s.q = {0.5, 1.0};
  s.epsilon = {0.01, 0.05};
  s.modes = {"cos(2θ)", "sin(4θ)"};
  s.repetitions = 2;
  Document doc;
  write_sweep_spec(doc, s);
  const SweepSpec back = read_sweep_spec(Document::parse(doc.str()));
  EXPECT_EQ(back, s);
  const auto rows = run_matrix(back);
  EXPECT_EQ(rows.size(), 16u);
  EXPECT_EQ(rows[5].index, 5);
  EXPECT_EQ(rows[5].seed, s.seed + 5);

  SweepSpec empty = s;
  empty.q.clear();
  EXPECT_THROW(run_matrix(empty), std::invalid_argument);
  SweepSpec big = s;
  big.max_runs = 15;
  EXPECT_THROW(run_matrix(big), std::invalid_argument);
  SweepSpec odd = s;
  odd.modes = {"cos(3θ)"};
  Document bad;
  write_sweep_spec(bad, odd);
  EXPECT_THROW(read_sweep_spec(Document::parse(bad.str())), ParseError);
}

TEST_F(HarnessTest, SolveUnitDensity) {
  const fs::path out = dir_ / "r.txt";
  EXPECT_EQ(cmd_solve(write("c.txt", run_config("1", 1.0)), out, opt_, log_), kExitOk);
  const StoredResult r = read_result(Document::load(out.string()));
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.h.values().array() - 1.0).abs().maxCoeff(), 1e-10);
}

TEST_F(HarnessTest, SolveManufacturedEllipseAndVerify) {
  const fs::path out = dir_ / "r.txt";
  ASSERT_EQ(cmd_solve(write("c.txt", run_config("manufacture:ellipse(1.2,1.0)", 1.0)), out, opt_, log_), kExitOk);
  const StoredResult r = read_result(Document::load(out.string()));
  const SupportFunction exact = analytic_support(AnalyticBody::ellipsoid({1.2, 1.0}), r.h.grid_ptr());
  EXPECT_LE((r.h.values() - exact.values()).cwiseAbs().maxCoeff(), 1e-6);

  const fs::path rep = dir_ / "v.txt";
  EXPECT_EQ(cmd_verify(out, rep, opt_, log_), kExitOk);
  const Document v = Document::load(rep.string());
  EXPECT_TRUE(v.at("stability").get_bool("pass"));
  EXPECT_LT(v.at("stability").get_real("delta2"), v.at("stability").get_real("bound"));
  EXPECT_EQ(v.at("checks").get_int("spectral_failures"), 0);
  EXPECT_TRUE(v.at("checks").get_bool("pass"));
}

TEST_F(HarnessTest, SolveRejectsOddDensity) {
  EXPECT_EQ(cmd_solve(write("c.txt", run_config("1+0.1*cos(3θ)", 1.0)), dir_ / "r.txt", opt_, log_), kExitUsage);
  EXPECT_NE(log_.str().find("odd mode"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "r.txt"));
}

TEST_F(HarnessTest, SolveRespectsQRange) {
  const fs::path cfg = write("c.txt", run_config("1", 1.5));
  EXPECT_EQ(cmd_solve(cfg, dir_ / "r.txt", opt_, log_), kExitUsage);
  opt_.override_q_range = true;
  EXPECT_EQ(cmd_solve(cfg, dir_ / "r.txt", opt_, log_), kExitOk);
  EXPECT_NE(log_.str().find("warning"), std::string::npos);
}

TEST_F(HarnessTest, VerifyBallAndRefuseNonConverged) {
  ASSERT_EQ(cmd_solve(write("c.txt", run_config("1", 0.5)), dir_ / "ball.txt", opt_, log_), kExitOk);
  EXPECT_EQ(cmd_verify(dir_ / "ball.txt", dir_ / "ball.v.txt", opt_, log_), kExitOk);
  EXPECT_LT(Document::load((dir_ / "ball.v.txt").string()).at("stability").get_real("delta2"), 1e-14);

  const std::string starved = run_config("manufacture:ellipse(1.5,1.0)", 1.0) +
                              "max_newton_iters = 1\nhomotopy_steps = 1\nmax_bisections = 0\n";
  EXPECT_EQ(cmd_solve(write("s.txt", starved), dir_ / "bad.txt", opt_, log_), kExitFailed);
  ASSERT_TRUE(fs::exists(dir_ / "bad.txt"));
  EXPECT_FALSE(read_result(Document::load((dir_ / "bad.txt").string())).converged);
  EXPECT_EQ(cmd_verify(dir_ / "bad.txt", dir_ / "bad.v.txt", opt_, log_), kExitFailed);
  EXPECT_EQ(cmd_plot(dir_ / "bad.txt", dir_ / "bad.svg", log_), kExitFailed);
  EXPECT_EQ(cmd_verify(dir_ / "missing.txt", dir_ / "x.txt", opt_, log_), kExitUsage);
}

TEST_F(HarnessTest, SolveIsDeterministic) {
  const fs::path cfg = write("c.txt", run_config("1 + 0.05*cos(2θ) - 0.02*sin(4θ)", 0.5));
  ASSERT_EQ(cmd_solve(cfg, dir_ / "a.txt", opt_, log_), kExitOk);
  ASSERT_EQ(cmd_solve(cfg, dir_ / "b.txt", opt_, log_), kExitOk);
  const Document a = Document::load((dir_ / "a.txt").string());
  const Document b = Document::load((dir_ / "b.txt").string());
  EXPECT_EQ(a.without("timing").str(), b.without("timing").str());
  EXPECT_TRUE(a.has("timing"));
}

TEST_F(HarnessTest, SweepExample) {
  const std::string spec =
      "[sweep]\ndim = 1\nresolution = int[1] 128\nq = real[2] 0.5 1.0\nepsilon = real[2] 0.01 0.05\n"
      "modes = \"cos(2θ)\"\n";
  opt_.workers = 3;
  ASSERT_EQ(cmd_sweep(write("s.txt", spec), dir_ / "sweep", opt_, log_), kExitOk) << log_.str();
  std::istringstream csv(read(dir_ / "sweep" / "summary.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, kSweepColumns);
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_NE(line.find(",true,"), std::string::npos) << line;
    EXPECT_EQ(line.substr(line.size() - 4), "true") << line;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_TRUE(fs::exists(dir_ / "sweep" / "run_0003.txt"));

  // Same rows serially give the same files.
  opt_.workers = 1;
  ASSERT_EQ(cmd_sweep(write("s.txt", spec), dir_ / "serial", opt_, log_), kExitOk);
  EXPECT_EQ(read(dir_ / "sweep" / "summary.csv"), read(dir_ / "serial" / "summary.csv"));
  const Document par = Document::load((dir_ / "sweep" / "run_0002.txt").string());
  const Document ser = Document::load((dir_ / "serial" / "run_0002.txt").string());
  for (const char* name : {"solver", "density", "body", "result", "trace", "newton"}) {
    EXPECT_TRUE(par.at(name) == ser.at(name)) << name;
  }
}

TEST_F(HarnessTest, SweepRejectsBadMatrices) {
  EXPECT_EQ(cmd_sweep(write("s.txt", "[sweep]\ndim = 1\nq = real[0]\nepsilon = real[1] 0.1\nmodes = \"cos(2θ)\"\n"),
                      dir_ / "sweep", opt_, log_),
            kExitUsage);
  EXPECT_EQ(cmd_sweep(write("s.txt",
                            "[sweep]\ndim = 1\nq = real[2] 0.5 1\nepsilon = real[2] 0.1 0.2\nmodes = \"cos(2θ)\"\n"
                            "max_runs = 3\n"),
                      dir_ / "sweep2", opt_, log_),
            kExitUsage);
  EXPECT_FALSE(fs::exists(dir_ / "sweep2" / "run_0000.txt"));
}

TEST_F(HarnessTest, PlotCircleAndSphere) {
  ASSERT_EQ(cmd_solve(write("c.txt", run_config("1", 1.0)), dir_ / "ball.txt", opt_, log_), kExitOk);
  ASSERT_EQ(cmd_plot(dir_ / "ball.txt", dir_ / "ball.svg", log_), kExitOk);
  const std::string ball = read(dir_ / "ball.svg");
  EXPECT_NE(ball.find("id=\"unit-circle\""), std::string::npos);
  EXPECT_NE(ball.find("id=\"boundary\""), std::string::npos);
  ASSERT_EQ(cmd_plot(dir_ / "ball.txt", dir_ / "again.svg", log_), kExitOk);
  EXPECT_EQ(read(dir_ / "again.svg"), ball);

  ASSERT_EQ(cmd_solve(write("s.txt", run_config("1 + 0.05*Yc(2,0)", 2.0, 2)), dir_ / "s.txt.r", opt_, log_), kExitOk);
  ASSERT_EQ(cmd_plot(dir_ / "s.txt.r", dir_ / "s.svg", log_), kExitOk);
  const std::string sphere = read(dir_ / "s.svg");
  std::size_t panels = 0;
  for (auto p = sphere.find("class=\"panel\""); p != std::string::npos; p = sphere.find("class=\"panel\"", p + 1)) {
    ++panels;
  }
  EXPECT_EQ(panels, 2u);
}

TEST(Svg, EllipseAxesVisible) {
  // The boundary path reaches 1.2 on the x axis and 1.0 on the y axis.
  auto g = SphereGrid::build(1, {64, 0});
  const std::string svg = boundary_svg(analytic_support(AnalyticBody::ellipsoid({1.2, 1.0}), g));
  const double scale = 0.9 * 250.0 / 1.2;
  char expect_x[32];
  std::snprintf(expect_x, sizeof expect_x, "M%.3f,%.3f", 250.0 + scale * 1.2, 250.0);
  EXPECT_NE(svg.find(expect_x), std::string::npos);
  char expect_y[32];
  std::snprintf(expect_y, sizeof expect_y, "L%.3f,%.3f", 250.0, 250.0 - scale * 1.0);
  EXPECT_NE(svg.find(expect_y), std::string::npos);
}

TEST_F(HarnessTest, Manufacture) {
  const fs::path out = dir_ / "f.txt";
  ASSERT_EQ(cmd_manufacture(write("c.txt", run_config("manufacture:ellipse(1.2,1.0)", 1.0)), out, opt_, log_),
            kExitOk);
  const Document doc = Document::load(out.string());
  const SupportFunction h = read_body(doc);
  EXPECT_EQ(doc.at("density").get_vector("f"),
            manufacture_density(AnalyticBody::ellipsoid({1.2, 1.0}), h.grid_ptr(), 1.0));
  EXPECT_EQ(cmd_manufacture(write("d.txt", run_config("1", 1.0)), out, opt_, log_), kExitUsage);
}

}  // namespace
}  // namespace dualmink
