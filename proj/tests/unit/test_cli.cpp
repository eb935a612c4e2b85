#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "reference.hpp"
#include "sparsecert_cli/cli.hpp"

using namespace sparsecert;
using nlohmann::json;

namespace {

std::string temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("sparsecert_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

std::string write_matrix(const std::string& name, const Matrix& m) {
  std::ostringstream s;
  s.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) s << (j ? "," : "") << m(i, j);
    s << '\n';
  }
  return temp_file(name, s.str());
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "sparsecert");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Ingest, CommaAndWhitespace) {
  std::istringstream a("1,0,0\n0,1,0\n0,0,1\n");
  EXPECT_EQ(cli::parse_matrix(a), Matrix(Matrix::Identity(3, 3)));
  std::istringstream b("# comment\n1 2\t3\n\n4 5 6\n");
  const Matrix m = cli::parse_matrix(b);
  EXPECT_EQ(m.rows(), 2);
  EXPECT_EQ(m(1, 2), 6.0);
  std::istringstream c("1e-3, -2.5E+1\n+3,4\n");
  const Matrix e = cli::parse_matrix(c);
  EXPECT_EQ(e(0, 0), 1e-3);
  EXPECT_EQ(e(0, 1), -25.0);
}

TEST(Ingest, RaggedRowReportsLine) {
  std::istringstream a("1,2,3\n4,5,6\n7,8\n");
  try {
    cli::parse_matrix(a);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream b("1 2\n3 x\n");
  try {
    cli::parse_matrix(b);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 3u);
  }
}

TEST(Ingest, CenteringRemovesMeans) {
  Matrix m = reference::gaussian(5, 3, 1).array() + 4.0;
  cli::center_columns(m);
  EXPECT_LE(m.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Run, PathOnIdentity) {
  const std::string f = write_matrix("i3.csv", Matrix::Identity(3, 3));
  const Outcome o = invoke({"path", f, "--method", "greedy-approx"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json r = json::parse(o.out);
  EXPECT_EQ(r["command"], "path");
  const auto& pts = r["results"]["paths"][0]["points"];
  ASSERT_EQ(pts.size(), 3u);
  for (const auto& p : pts) EXPECT_NEAR(p["variance"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(pts[1]["indices"], json({1, 2}));
}

TEST(Run, CertifyIdentityPattern) {
  const std::string f = write_matrix("i3b.csv", Matrix::Identity(3, 3));
  const Outcome o = invoke({"certify", f, "--pattern", "1"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json c = json::parse(o.out)["results"]["certificate"];
  EXPECT_EQ(c["status"], "Optimal");
  EXPECT_LE(c["gap"].get<double>(), 1e-10);
}

TEST(Run, RipOnOrthonormalColumns) {
  Eigen::HouseholderQR<Matrix> qr(reference::gaussian(20, 12, 3));
  const std::string f = write_matrix("orth.csv", Matrix(qr.householderQ()).leftCols(12));
  const Outcome o = invoke({"rip", f, "--S", "2"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json r = json::parse(o.out)["results"];
  EXPECT_LE(r["delta_upper"].get<double>(), 1e-4);
  EXPECT_TRUE(r["ct_holds"].get<bool>());
}

TEST(Run, BoundCsvCurve) {
  const std::string f = write_matrix("spiked.csv", reference::spiked_psd(10, 3));
  const Outcome o = invoke({"bound", f, "--format", "csv", "--jobs", "2"});
  ASSERT_EQ(o.code, 0) << o.err;
  std::istringstream in(o.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "k,variance,upper_bound,gap,certified");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string k, var, ub;
    std::getline(fields, k, ',');
    std::getline(fields, var, ',');
    std::getline(fields, ub, ',');
    EXPECT_GE(std::stod(ub), std::stod(var));
    ++rows;
  }
  EXPECT_EQ(rows, 10);
}

TEST(Run, DataModeAndSubset) {
  const Matrix a = reference::gaussian(30, 6, 2);
  const std::string f = write_matrix("data.csv", a);
  const Outcome o = invoke({"path", f, "--mode", "data", "--method", "sort"});
  ASSERT_EQ(o.code, 0) << o.err;
  Matrix xy(40, 5);
  xy.leftCols(4) = reference::gaussian(40, 4, 5);
  xy.col(4) = 2.0 * xy.col(1) - xy.col(3);
  const std::string g = write_matrix("xy.csv", xy);
  const Outcome s = invoke({"subset", g, "--k", "2", "--method", "backward"});
  ASSERT_EQ(s.code, 0) << s.err;
  const json sel = json::parse(s.out)["results"]["selections"][0];
  EXPECT_EQ(sel["pattern"], json({2, 4}));
  EXPECT_EQ(sel["status"], "Optimal");
}

TEST(Run, OracleKinds) {
  const std::string f = write_matrix("i4.csv", Matrix::Identity(4, 4));
  const Outcome o = invoke({"oracle", f, "--kind", "phi", "--rho", "0.4"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NEAR(json::parse(o.out)["results"]["results"]["value"].get<double>(), 0.6, 1e-12);
  const Outcome big = invoke({"oracle", f, "--budget", "3"});
  EXPECT_EQ(big.code, 3);
}

TEST(Run, InputErrorsExitWithTwo) {
  const std::string ragged = temp_file("ragged.csv", "1,2\n3\n");
  const Outcome a = invoke({"path", ragged});
  EXPECT_EQ(a.code, 2);
  EXPECT_NE(a.err.find("line 2"), std::string::npos);
  const std::string rect = write_matrix("rect.csv", Matrix::Ones(2, 3));
  EXPECT_EQ(invoke({"path", rect}).code, 2);
  Matrix indef = Matrix::Identity(2, 2);
  indef(1, 1) = -1;
  EXPECT_EQ(invoke({"path", write_matrix("indef.csv", indef)}).code, 2);
  EXPECT_EQ(invoke({"certify", rect, "--mode", "bogus"}).code, 2);
  EXPECT_EQ(invoke({"path", "/nonexistent/file.csv"}).code, 2);
}

TEST(Run, SynthIsDeterministic) {
  const Outcome a = invoke({"synth", "--n", "9", "--seed", "4"});
  const Outcome b = invoke({"synth", "--n", "9", "--seed", "4"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  EXPECT_EQ(cli::parse_matrix(in).rows(), 9);
}
