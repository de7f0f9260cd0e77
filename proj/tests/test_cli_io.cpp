#include "cli_app.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

using namespace fastmaxwell;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "fastmaxwell");
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("fastmaxwell_test_" + name)).string();
}

}  // namespace

TEST(Io, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 5.7409206045089039e-3, -1e-300, 123456789.123456789}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Io, CsvWriterChecksWidth) {
  std::ostringstream os;
  CsvWriter w(os, {"a", "b"});
  w.row({1.5, static_cast<long long>(2)});
  EXPECT_EQ(os.str(), "a,b\n1.5,2\n");
  EXPECT_THROW(w.row({1.0}), SizeError);
}

TEST(Io, DumpRoundTrip) {
  const std::string path = temp_path("dump.bin");
  const Matrix m = Matrix::Random(3, 5);
  write_dump(path, 7, m);
  EXPECT_EQ(std::filesystem::file_size(path), 16u + 8u * 15u);
  const MatrixDump d = read_dump(path);
  EXPECT_EQ(d.n, 7u);
  EXPECT_EQ(d.data.rows(), 3);
  EXPECT_EQ(max_abs(d.data - m), 0.0);
  // row-major payload
  std::FILE* f = std::fopen(path.c_str(), "rb");
  ASSERT_NE(f, nullptr);
  std::uint32_t header[4];
  double second = 0;
  ASSERT_EQ(std::fread(header, 4, 4, f), 4u);
  ASSERT_EQ(std::fseek(f, 16 + 8, SEEK_SET), 0);
  ASSERT_EQ(std::fread(&second, 8, 1, f), 1u);
  std::fclose(f);
  EXPECT_EQ(header[0], dump_magic);
  EXPECT_EQ(header[2], 3u);
  EXPECT_EQ(header[3], 5u);
  EXPECT_EQ(second, m(0, 1));
  std::filesystem::resize_file(path, 40);
  EXPECT_THROW(read_dump(path), Error);
  std::filesystem::remove(path);
}

TEST(Io, DumpRejectsForeignFile) {
  const std::string path = temp_path("foreign.bin");
  {
    std::ofstream o(path, std::ios::binary);
    o << "not a dump at all, really";
  }
  EXPECT_THROW(read_dump(path), Error);
  std::filesystem::remove(path);
  EXPECT_THROW(read_dump(temp_path("missing.bin")), Error);
}

TEST(Cli, SolveExampleReportsErrors) {
  const CliRun r = run({"solve", "--example", "example3", "--n", "32"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], "source");
  EXPECT_EQ(rows[1][0], "example3");
  EXPECT_EQ(rows[1][3], "natural");
  EXPECT_NEAR(std::stod(rows[1][6]), 0.020045511909567115, 1e-12);
}

TEST(Cli, SolveRandomAllVariants) {
  for (const char* bc : {"essential", "natural"}) {
    for (const char* v : {"divergence", "gauss"}) {
      const CliRun r = run({"solve", "--source", "random", "--nx", "12", "--ny", "9", "--bc", bc, "--variant", v});
      ASSERT_EQ(r.code, 0) << r.err;
      EXPECT_LT(std::stod(parse_csv(r.out)[1][8]), 1e-10) << bc << " " << v;
    }
  }
  const CliRun g = run({"solve", "--source", "random", "--n", "10", "--variant", "general", "--alpha", "0"});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_LT(std::stod(parse_csv(g.out)[1][8]), 1e-10);
}

TEST(Cli, SolveDumpsMatrices) {
  const std::string prefix = temp_path("solve");
  const CliRun r = run({"solve", "--example", "example5", "--n", "8", "--dump", prefix});
  ASSERT_EQ(r.code, 0) << r.err;
  const MatrixDump u = read_dump(prefix + "_U.bin");
  const MatrixDump p = read_dump(prefix + "_P.bin");
  EXPECT_EQ(u.n, 8u);
  EXPECT_EQ(u.data.rows(), 8);
  EXPECT_EQ(u.data.cols(), 7);
  EXPECT_EQ(p.data.rows(), 7);
  for (const char* s : {"_U.bin", "_V.bin", "_P.bin"}) std::filesystem::remove(prefix + s);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"solve", "--n", "8"}).code, 2);
  EXPECT_EQ(run({"solve", "--example", "nope", "--n", "8"}).code, 2);
  EXPECT_EQ(run({"solve", "--example", "example1", "--n", "8", "--bc", "natural"}).code, 2);
  EXPECT_EQ(run({"solve", "--example", "example2", "--nx", "8", "--ny", "8"}).code, 2);
  EXPECT_EQ(run({"solve", "--source", "random", "--n", "1"}).code, 2);
  EXPECT_EQ(run({"solve", "--source", "random", "--n", "8", "--bc", "natural", "--variant", "general"}).code, 2);
  EXPECT_EQ(run({"verify", "--sizes", "17"}).code, 2);
  EXPECT_EQ(run({"verify", "--fault", "other"}).code, 2);
  EXPECT_EQ(run({"bench", "--reps", "0", "--sizes", "8"}).code, 2);
  EXPECT_EQ(run({"pcg", "--n", "8", "--method", "gmres"}).code, 2);
}

TEST(Cli, HelpExitsCleanly) {
  const CliRun r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("convergence"), std::string::npos);
}

TEST(Cli, EigsListsEveryMode) {
  const CliRun r = run({"eigs", "--n", "4", "--bc", "natural"});
  ASSERT_EQ(r.code, 0);
  const auto rows = parse_csv(r.out);
  EXPECT_EQ(rows.size(), 1u + 2 * 4 * 5);
  EXPECT_EQ(rows[0][2], "lambda");
}

TEST(Cli, EigsSmallestRatios) {
  const CliRun r = run({"eigs", "--smallest", "--sizes", "16,32,64,128"});
  ASSERT_EQ(r.code, 0);
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[1][3], "");
  for (int k = 2; k <= 4; ++k) EXPECT_NEAR(std::stod(rows[k][3]), 4.0, 0.05);
}

TEST(Cli, ConvergenceTableAndDeterminism) {
  const CliRun a = run({"convergence", "--example", "example1", "--sizes", "16,32"});
  const CliRun b = run({"convergence", "--example", "example1", "--sizes", "16,32"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto ra = parse_csv(a.out), rb = parse_csv(b.out);
  ASSERT_EQ(ra.size(), 3u);
  EXPECT_EQ(ra[0], (std::vector<std::string>{"n", "l2_error", "l2_order", "rot_error", "rot_order",
                                             "time_seconds"}));
  EXPECT_EQ(ra[1][2], "");
  EXPECT_NEAR(std::stod(ra[2][2]), 1.0, 0.05);
  for (std::size_t i = 1; i < ra.size(); ++i) {
    for (std::size_t c = 0; c + 1 < ra[i].size(); ++c) EXPECT_EQ(ra[i][c], rb[i][c]);
  }
  const CliRun single = run({"convergence", "--example", "example3", "--sizes", "8"});
  EXPECT_EQ(parse_csv(single.out)[1][2], "");
}

TEST(Cli, PcgAndCg) {
  const CliRun p = run({"pcg", "--n", "16"});
  ASSERT_EQ(p.code, 0) << p.err;
  const auto rp = parse_csv(p.out);
  EXPECT_EQ(rp[1][1], "pcg");
  EXPECT_EQ(rp[1][3], "1");
  const CliRun c = run({"pcg", "--n", "16", "--method", "cg"});
  ASSERT_EQ(c.code, 0);
  EXPECT_GT(std::stoi(parse_csv(c.out)[1][2]), std::stoi(rp[1][2]));
  EXPECT_EQ(run({"pcg", "--n", "16", "--max-iter", "3"}).code, 1);
}

TEST(Cli, BenchReportsRows) {
  const CliRun r = run({"bench", "--sizes", "16,32", "--reps", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_GT(std::stod(rows[2][1]), 0.0);
  EXPECT_NE(r.err.find("slope"), std::string::npos);
}

TEST(Cli, VerifyPassesAndCatchesFault) {
  const CliRun ok = run({"verify", "--sizes", "2,3,5", "--rhs", "3"});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_EQ(ok.out.find("FAIL"), std::string::npos);
  EXPECT_NE(ok.out.find("curl-free count natural n=5,PASS"), std::string::npos);
  const CliRun bad = run({"verify", "--sizes", "4", "--fault", "tau-sign"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("S^-1 B C = Gamma n=4,FAIL"), std::string::npos);
}

TEST(Cli, OutputFile) {
  const std::string path = temp_path("eigs.csv");
  ASSERT_EQ(run({"eigs", "--n", "3", "--out", path}).code, 0);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "i,j,lambda,family");
  std::filesystem::remove(path);
}
