#include <gtest/gtest.h>

#include <filesystem>

#include "support/generators.hpp"

using namespace tamekit;
using namespace tamekit::testing;
using io::Json;

namespace fs = std::filesystem;

TEST(MatrixJson, RoundTrip) {
  Rng rng = make_rng(101);
  const Matrix m = gaussian_matrix(3, 3, rng);
  const Json j = io::matrix_json(m);
  EXPECT_EQ(j["dim"], 3);
  EXPECT_EQ(io::parse_matrix(io::parse_json_text(j.dump(), "m")), m);
  const Matrix r = gaussian_matrix(2, 5, rng);
  EXPECT_EQ(io::parse_matrix(io::parse_json_text(io::matrix_json(r).dump(), "r")), r);
}

TEST(MatrixJson, ComplexRoundTrip) {
  Rng rng = make_rng(102);
  CMatrix c(2, 2);
  c.real() = gaussian_matrix(2, 2, rng);
  c.imag() = gaussian_matrix(2, 2, rng);
  const Json j = io::complex_matrix_json(c);
  EXPECT_TRUE(io::is_complex_matrix(j));
  EXPECT_EQ(io::parse_complex_matrix(io::parse_json_text(j.dump(), "c")), c);
  // A real matrix reads as complex with zero imaginary part.
  const CMatrix from_real = io::parse_complex_matrix(io::matrix_json(c.real()));
  EXPECT_EQ(from_real.imag(), Matrix::Zero(2, 2));
}

TEST(MatrixJson, Malformed) {
  EXPECT_THROW(io::parse_matrix(Json::parse(R"({"dim": 2, "rows": [[1, 2], [3]]})")), ParseError);
  EXPECT_THROW(io::parse_matrix(Json::parse(R"({"dim": 3, "rows": [[1, 2], [3, 4]]})")), ParseError);
  EXPECT_THROW(io::parse_matrix(Json::parse(R"({"dim": 1, "rows": [["x"]]})")), ParseError);
  EXPECT_THROW(io::parse_matrix(Json::parse(R"({"dim": 1})")), ParseError);
  EXPECT_THROW(io::parse_matrix(Json::parse(R"({"dim": 1, "rows": [["inf"]]})")), ParseError);
  EXPECT_THROW(io::parse_json_text("{\"dim\": ", "text"), ParseError);
  EXPECT_THROW(io::parse_complex_matrix(Json::parse(R"({"re": [[1, 2]], "im": [[1]]})")), ParseError);
}

TEST(Numbers, SpecialValues) {
  EXPECT_EQ(io::number(kInfinity), "inf");
  EXPECT_EQ(io::number(-kInfinity), "-inf");
  EXPECT_TRUE(io::number(std::nan("")).is_null());
  EXPECT_TRUE(std::isinf(io::parse_number(Json("inf"), "x")));
  EXPECT_EQ(io::csv_number(kInfinity), "inf");
  EXPECT_EQ(io::csv_number(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(io::csv_number(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_THROW(io::parse_number(Json("abc"), "x"), ParseError);
}

TEST(PatchSetJson, RoundTrip) {
  Rng rng = make_rng(103);
  const SliceInstance s = random_slice(2, 4, rng);
  Rng f = make_rng(1), b = make_rng(2);
  PatchPoint p;
  p.id = "p0";
  p.t = s.t;
  p.omega_f = s.omega_f;
  p.weights = {{"U", 0.25}, {"V", 0.75}};
  p.structures = {{"U", random_slice_compatible(s, f, b)}, {"V", random_slice_compatible(s, f, b)}};
  p.certified_regular = true;
  const LocalPatchSet set{{p}};
  const LocalPatchSet back = io::parse_patch_set(io::parse_json_text(io::patch_set_json(set).dump(), "set"));
  ASSERT_EQ(back.points.size(), 1u);
  EXPECT_EQ(back.points[0].id, "p0");
  EXPECT_EQ(back.points[0].weights, p.weights);
  EXPECT_EQ(back.points[0].structures.at("U"), p.structures.at("U"));
  EXPECT_EQ(back.points[0].t, p.t);
  EXPECT_TRUE(back.points[0].certified_regular);
  EXPECT_THROW(io::parse_patch_set(Json::parse(R"([{"weights": {}}])")), ParseError);
  EXPECT_THROW(io::parse_patch_set(Json::parse(R"({"pts": []})")), ParseError);
}

TEST(FibrationJson, RoundTrip) {
  const SampledFibration fib = generate_product_bundle({2, 2, 0.4});
  const Json j = io::fibration_json(fib);
  EXPECT_EQ(j["schema"], "fib/1");
  const SampledFibration back = io::parse_fibration(io::parse_json_text(j.dump(), "fib"));
  ASSERT_EQ(back.samples.size(), fib.samples.size());
  EXPECT_EQ(back.generator, "product");
  EXPECT_EQ(back.mesh, fib.mesh);
  EXPECT_EQ(back.parameters, fib.parameters);
  for (std::size_t i = 0; i < fib.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].id, fib.samples[i].id);
    EXPECT_EQ(back.samples[i].j, fib.samples[i].j);
    EXPECT_EQ(back.samples[i].kernel, fib.samples[i].kernel);
  }
  EXPECT_NO_THROW(validate_fibration(back));
  EXPECT_EQ(io::fibration_json(back).dump(), j.dump());
  Json bad = j;
  bad["schema"] = "fib/2";
  EXPECT_THROW(io::parse_fibration(bad), ParseError);
  bad = j;
  bad["samples"][0].erase("eta");
  EXPECT_THROW(io::parse_fibration(bad), ParseError);
}

TEST(ThresholdCsv, Format) {
  ThresholdReport r;
  r.rows = {{"a", 1.5, 0.25}, {"b", kInfinity, 2.0}};
  r.threshold = 1.5;
  EXPECT_EQ(io::threshold_csv(r), "sample_id,t0,margin_at_half_t0\na,1.5,0.25\nb,inf,2\n");
}

TEST(CampaignJson, RoundTrip) {
  SearchCampaign c;
  c.dim = 6;
  c.k = 3;
  c.mode = SearchMode::hybrid;
  c.seed = 12345678901234ULL;
  c.trials = 77;
  c.compatible_only = true;
  c.margin_floor = 0.01;
  const SearchCampaign back = io::parse_campaign(io::parse_json_text(io::campaign_json(c).dump(), "c"));
  EXPECT_EQ(io::campaign_json(back).dump(), io::campaign_json(c).dump());
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.mode, SearchMode::hybrid);
  EXPECT_THROW(io::parse_campaign(Json::parse(R"({"mode": "sideways"})")), ParseError);
  EXPECT_THROW(io::parse_campaign(Json::parse(R"({"trials": "many"})")), ParseError);
  EXPECT_THROW(io::parse_campaign(Json::parse("[]")), ParseError);
  // Missing keys take defaults.
  EXPECT_EQ(io::parse_campaign(Json::parse("{}")).trials, SearchCampaign{}.trials);
}

TEST(ReportOutputs, CsvAndCandidates) {
  SearchCampaign c;
  c.trials = 20;
  c.k = 2;
  const CampaignReport rep = run_campaign(c);
  const std::string csv = io::report_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "trial,mode,objective,min_vertex_margin,t1,t2,verdict");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
  const Json j = io::report_json(rep);
  EXPECT_EQ(j["records"].size(), 20u);
  EXPECT_EQ(j["candidate_count"], rep.candidates.size());
  const Json cand = io::candidates_json(rep);
  EXPECT_EQ(cand["candidates"].size(), rep.candidates.size());
  EXPECT_EQ(cand["omega"]["dim"], 4);
}

TEST(AtomicWrite, ReplacesContentWithoutLeftovers) {
  const fs::path dir = fs::temp_directory_path() / ("tamekit_io_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const fs::path file = dir / "sub" / "out.txt";
  io::atomic_write(file, "first\n");
  io::atomic_write(file, "second\n");
  EXPECT_EQ(io::read_file(file), "second\n");
  std::size_t entries = 0;
  for (const auto& e : fs::directory_iterator(file.parent_path())) {
    (void)e;
    ++entries;
  }
  EXPECT_EQ(entries, 1u);
  fs::remove_all(dir);
  EXPECT_THROW(io::read_file(file), ParseError);
}
