#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "gaitkit/io.hpp"
#include "gaitkit/pipeline.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gaitkit;
using gaitkit::testing::run_cli;
using gaitkit::testing::slurp;
using gaitkit::testing::source_path;
using gaitkit::testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const std::string kMap = q(source_path("config/skeleton_map.json"));
const std::string kNorm = q(source_path("config/normative_placeholder.json"));
const fs::path kData = GAITKIT_TEST_DATA;

// Every regular file below `dir`, relative path -> bytes.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

std::string synth_args(const fs::path& out, int subjects, int trials, const std::string& extra = "") {
  return "synth --normative " + kNorm + " --out " + q(out) + " --subjects " + std::to_string(subjects) + " --trials " +
         std::to_string(trials) + " --duration-s 5 " + extra;
}

std::string process_args(const fs::path& in, const fs::path& out) {
  return "process --input " + q(in) + " --skeleton-map " + kMap + " --normative " + kNorm + " --out " + q(out);
}

}  // namespace

TEST(Cli, HelpAndBadFlags) {
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("process --help"), 0);
  EXPECT_EQ(run_cli("frobnicate"), kExitConfig);
  EXPECT_EQ(run_cli("process --input x"), kExitConfig);
  EXPECT_EQ(run_cli("classify --input x --out y --boundary-mode sideways"), kExitConfig);
}

TEST(Cli, ProcessReportsEveryTrial) {
  TempDir dir("process");
  ASSERT_EQ(run_cli("--seed 3 " + synth_args(dir / "ds", 3, 2, "--class-mix all")), 0);
  const auto manifest = read_json(dir / "ds" / "trials" / "S01_T01.json");
  EXPECT_TRUE(manifest["provenance"]["config_hash"].is_string());
  EXPECT_EQ(manifest["provenance"]["seed"], 3);
  ASSERT_EQ(run_cli("--seed 3 " + process_args(dir / "ds", dir / "out")), 0);
  const auto summary = read_json(dir / "out" / "summary.json");
  EXPECT_EQ(summary["trials_total"], 6);
  EXPECT_EQ(summary["trials_ok"], 6);
  long counted = 0;
  for (const auto& [cls, n] : summary["class_counts"].items()) counted += n.get<long>();
  EXPECT_EQ(counted, 6);
  std::size_t reports = 0;
  for (const auto& e : fs::directory_iterator(dir / "out" / "trials")) reports += e.path().extension() == ".json";
  EXPECT_EQ(reports, 6u);
  EXPECT_EQ(read_zscore_csv(dir / "out" / "zscores.csv", ZSource::BiomechBaseline).size(), 6u);
}

TEST(Cli, MissingSkeletonMapIsConfigError) {
  TempDir dir("nomap");
  ASSERT_EQ(run_cli(synth_args(dir / "ds", 1, 1)), 0);
  EXPECT_EQ(run_cli("process --input " + q(dir / "ds") + " --skeleton-map " + q(dir / "absent.json") + " --normative " +
                    kNorm + " --out " + q(dir / "out")),
            kExitConfig);
}

TEST(Cli, PartialFailureExitsOne) {
  TempDir dir("partial");
  ASSERT_EQ(run_cli(synth_args(dir / "ds", 2, 1)), 0);
  // Replace one trial with a standing subject: no progression, no cycles.
  const auto manifest = load_manifest(dir / "ds" / "trials" / "S01_T01.json");
  const auto standing = pose_sequence(std::vector<BodyPose>(300), 60.0, manifest.info());
  write_keypoint_csv(dir / "ds" / "trials" / manifest.keypoints_file, standing);
  EXPECT_EQ(run_cli(process_args(dir / "ds", dir / "out")), kExitPartial);
  const auto summary = read_json(dir / "out" / "summary.json");
  EXPECT_EQ(summary["trials_failed"], 1);
  EXPECT_EQ(summary["trials"][0]["error_code"], "NoProgression");
}

TEST(Cli, RerunsAreByteIdenticalAndStamped) {
  TempDir dir("rerun");
  ASSERT_EQ(run_cli("--seed 11 " + synth_args(dir / "a", 5, 2, "--class-mix all --noise-mm 3")), 0);
  ASSERT_EQ(run_cli("--seed 11 " + synth_args(dir / "b", 5, 2, "--class-mix all --noise-mm 3")), 0);
  EXPECT_EQ(tree(dir / "a"), tree(dir / "b"));
  ASSERT_EQ(run_cli("--seed 11 --workers 4 " + process_args(dir / "a", dir / "pa")), 0);
  ASSERT_EQ(run_cli("--seed 11 --workers 1 " + process_args(dir / "a", dir / "pb")), 0);
  const auto pa = tree(dir / "pa");
  EXPECT_EQ(pa, tree(dir / "pb"));
  for (const auto& [name, bytes] : pa) {
    EXPECT_NE(bytes.find("config_hash"), std::string::npos) << name;
    EXPECT_NE(bytes.find("seed"), std::string::npos) << name;
  }
}

TEST(Cli, EnvSeedOverridesFlag) {
  TempDir dir("envseed");
  ASSERT_EQ(run_cli("--seed 1 " + synth_args(dir / "a", 2, 1, "--noise-mm 2"), "GAITKIT_SEED=9"), 0);
  ASSERT_EQ(run_cli("--seed 9 " + synth_args(dir / "b", 2, 1, "--noise-mm 2")), 0);
  EXPECT_EQ(tree(dir / "a"), tree(dir / "b"));
  EXPECT_EQ(run_cli(synth_args(dir / "c", 1, 1), "GAITKIT_SEED=banana"), kExitConfig);
}

TEST(Cli, CrossvalTooFewSubjects) {
  TempDir dir("few");
  ASSERT_EQ(run_cli(synth_args(dir / "ds", 4, 2)), 0);
  CrossvalConfig config;
  config.input_dir = dir / "ds";
  config.skeleton_map = source_path("config/skeleton_map.json");
  config.normative = source_path("config/normative_placeholder.json");
  config.output_dir = dir / "cv";
  std::ostringstream log;
  try {
    cmd_crossval(config, log);
    FAIL();
  } catch (const GaitError& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewSubjects);
  }
  EXPECT_EQ(run_cli("crossval --input " + q(dir / "ds") + " --skeleton-map " + kMap + " --normative " + kNorm +
                    " --out " + q(dir / "cv")),
            kExitConfig);
}

TEST(Cli, CrossvalRepeatsDeterministic) {
  TempDir dir("cv");
  ASSERT_EQ(run_cli("--seed 2 " + synth_args(dir / "ds", 10, 2, "--class-mix all")), 0);
  const std::string args = "crossval --input " + q(dir / "ds") + " --skeleton-map " + kMap + " --normative " + kNorm +
                           " --repeats 2 --out ";
  ASSERT_EQ(run_cli("--seed 5 " + args + q(dir / "a")), 0);
  ASSERT_EQ(run_cli("--seed 5 --workers 1 " + args + q(dir / "b")), 0);
  EXPECT_EQ(slurp(dir / "a" / "aggregate.csv"), slurp(dir / "b" / "aggregate.csv"));
  EXPECT_EQ(tree(dir / "a"), tree(dir / "b"));
  const auto cv = read_json(dir / "a" / "crossval.json");
  EXPECT_TRUE(cv["leakage_free"].get<bool>());
  EXPECT_EQ(cv["repeats"].size(), 2u);
  for (const auto* leaf : {"report.json", "report_table.csv", "confusion.csv", "predictions.csv", "bland_altman.svg",
                           "calibration.svg", "roc.svg", "per_bin.svg"}) {
    EXPECT_TRUE(fs::exists(dir / "a" / "repeat0" / leaf)) << leaf;
  }
}

TEST(Cli, EvaluatePerfectAndMismatch) {
  TempDir dir("eval");
  const auto truth = kData / "golden_truth.csv";
  ASSERT_EQ(run_cli("evaluate --truth " + q(truth) + " --predictions " + q(truth) + " --out " + q(dir / "perfect")), 0);
  const auto report = read_json(dir / "perfect" / "report.json");
  EXPECT_EQ(report["knee"]["r2"], 1.0);
  EXPECT_EQ(report["ankle"]["mae"], 0.0);
  EXPECT_EQ(report["screen"]["auroc"], 1.0);
  EXPECT_EQ(report["multiclass"]["accuracy"], 1.0);

  auto rows = read_zscore_csv(kData / "golden_pred.csv", ZSource::Predictor);
  std::swap(rows[3], rows[7]);
  write_zscore_csv(dir / "shuffled.csv", rows);
  EXPECT_EQ(run_cli("evaluate --truth " + q(truth) + " --predictions " + q(dir / "shuffled.csv") + " --out " +
                    q(dir / "bad")),
            kExitConfig);
}

TEST(Cli, EvaluateMatchesGolden) {
  TempDir dir("golden");
  ASSERT_EQ(run_cli("evaluate --truth " + q(kData / "golden_truth.csv") + " --predictions " +
                    q(kData / "golden_pred.csv") + " --out " + q(dir.path())),
            0);
  EXPECT_EQ(slurp(dir / "report.json"), slurp(kData / "golden_report.json"));
}

TEST(Cli, GoldenAgreesWithOracles) {
  const auto golden = read_json(kData / "golden_report.json");
  const auto truth = read_zscore_csv(kData / "golden_truth.csv", ZSource::GroundTruth);
  const auto pred = read_zscore_csv(kData / "golden_pred.csv", ZSource::Predictor);
  oracle::Vec tk, pk, ta, pa;
  std::vector<bool> screen;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    tk.push_back(truth[i].knee_z);
    pk.push_back(pred[i].knee_z);
    ta.push_back(truth[i].ankle_z);
    pa.push_back(pred[i].ankle_z);
    screen.push_back(truth[i].knee_z > 1.0);
  }
  EXPECT_NEAR(golden["knee"]["r2"].get<double>(), oracle::r2(tk, pk), 1e-12);
  EXPECT_NEAR(golden["ankle"]["rmse"].get<double>(), oracle::rmse(ta, pa), 1e-12);
  EXPECT_NEAR(golden["knee"]["ccc"].get<double>(), oracle::ccc(tk, pk), 1e-12);
  EXPECT_NEAR(golden["ankle"]["bland_altman"]["loa_low"].get<double>(), oracle::bland_altman(ta, pa).low, 1e-12);
  EXPECT_NEAR(golden["knee"]["calibration"]["slope"].get<double>(), oracle::calibration_slope(tk, pk, 10), 1e-12);
  EXPECT_NEAR(golden["screen"]["auroc"].get<double>(), oracle::auroc_pairwise(screen, pk), 1e-12);
  EXPECT_NEAR(golden["screen"]["auprc"].get<double>(), oracle::auprc_stepwise(screen, pk), 1e-12);
}

TEST(Cli, ClassifyWritesTableStrings) {
  TempDir dir("classify");
  std::ofstream(dir / "z.csv") << "trial_id,limb_side,knee_z,ankle_z\nA,left,2,-2\nB,right,1,0\nC,left,-2,2\n";
  ASSERT_EQ(run_cli("classify --input " + q(dir / "z.csv") + " --out " + q(dir / "out")), 0);
  const auto csv = slurp(dir / "out" / "classes.csv");
  EXPECT_NE(csv.find("A,left,2,-2,Jump Gait,false,false,true"), std::string::npos) << csv;
  EXPECT_NE(csv.find("B,right,1,0,Normal,true,false,false"), std::string::npos) << csv;
  EXPECT_NE(csv.find("C,left,-2,2,Unclassified,false,true,false"), std::string::npos) << csv;
  ASSERT_EQ(run_cli("classify --fallback nearest_region --input " + q(dir / "z.csv") + " --out " + q(dir / "near")), 0);
  EXPECT_EQ(slurp(dir / "near" / "classes.csv").find("Unclassified"), std::string::npos);
}
