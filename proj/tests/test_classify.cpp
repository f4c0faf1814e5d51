#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "warpbci/classify.hpp"
#include "warpbci/synth.hpp"

using namespace warpbci;

namespace {

Reference ref(std::vector<double> v, ArtifactClass c) { return {Series::scalar(std::move(v)), c, "s1", "a"}; }

const WarpOptions kRaw{WarpVariant::VanillaDtw, LocalDistance::Euclidean, false};

}  // namespace

TEST(Knn, NearestNeighbourAndMajority) {
  const ReferenceSet refs{ref({0, 0, 0}, ArtifactClass::EyeBlink), ref({5, 5, 5}, ArtifactClass::HeadNod),
                          ref({6, 6, 6}, ArtifactClass::HeadNod)};
  const Series q{1, 1, 1};
  EXPECT_EQ(knn_classify(q, refs, 1, kRaw).label, ArtifactClass::EyeBlink);
  EXPECT_EQ(knn_classify(q, refs, 3, kRaw).label, ArtifactClass::HeadNod);
  EXPECT_THROW(knn_classify(q, refs, 4, kRaw), ArgError);
  EXPECT_THROW(knn_classify(q, {}, 1, kRaw), ArgError);
}

TEST(Knn, VoteTieGoesToSmallerSummedDistance) {
  // k = 2, one vote each: HeadTurn at 1 beats EyeBlink at 2.
  const ReferenceSet refs{ref({2}, ArtifactClass::EyeBlink), ref({-1}, ArtifactClass::HeadTurn)};
  EXPECT_EQ(knn_classify(Series{0.0}, refs, 2, kRaw).label, ArtifactClass::HeadTurn);
}

TEST(Knn, ExactTieGoesToEarlierClass) {
  const ReferenceSet refs{ref({1}, ArtifactClass::EyeBlink), ref({-1}, ArtifactClass::JawMovement)};
  EXPECT_EQ(knn_classify(Series{0.0}, refs, 2, kRaw).label, ArtifactClass::JawMovement);
  EXPECT_EQ(knn_classify(Series{0.0}, refs, 1, kRaw).label, ArtifactClass::JawMovement);
}

TEST(Knn, ReferenceOrderDoesNotMatter) {
  ReferenceSet refs{ref({1}, ArtifactClass::EyeBlink), ref({-1}, ArtifactClass::HeadNod),
                    ref({3}, ArtifactClass::HeadTurn)};
  const auto a = knn_classify(Series{0.0}, refs, 2, kRaw).label;
  std::swap(refs[0], refs[2]);
  EXPECT_EQ(knn_classify(Series{0.0}, refs, 2, kRaw).label, a);
}

TEST(Featurize, DetectedWindowLength) {
  GenSpec g;
  g.noise_sigma = 0.0;
  const auto trials = gen_trials(g, 1);
  for (const EegTrial& t : trials) {
    const ArtifactSignal sig = artifact_signal(t);
    const auto ev = detect_in_epoch(sig, ThresholdSpec{});
    ASSERT_TRUE(ev.has_value());
    EXPECT_EQ(featurize(t).length(), ev->offset - ev->onset + 1);
    FeatureParams multi;
    multi.mode = FeatureMode::Multichannel;
    const Series m = featurize(t, multi);
    EXPECT_EQ(m.dim(), t.channels());
    EXPECT_EQ(m.length(), ev->offset - ev->onset + 1);
  }
}

TEST(Featurize, FlatEpochUsesWholeWindow) {
  EegTrial t;
  t.sample_rate = 100;
  t.data = {std::vector<double>(50, 1.0)};
  EXPECT_EQ(featurize(t).length(), 50u);
}

TEST(Split, IntraSessionIsStratifiedAndDisjoint) {
  GenSpec g;
  g.subjects = 2;
  g.sessions = 2;
  g.epoch_s = 2.5;
  const auto trials = gen_trials(g, 5);
  const Split s = split_trials(trials, Protocol::IntraSession, 3);
  EXPECT_EQ(s.reference.size() + s.test.size(), trials.size());
  std::set<std::size_t> all(s.reference.begin(), s.reference.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), trials.size());
  // ceil(5/2) = 3 references in each of 16 strata.
  EXPECT_EQ(s.reference.size(), 48u);
  const Split again = split_trials(trials, Protocol::IntraSession, 3);
  EXPECT_EQ(again.reference, s.reference);
}

TEST(Split, CrossProtocols) {
  GenSpec g;
  g.subjects = 3;
  g.sessions = 2;
  g.epoch_s = 2.5;
  const auto trials = gen_trials(g, 2);
  const Split ses = split_trials(trials, Protocol::InterSession, 0);
  for (std::size_t i : ses.reference) EXPECT_EQ(trials[i].session_id, "a");
  for (std::size_t i : ses.test) EXPECT_EQ(trials[i].session_id, "b");

  const Split sub = split_trials(trials, Protocol::InterSubject, 0);
  std::set<std::string> ref_subjects, test_subjects;
  for (std::size_t i : sub.reference) ref_subjects.insert(trials[i].subject_id);
  for (std::size_t i : sub.test) test_subjects.insert(trials[i].subject_id);
  EXPECT_EQ(ref_subjects.size(), 2u);
  EXPECT_EQ(test_subjects.size(), 1u);
  for (const auto& s : ref_subjects) EXPECT_EQ(test_subjects.count(s), 0u);

  GenSpec one;
  const auto single = gen_trials(one, 2);
  EXPECT_THROW(split_trials(single, Protocol::InterSession, 0), ProtocolError);
  EXPECT_THROW(split_trials(single, Protocol::InterSubject, 0), ProtocolError);
  auto unlabelled = single;
  unlabelled[0].label.reset();
  EXPECT_THROW(split_trials(unlabelled, Protocol::IntraSession, 0), ProtocolError);
}

TEST(Protocol, Names) {
  EXPECT_EQ(parse_protocol("intra"), Protocol::IntraSession);
  EXPECT_EQ(parse_protocol("inter-session"), Protocol::InterSession);
  EXPECT_EQ(parse_protocol("inter-subject"), Protocol::InterSubject);
  EXPECT_THROW(parse_protocol("loso"), ArgError);
}

TEST(Evaluate, SeparableSetIsPerfect) {
  GenSpec g;
  const auto trials = gen_trials(g, 6);
  EvalParams p;
  p.ks = {1, 3};
  const auto reports = evaluate(trials, p);
  ASSERT_EQ(reports.size(), 2u);
  for (const auto& r : reports) {
    EXPECT_EQ(r.total(), 12u);
    EXPECT_EQ(r.references, 12u);
    EXPECT_DOUBLE_EQ(r.overall_accuracy(), 1.0);
  }
  EXPECT_THROW(evaluate(trials, EvalParams{.ks = {13}}), ArgError);
}

TEST(Report, CsvAndJsonLayout) {
  EvalReport r;
  r.k = 1;
  r.confusion[index_of(ArtifactClass::EyeBlink)][index_of(ArtifactClass::EyeBlink)] = 3;
  r.confusion[index_of(ArtifactClass::EyeBlink)][index_of(ArtifactClass::HeadNod)] = 1;
  r.confusion[index_of(ArtifactClass::HeadNod)][index_of(ArtifactClass::HeadNod)] = 2;
  std::ostringstream out;
  const std::vector<EvalReport> rs{r};
  write_report_csv(out, rs);
  EXPECT_EQ(out.str(),
            "protocol,variant,k,HeadNod,EyeBlink,model_accuracy\n"
            "intra,ndtw,1,1.0000,0.7500,0.8333\n");
  const auto j = report_to_json(r);
  EXPECT_EQ(j["tests"], 6);
  EXPECT_EQ(j["confusion"]["rows_truth_cols_predicted"][1][0], 1);
}
