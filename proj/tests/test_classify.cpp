#include <gtest/gtest.h>

#include "gaitkit/classify.hpp"

using namespace gaitkit;

namespace {

constexpr std::array<double, 9> kGrid = {-3.0, -2.0, -1.5, -0.5, 0.0, 0.5, 1.5, 2.0, 3.0};

// Rows: knee z from the grid above; columns: ankle z. Derived by hand from the
// published region table. N normal, T true equinus, J jump, A apparent
// equinus, C crouch, K ankle crouch, R recurvatum, U unclassified.
constexpr std::array<const char*, 9> kTruth = {
    "TTTRRRUUU",  // -3
    "TTTRRRUUU",  // -2
    "TTTRRRUUU",  // -1.5
    "TTTNNNKKK",  // -0.5
    "TTTNNNKKK",  // 0
    "TTTNNNKKK",  // 0.5
    "JJJAAACCC",  // 1.5
    "JJJAAACCC",  // 2
    "JJJAAACCC",  // 3
};

GaitClass from_letter(char c) {
  switch (c) {
    case 'N': return GaitClass::Normal;
    case 'T': return GaitClass::TrueEquinus;
    case 'J': return GaitClass::Jump;
    case 'A': return GaitClass::ApparentEquinus;
    case 'C': return GaitClass::Crouch;
    case 'K': return GaitClass::AnkleCrouch;
    case 'R': return GaitClass::Recurvatum;
    default: return GaitClass::Unclassified;
  }
}

}  // namespace

TEST(RoddaGraham, WorkedExamples) {
  EXPECT_EQ(classify(0, 0).label, GaitClass::Normal);
  EXPECT_EQ(classify(2, -2).label, GaitClass::Jump);
  EXPECT_EQ(classify(-2, 0.5).label, GaitClass::Recurvatum);
  const auto u = classify(-2, 2, {BoundaryMode::Strict, Fallback::Unclassified});
  EXPECT_EQ(u.label, GaitClass::Unclassified);
  EXPECT_TRUE(u.used_fallback);
}

TEST(RoddaGraham, GridMatchesHandTable) {
  for (std::size_t i = 0; i < kGrid.size(); ++i) {
    for (std::size_t j = 0; j < kGrid.size(); ++j) {
      const auto c = classify(kGrid[i], kGrid[j]);
      EXPECT_EQ(c.label, from_letter(kTruth[i][j])) << kGrid[i] << ", " << kGrid[j];
      EXPECT_FALSE(c.on_boundary);
      EXPECT_EQ(c.used_fallback, kTruth[i][j] == 'U');
    }
  }
}

TEST(RoddaGraham, StrictBoundaries) {
  struct Case {
    double k, a;
    GaitClass expected;
  };
  for (const auto& c : {Case{1, 0, GaitClass::Normal}, Case{-1, 0, GaitClass::Normal}, Case{0, 1, GaitClass::Normal},
                        Case{1, 1, GaitClass::Normal}, Case{-1, -1, GaitClass::Normal},
                        Case{1, -2, GaitClass::TrueEquinus}, Case{2, 1, GaitClass::ApparentEquinus},
                        Case{2, -1, GaitClass::ApparentEquinus}, Case{-2, -1, GaitClass::Recurvatum},
                        Case{-1, 2, GaitClass::AnkleCrouch}, Case{1, 2, GaitClass::AnkleCrouch}}) {
    const auto out = classify(c.k, c.a);
    EXPECT_EQ(out.label, c.expected) << c.k << ", " << c.a;
    EXPECT_TRUE(out.on_boundary);
  }
}

TEST(RoddaGraham, ExclusiveBoundariesFallBack) {
  const ClassificationPolicy exclusive{BoundaryMode::Exclusive, Fallback::Unclassified};
  EXPECT_EQ(classify(1, 0, exclusive).label, GaitClass::Unclassified);
  EXPECT_EQ(classify(0.5, 0.5, exclusive).label, GaitClass::Normal);
}

TEST(RoddaGraham, NearestRegionFallback) {
  const ClassificationPolicy nearest{BoundaryMode::Strict, Fallback::NearestRegion};
  const auto c = classify(-2, 2, nearest);
  EXPECT_TRUE(c.used_fallback);
  EXPECT_NE(c.label, GaitClass::Unclassified);
  // Centroids: Recurvatum (-2, 0), Ankle Crouch (0, 2).
  EXPECT_EQ(classify(-2.5, 1.5, nearest).label, GaitClass::Recurvatum);
  EXPECT_EQ(classify(-1.5, 2.5, nearest).label, GaitClass::AnkleCrouch);
}

TEST(RoddaGraham, MonotoneAlongKnee) {
  GaitClass previous = classify(-3.0, -2.0).label;
  int transitions = 0;
  for (double k = -3.0; k <= 3.0; k += 0.01) {
    const auto label = classify(k, -2.0).label;
    if (label != previous) {
      ++transitions;
      EXPECT_EQ(previous, GaitClass::TrueEquinus);
      EXPECT_EQ(label, GaitClass::Jump);
      EXPECT_NEAR(k, 1.0, 0.011);
    }
    previous = label;
  }
  EXPECT_EQ(transitions, 1);
}

TEST(FlexionScreen, StrictThreshold) {
  EXPECT_TRUE(flexion_screen(1.5));
  EXPECT_FALSE(flexion_screen(0.0));
  EXPECT_FALSE(flexion_screen(1.0));
  for (double k : kGrid) {
    const auto label = classify(k, 0.0).label;
    EXPECT_EQ(flexion_screen(k), label == GaitClass::ApparentEquinus);
  }
}

TEST(Regions, DistanceIsZeroInsideAndPositiveOutside) {
  for (double k : kGrid) {
    for (double a : kGrid) {
      const auto label = classify(k, a).label;
      for (auto cls : kRuleClasses) {
        const double d = distance_to_region(k, a, cls);
        if (cls == label) EXPECT_EQ(d, 0.0);
        else EXPECT_GT(d, 0.0);
      }
    }
  }
}

TEST(Regions, ThreeClass) {
  EXPECT_EQ(three_class(-1.2), -1);
  EXPECT_EQ(three_class(-1.0), 0);
  EXPECT_EQ(three_class(1.0), 0);
  EXPECT_EQ(three_class(1.01), 1);
}
