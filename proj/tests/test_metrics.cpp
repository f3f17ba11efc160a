#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "miptrace/metrics.hpp"
#include "support.hpp"

using namespace miptrace;
using testsup::mask_from_art;

TEST_CASE("dice on the canonical cases") {
    MipImage a = mask_from_art({"##..", "##.."});
    CHECK(dice(a, a) == 1.0);

    MipImage b = mask_from_art({"..##", "..##"});
    CHECK(dice(a, b) == 0.0);

    // |A| = |B| = 4, |A and B| = 2
    MipImage c = mask_from_art({".##.", ".##."});
    CHECK(dice(a, c) == 0.5);

    MipImage empty = mask_from_art({"....", "...."});
    CHECK(dice(empty, empty) == 1.0);
    CHECK(dice(a, empty) == 0.0);
}

TEST_CASE("iou on the canonical cases") {
    MipImage a = mask_from_art({"##..", "##.."});
    CHECK(iou(a, a) == 1.0);

    // intersection 2, union 6
    MipImage c = mask_from_art({".##.", ".##."});
    CHECK(iou(a, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    // the overlap identity: iou 1/3 pairs with dice 1/2
    CHECK(dice(a, c) == doctest::Approx(2.0 * (1.0 / 3.0) / (1.0 + 1.0 / 3.0)).epsilon(1e-12));

    MipImage empty = mask_from_art({"....", "...."});
    CHECK(iou(empty, empty) == 1.0);
}

TEST_CASE("shape mismatch is rejected") {
    MipImage a = mask_from_art({"#."});
    MipImage b = mask_from_art({"#.", ".."});
    CHECK_THROWS_AS(dice(a, b), std::invalid_argument);
    CHECK_THROWS_AS(iou(a, b), std::invalid_argument);
    CHECK_THROWS_AS(hausdorff(a, b), std::invalid_argument);
}

TEST_CASE("hausdorff distance basics") {
    MipImage a = mask_from_art({"#....", ".....", ".....", ".....", "....."});
    CHECK(hausdorff(a, a) == 0.0);

    // single points at (0,0) and (3,4): distance 5 (3-4-5 triangle)
    MipImage b = mask_from_art({".....", ".....", ".....", "....#", "....."});
    CHECK(hausdorff(a, b) == 5.0);

    MipImage empty = mask_from_art({".....", ".....", ".....", ".....", "....."});
    CHECK(hausdorff(empty, empty) == 0.0);
    CHECK(!hausdorff(a, empty).has_value());
    CHECK(!hausdorff(empty, a).has_value());
}

TEST_CASE("hausdorff is zero exactly when the pixel sets coincide") {
    MipImage a = mask_from_art({"##", ".."});
    MipImage b = mask_from_art({"##", ".#"});
    CHECK(hausdorff(a, a) == 0.0);
    CHECK(hausdorff(a, b).value() > 0.0);
}

TEST_CASE("random masks agree with the direct double-loop reference") {
    std::mt19937 rng(101);
    int undefined = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int rows = 1 + trial % 12;
        const int cols = 1 + (trial * 7) % 12;
        MipImage a = testsup::random_mask(rng, rows, cols, 0.25);
        MipImage b = testsup::random_mask(rng, rows, cols, 0.25);

        const auto oc = testsup::overlap_reference(a, b);
        const double expect_dice =
            (oc.a + oc.b) == 0 ? 1.0 : 2.0 * oc.inter / static_cast<double>(oc.a + oc.b);
        const double expect_iou = oc.uni == 0 ? 1.0 : oc.inter / static_cast<double>(oc.uni);
        CHECK(dice(a, b) == expect_dice);
        CHECK(iou(a, b) == expect_iou);

        const double d = dice(a, b), j = iou(a, b);
        CHECK(std::abs(d - 2.0 * j / (1.0 + j)) <= 1e-12);

        const auto hd = hausdorff(a, b);
        if ((oc.a == 0) != (oc.b == 0)) {
            CHECK(!hd.has_value());
            ++undefined;
        } else if (oc.a == 0 && oc.b == 0) {
            CHECK(hd.value() == 0.0);
        } else {
            CHECK(hd.value() == testsup::hausdorff_reference(a, b));
        }
    }
    CHECK(undefined > 0);  // the sample must exercise the undefined branch
}

TEST_CASE("both distance routes agree across the dispatch size boundary") {
    std::mt19937 rng(102);
    // |A| * |B| spans the cutoff between the double loop and the transform
    for (int trial = 0; trial < 12; ++trial) {
        const int side = 8 + trial * 8;
        MipImage a = testsup::random_mask(rng, side, side, 0.4);
        MipImage b = testsup::random_mask(rng, side, side, 0.4);
        if (testsup::foreground(a).empty() || testsup::foreground(b).empty()) continue;
        const double brute = detail::hausdorff_brute(a, b);
        const double edt = detail::hausdorff_edt(a, b);
        CHECK(brute == edt);
        CHECK(hausdorff(a, b).value() == brute);
    }
}

TEST_CASE("scores survive translating both masks together") {
    std::mt19937 rng(103);
    MipImage a = testsup::random_mask(rng, 8, 8, 0.3);
    MipImage b = testsup::random_mask(rng, 8, 8, 0.3);

    auto shifted = [](const MipImage& m, int dr, int dc) {
        MipImage out;
        out.rows = m.rows + 4;
        out.cols = m.cols + 4;
        out.kind = MipKind::Label;
        out.data.assign(static_cast<size_t>(out.rows) * out.cols, 0.0f);
        for (int r = 0; r < m.rows; ++r)
            for (int c = 0; c < m.cols; ++c)
                if (m.at(r, c) != 0.0f) out.at(r + dr, c + dc) = 1.0f;
        return out;
    };

    SegScores base = segmentation_scores(shifted(a, 0, 0), shifted(b, 0, 0));
    SegScores moved = segmentation_scores(shifted(a, 3, 2), shifted(b, 3, 2));
    CHECK(base.dice == moved.dice);
    CHECK(base.iou == moved.iou);
    CHECK(base.hausdorff == moved.hausdorff);
}

TEST_CASE("metric symmetry") {
    std::mt19937 rng(104);
    for (int trial = 0; trial < 20; ++trial) {
        MipImage a = testsup::random_mask(rng, 9, 7, 0.3);
        MipImage b = testsup::random_mask(rng, 9, 7, 0.3);
        CHECK(dice(a, b) == dice(b, a));
        CHECK(iou(a, b) == iou(b, a));
        CHECK(hausdorff(a, b) == hausdorff(b, a));
        CHECK(dice(a, b) >= iou(a, b));
    }
}

TEST_CASE("segmentation_scores bundles the three metrics") {
    MipImage a = mask_from_art({"##.", "#..", "..."});
    MipImage b = mask_from_art({"##.", "...", "..."});
    SegScores s = segmentation_scores(a, b);
    CHECK(s.dice == dice(a, b));
    CHECK(s.iou == iou(a, b));
    CHECK(s.hausdorff == hausdorff(a, b));
}

TEST_CASE("classification metrics") {
    SUBCASE("perfect classifier") {
        ClassificationScores s = classification_metrics({5, 0, 5, 0});
        CHECK(s.accuracy == 1.0);
        CHECK(s.precision.value() == 1.0);
        CHECK(s.recall.value() == 1.0);
        CHECK(s.f1.value() == 1.0);
    }

    SUBCASE("no positive predictions or labels leaves precision and recall undefined") {
        ClassificationScores s = classification_metrics({0, 0, 10, 0});
        CHECK(s.accuracy == 1.0);
        CHECK(!s.precision.has_value());
        CHECK(!s.recall.has_value());
        CHECK(!s.f1.has_value());
    }

    SUBCASE("mixed confusion") {
        // tp 8, fp 2, tn 0, fn 2
        ClassificationScores s = classification_metrics({8, 2, 0, 2});
        CHECK(s.precision.value() == 0.8);
        CHECK(s.recall.value() == 0.8);
        CHECK(s.f1.value() == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(s.accuracy == doctest::Approx(8.0 / 12.0).epsilon(1e-12));
    }

    SUBCASE("empty confusion is rejected") {
        CHECK_THROWS_AS(classification_metrics({0, 0, 0, 0}), std::invalid_argument);
        CHECK_THROWS_AS(classification_metrics({-1, 1, 1, 1}), std::invalid_argument);
    }
}

TEST_CASE("aggregate mean and population deviation") {
    AggregateScore one = aggregate({4.25});
    CHECK(one.mean == 4.25);
    CHECK(one.std_dev == 0.0);
    CHECK(one.n == 1);

    AggregateScore zeros = aggregate({0.0, 0.0, 0.0, 0.0});
    CHECK(zeros.mean == 0.0);
    CHECK(zeros.std_dev == 0.0);

    AggregateScore abc = aggregate({1.0, 2.0, 3.0});
    CHECK(abc.mean == 2.0);
    CHECK(abc.std_dev == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));

    CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
}
